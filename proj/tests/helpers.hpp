#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

namespace testutil {

// Catch approximation with a relative tolerance (and a tiny absolute floor
// so targets near zero do not demand infinite precision).
inline Catch::Approx approx_rel(double target, double rel,
                                double abs_floor = 1e-300) {
  return Catch::Approx(target).epsilon(rel).margin(abs_floor);
}

// Composite Simpson rule with 2n panels: an oracle deliberately unrelated to
// the adaptive Gauss-Kronrod code under test.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
  const double h = (b - a) / (2.0 * n);
  long double acc = f(a) + f(b);
  for (int i = 1; i < 2 * n; ++i) {
    acc += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
  }
  return static_cast<double>(acc * h / 3.0L);
}

}  // namespace testutil
