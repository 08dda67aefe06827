#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "predq/errors.hpp"

namespace predq {

// Tolerances and budget for adaptive quadrature. An integral I is accepted
// once the summed panel error is <= max(abs_tol, rel_tol * |I|).
struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_subdivisions = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;      // estimated absolute error bound
  int subdivisions = 0;    // panels used
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half; the rule
// is symmetric). Node order interleaves Kronrod-only and Gauss points; wg
// applies to nodes 1, 3, 5, 7 (the embedded 7-point Gauss rule).
inline constexpr double kGK15Nodes[8] = {
    0.9914553711208126392068547,  // Kronrod only
    0.9491079123427585245261897,  // Gauss
    0.8648644233597690727897128,  // Kronrod only
    0.7415311855993944398638648,  // Gauss
    0.5860872354676911302941448,  // Kronrod only
    0.4058451513773971669066064,  // Gauss
    0.2077849550078984676006894,  // Kronrod only
    0.0,                          // Gauss (center)
};

inline constexpr double kGK15WeightsK[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992,
};

inline constexpr double kGK15WeightsG[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020,
};

struct Panel {
  double a, b;
  double value;   // Kronrod estimate
  double error;   // estimated absolute error
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One Gauss-Kronrod 7-15 evaluation over [a, b] with the QUADPACK-style
// error estimate, which sharpens the raw |K - G| difference using the
// integrand's deviation from its mean (important near integrable
// singularities, where |K - G| alone badly overestimates).
template <class F>
Panel gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);

  double fv[15];
  fv[14] = f(c);
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGK15Nodes[i];
    fv[2 * i] = f(c - dx);
    fv[2 * i + 1] = f(c + dx);
  }

  double resk = kGK15WeightsK[7] * fv[14];
  double resabs = std::abs(resk);
  double resg = kGK15WeightsG[3] * fv[14];
  for (int i = 0; i < 7; ++i) {
    const double sum = fv[2 * i] + fv[2 * i + 1];
    resk += kGK15WeightsK[i] * sum;
    resabs += kGK15WeightsK[i] * (std::abs(fv[2 * i]) + std::abs(fv[2 * i + 1]));
    if (i % 2 == 1) resg += kGK15WeightsG[i / 2] * sum;
  }

  const double reskh = resk * 0.5;
  double resasc = kGK15WeightsK[7] * std::abs(fv[14] - reskh);
  for (int i = 0; i < 7; ++i) {
    resasc += kGK15WeightsK[i] *
              (std::abs(fv[2 * i] - reskh) + std::abs(fv[2 * i + 1] - reskh));
  }

  const double value = resk * h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50) {
    err = std::max(eps50 * resabs, err);
  }
  return Panel{a, b, value, err};
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration over a finite interval [a, b].
// `breakpoints` seeds the initial subdivision (pass locations of kinks,
// peaks, or integrable endpoint singularities); values outside (a, b) are
// ignored. Throws NonConvergenceError (carrying the best estimate) if the
// subdivision budget is exhausted before tolerance is met, or if the
// integrand overflows inside a panel (non-integrable singularity).
template <class F>
QuadResult quad_finite(F&& f, double a, double b,
                       const QuadratureSettings& s = {},
                       std::vector<double> breakpoints = {}) {
  if (!(b > a)) return {0.0, 0.0, 0};

  std::vector<double> edges;
  edges.push_back(a);
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double p : breakpoints) {
    if (p > a && p < b && p > edges.back()) edges.push_back(p);
  }
  edges.push_back(b);

  std::priority_queue<detail::Panel> heap;
  double total = 0.0, total_err = 0.0;
  // A non-finite panel estimate means the integrand overflowed at an interior
  // node. Subdividing further cannot certify such an integral, and the
  // incremental running sums would be poisoned by inf - inf, so give up and
  // report the best finite estimate accumulated so far.
  auto require_finite = [&total, &total_err](const detail::Panel& p) {
    if (std::isfinite(p.value) && std::isfinite(p.error)) return;
    std::ostringstream msg;
    msg << "quadrature diverged: non-finite estimate on [" << p.a << ", "
        << p.b << "]";
    throw NonConvergenceError(msg.str(), total, total_err);
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = detail::gk15(f, edges[i], edges[i + 1]);
    require_finite(p);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }

  int used = static_cast<int>(edges.size()) - 1;
  // Error contributed by panels too narrow to bisect (midpoint no longer
  // strictly interior). Such error can never be reduced, so once it alone
  // exceeds the tolerance the integral is hopeless.
  double frozen_err = 0.0;
  while (!std::isfinite(total) ||
         total_err > std::max(s.abs_tol, s.rel_tol * std::abs(total))) {
    const double tol_now = std::max(s.abs_tol, s.rel_tol * std::abs(total));
    if (used >= s.max_subdivisions || heap.empty() || frozen_err > tol_now) {
      throw NonConvergenceError(
          "quadrature did not converge: estimate " + std::to_string(total) +
              ", residual " + std::to_string(total_err),
          total, total_err);
    }
    detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen_err += worst.error;  // stays counted in total/total_err
      continue;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    require_finite(left);
    require_finite(right);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++used;
  }
  return {total, total_err, used};
}

// Adaptive integration over [a, upper] where upper may be +infinity, in
// which case the tail is folded onto [0, 1) via x = a + t/(1-t). Endpoint
// singularities are tolerated provided they are integrable (the rule never
// evaluates the endpoints themselves).
template <class F>
QuadResult quad(F&& f, double a, double upper, const QuadratureSettings& s = {},
                std::vector<double> breakpoints = {}) {
  if (std::isfinite(upper)) {
    return quad_finite(std::forward<F>(f), a, upper, s, std::move(breakpoints));
  }
  auto transformed = [&f, a](double t) {
    const double omt = 1.0 - t;
    const double x = a + t / omt;
    if (!std::isfinite(x)) return 0.0;
    const double fx = f(x);
    return fx / (omt * omt);
  };
  std::vector<double> tb;
  tb.reserve(breakpoints.size());
  for (double p : breakpoints) {
    if (p > a && std::isfinite(p)) tb.push_back((p - a) / (1.0 + (p - a)));
  }
  return quad_finite(transformed, 0.0, 1.0, s, std::move(tb));
}

}  // namespace predq
