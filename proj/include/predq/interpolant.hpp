#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "predq/errors.hpp"
#include "predq/quadrature.hpp"

namespace predq {

// Grid helper: [lo, hi] covered by a geometric ladder near lo (to resolve
// integrable singularities and fast variation at the left edge) followed by
// uniform spacing. Returned sorted, deduplicated, spanning exactly [lo, hi].
inline std::vector<double> graded_grid(double lo, double hi, int geometric = 40,
                                       int linear = 48) {
  std::vector<double> g;
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo, hi};
  g.push_back(lo);
  const double first = span * 1e-7;
  const double geo_end = span / 16.0;
  for (int k = 0; k < geometric; ++k) {
    const double frac = static_cast<double>(k) / (geometric - 1);
    g.push_back(lo + first * std::pow(geo_end / first, frac));
  }
  for (int k = 1; k <= linear; ++k) {
    g.push_back(lo + geo_end + (span - geo_end) * k / linear);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  g.back() = hi;
  return g;
}

namespace detail {

// Cubic Hermite evaluation on [x0, x1] given endpoint values and slopes.
inline double hermite(double x, double x0, double x1, double y0, double y1,
                      double d0, double d1) {
  const double w = x1 - x0;
  const double t = (x - x0) / w;
  const double t2 = t * t, t3 = t2 * t;
  return y0 * (2 * t3 - 3 * t2 + 1) + w * d0 * (t3 - 2 * t2 + t) +
         y1 * (-2 * t3 + 3 * t2) + w * d1 * (t3 - t2);
}

}  // namespace detail

// C1 piecewise-cubic representation of the running integral
// F(v) = integral of h over [lo, v]. Node slopes are the integrand values
// themselves (the exact derivative of F), so each cubic is the two-point
// Hermite interpolant of the true antiderivative; intervals are bisected
// until the interpolant matches a directly integrated midpoint value to
// `rel_tol` relative to the full mass. Evaluation clamps outside [lo, hi]
// (0 below, total() above).
class CumulativeInterpolant {
 public:
  template <class H>
  static CumulativeInterpolant build(H&& h, double lo, double hi,
                                     std::vector<double> grid = {},
                                     double rel_tol = 1e-7,
                                     int max_points = 20000) {
    CumulativeInterpolant ci;
    ci.lo_ = lo;
    ci.hi_ = hi;
    if (!(hi > lo)) {
      ci.x_ = {lo, lo};
      ci.f_ = {0.0, 0.0};
      ci.d_ = {0.0, 0.0};
      return ci;
    }
    if (grid.empty()) grid = graded_grid(lo, hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() > lo) grid.insert(grid.begin(), lo);
    if (grid.back() < hi) grid.push_back(hi);

    QuadratureSettings qs;
    qs.rel_tol = std::min(rel_tol * 0.1, 1e-9);
    qs.abs_tol = 0.0;  // set per interval below once scale is known

    // Pass 1: accurate per-interval masses and node derivatives.
    std::vector<double> x(grid), inc(grid.size() - 1), d(grid.size());
    double rough_total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      rough_total += detail::gk15(h, x[i], x[i + 1]).value;
    }
    qs.abs_tol = std::max(1e-300, std::abs(rough_total)) * rel_tol * 1e-3;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      inc[i] = quad_finite(h, x[i], x[i + 1], qs).value;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double hv = h(x[i]);
      d[i] = std::isfinite(hv) ? hv : std::numeric_limits<double>::quiet_NaN();
    }

    // Pass 2: bisect intervals until the Hermite curve reproduces a
    // directly-integrated midpoint value within tolerance.
    double total = 0.0;
    for (double v : inc) total += v;
    const double scale = std::max(std::abs(total), 1e-30);
    std::size_t i = 0;
    while (i + 1 < x.size()) {
      if (static_cast<int>(x.size()) > max_points) {
        throw NonConvergenceError(
            "cumulative interpolant refinement exceeded max_points", total,
            scale * rel_tol);
      }
      const double m = 0.5 * (x[i] + x[i + 1]);
      if (m <= x[i] || m >= x[i + 1]) {  // interval at floating-point width
        ++i;
        continue;
      }
      const double left = quad_finite(h, x[i], m, qs).value;
      double fi = 0.0;
      for (std::size_t k = 0; k < i; ++k) fi += inc[k];
      const double d0 = sanitize_slope(d[i], inc[i], x[i + 1] - x[i]);
      const double d1 = sanitize_slope(d[i + 1], inc[i], x[i + 1] - x[i]);
      const double interp =
          detail::hermite(m, x[i], x[i + 1], fi, fi + inc[i], d0, d1);
      if (std::abs(interp - (fi + left)) <= rel_tol * scale) {
        ++i;
        continue;
      }
      const double hm = h(m);
      x.insert(x.begin() + i + 1, m);
      d.insert(d.begin() + i + 1,
               std::isfinite(hm) ? hm : std::numeric_limits<double>::quiet_NaN());
      const double right = inc[i] - left;
      inc[i] = left;
      inc.insert(inc.begin() + i + 1, right);
    }

    ci.x_ = std::move(x);
    ci.f_.assign(ci.x_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < ci.x_.size(); ++k) {
      ci.f_[k + 1] = ci.f_[k] + inc[k];
    }
    ci.d_.resize(ci.x_.size());
    for (std::size_t k = 0; k < ci.x_.size(); ++k) {
      double w;
      if (k == 0) {
        w = ci.x_[1] - ci.x_[0];
        ci.d_[k] = sanitize_slope(d[k], ci.f_[1] - ci.f_[0], w);
      } else {
        w = ci.x_[k] - ci.x_[k - 1];
        ci.d_[k] = sanitize_slope(d[k], ci.f_[k] - ci.f_[k - 1], w);
      }
    }
    return ci;
  }

  double operator()(double v) const {
    if (v <= x_.front()) return 0.0;
    if (v >= x_.back()) return f_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return detail::hermite(v, x_[i], x_[i + 1], f_[i], f_[i + 1], d_[i],
                           d_[i + 1]);
  }

  double total() const { return f_.back(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return x_.size(); }

 private:
  // Replace a non-finite node slope (integrand singular exactly at a node)
  // with the interval's mean slope; refinement keeps the induced error local.
  static double sanitize_slope(double d, double interval_mass, double width) {
    if (std::isfinite(d)) return d;
    return width > 0 ? interval_mass / width : 0.0;
  }

  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> x_, f_, d_;
};

// Shape-preserving (Fritsch-Carlson) piecewise-cubic interpolant of a
// directly evaluable function, refined against the function itself at
// interval midpoints. Used to memoize expensive smooth functions (e.g.
// parametric tail integrals) on a fixed domain; evaluation clamps to the
// endpoint values outside [lo, hi].
class PchipInterpolant {
 public:
  template <class F>
  static PchipInterpolant build(F&& f, double lo, double hi,
                                std::vector<double> grid = {},
                                double rel_tol = 1e-7, int max_points = 20000) {
    PchipInterpolant p;
    if (!(hi > lo)) {
      p.x_ = {lo, lo};
      p.y_ = {f(lo), f(lo)};
      p.d_ = {0.0, 0.0};
      return p;
    }
    if (grid.empty()) grid = graded_grid(lo, hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() > lo) grid.insert(grid.begin(), lo);
    if (grid.back() < hi) grid.push_back(hi);

    std::vector<double> x(grid), y(grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);

    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-30);

    // Inserting a node perturbs the Fritsch-Carlson slopes at its flanking
    // nodes, which can invalidate the one already-accepted interval to its
    // left; step back one interval after each insertion so every interval
    // ends up validated against the final slopes.
    std::vector<double> d = fc_slopes(x, y);
    std::size_t i = 0;
    while (i + 1 < x.size()) {
      if (static_cast<int>(x.size()) > max_points) {
        throw NonConvergenceError("pchip refinement exceeded max_points", 0.0,
                                  rel_tol * scale);
      }
      const double m = 0.5 * (x[i] + x[i + 1]);
      if (m <= x[i] || m >= x[i + 1]) {
        ++i;
        continue;
      }
      const double fm = f(m);
      const double pm =
          detail::hermite(m, x[i], x[i + 1], y[i], y[i + 1], d[i], d[i + 1]);
      if (std::abs(pm - fm) <= rel_tol * scale) {
        ++i;
        continue;
      }
      x.insert(x.begin() + i + 1, m);
      y.insert(y.begin() + i + 1, fm);
      d = fc_slopes(x, y);  // slopes are local; recompute is cheap vs f()
      if (i > 0) --i;
    }

    p.x_ = std::move(x);
    p.y_ = std::move(y);
    p.d_ = fc_slopes(p.x_, p.y_);
    return p;
  }

  double operator()(double v) const {
    if (v <= x_.front()) return y_.front();
    if (v >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return detail::hermite(v, x_[i], x_[i + 1], y_[i], y_[i + 1], d_[i],
                           d_[i + 1]);
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }

 private:
  // Fritsch-Carlson monotone slope estimates: harmonic weighting of the
  // adjacent secants, zero at local extrema, clipped one-sided formulas at
  // the ends. Guarantees no overshoot between monotone data points.
  static std::vector<double> fc_slopes(const std::vector<double>& x,
                                       const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
      d[0] = d[1] = delta[0];
      return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        const double w1 = 2 * h[i] + h[i - 1];
        const double w2 = h[i] + 2 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
  }

  static double edge_slope(double h0, double h1, double del0, double del1) {
    double d = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (d * del0 <= 0.0) return 0.0;
    if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0)) {
      return 3.0 * del0;
    }
    return d;
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace predq
