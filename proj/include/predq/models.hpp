#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "predq/distributions.hpp"
#include "predq/errors.hpp"
#include "predq/interpolant.hpp"
#include "predq/quadrature.hpp"
#include "predq/rng.hpp"

namespace predq {

// A point mass of a discrete joint model: P(X = x, Y = y) = prob.
struct JointAtom {
  double x, y, prob;
};

// Joint law of (true service time X, predicted service time Y).
//
// The queueing formulas consume the model exclusively through marginals,
// conditional work moments and truncated ("excess") moments:
//   f_s, f_p          marginal densities of X and Y
//   c1(y), c2(y)      int x   g(x,y) dx  and  int x^2 g(x,y) dx
//   m1_predicted(y)   int_0^y c1(t) dt   (true work carried by jobs whose
//                     prediction is below y; times lambda this is the load)
//   excess_k(t, a)    int (x-a)^+^k g(x,t) dx
// Built-in models override these with closed forms where available; the
// base class supplies adaptive-quadrature fallbacks plus lazily built,
// memoized cumulative interpolants (models are immutable afterwards and
// safe to share across threads).
class PredictionModel {
 public:
  virtual ~PredictionModel() = default;

  virtual std::string name() const = 0;
  virtual bool is_discrete() const { return false; }
  virtual bool has_joint_density() const { return true; }

  // Joint density g(x, y). Only meaningful when has_joint_density().
  virtual double density(double x, double y) const = 0;

  // Point masses for discrete models (empty otherwise).
  virtual std::vector<JointAtom> joint_atoms() const { return {}; }

  // Draw one (service time, predicted time) pair.
  virtual std::pair<double, double> sample(Rng& rng) const = 0;

  // Truncation hints for improper integrals (defaults: 50 for a unit-mean
  // service axis via the marginal's own bound). Models with heavier tails
  // must widen these so that the discarded mass stays below ~1e-6.
  virtual double x_max() const { return service_marginal()->upper_bound(); }
  virtual double y_max() const = 0;

  // Upper limit actually used for integrals along the predicted axis:
  // +infinity when the model's closed forms remain valid globally (needed
  // when the predicted marginal is too heavy-tailed to truncate).
  virtual double y_integration_upper() const { return y_max(); }

  // ---- service-time axis (delegated to the marginal distribution) ----
  virtual ServiceDistPtr service_marginal() const = 0;
  virtual double service_density(double x) const {
    return service_marginal()->pdf(x);
  }
  virtual double service_cdf(double x) const {
    return service_marginal()->cdf(x);
  }
  double m1_service(double x) const { return service_marginal()->partial_m1(x); }
  double m2_service(double x) const { return service_marginal()->partial_m2(x); }
  double mean_service() const { return service_marginal()->mean(); }
  double second_moment_service() const {
    return service_marginal()->second_moment();
  }

  // ---- predicted-time axis ----
  virtual double predicted_density(double y) const {
    require_continuous("predicted_density");
    if (y < 0) return 0.0;
    auto h = [this, y](double x) { return density(x, y); };
    return quad(h, 0.0, x_max(), inner_settings(), inner_hints(y)).value;
  }

  // c1(y) = int x g(x,y) dx.
  virtual double cond_work1(double y) const {
    require_continuous("cond_work1");
    if (y < 0) return 0.0;
    auto h = [this, y](double x) { return x * density(x, y); };
    return quad(h, 0.0, x_max(), inner_settings(), inner_hints(y)).value;
  }

  // c2(y) = int x^2 g(x,y) dx.
  virtual double cond_work2(double y) const {
    require_continuous("cond_work2");
    if (y < 0) return 0.0;
    auto h = [this, y](double x) { return x * x * density(x, y); };
    return quad(h, 0.0, x_max(), inner_settings(), inner_hints(y)).value;
  }

  // E[X | Y = y] = c1(y) / f_p(y), guarded against a vanishing denominator.
  virtual double conditional_mean_service(double y) const {
    const double fp = predicted_density(y);
    if (!(fp > 1e-300)) {
      throw DomainError("conditional mean undefined: predicted density "
                        "vanishes at y=" +
                        std::to_string(y));
    }
    return cond_work1(y) / fp;
  }
  virtual bool has_conditional_mean() const { return true; }

  // Memoized conditional mean for per-job scheduling keys; falls back to the
  // closed form when a model overrides conditional_mean_service cheaply.
  virtual double conditional_mean_memo(double y) const {
    std::call_once(cm_once_, [this] {
      const double lo = y_max() * 1e-7;
      cm_interp_ = std::make_unique<PchipInterpolant>(PchipInterpolant::build(
          [this](double y) { return conditional_mean_service(y); }, lo,
          y_max(), graded_grid(lo, y_max()), 1e-6));
    });
    return (*cm_interp_)(y);
  }

  // F_p(y) = P(Y <= y).
  virtual double predicted_cdf(double y) const {
    std::call_once(fp_once_, [this] {
      fp_cum_ = std::make_unique<CumulativeInterpolant>(
          CumulativeInterpolant::build(
              [this](double t) { return predicted_density(t); }, 0.0, y_max()));
    });
    return (*fp_cum_)(y);
  }

  // m1_predicted(y) = int_0^y c1(t) dt = E[X 1{Y <= y}].
  virtual double m1_predicted(double y) const {
    std::call_once(m1p_once_, [this] {
      m1p_cum_ = std::make_unique<CumulativeInterpolant>(
          CumulativeInterpolant::build(
              [this](double t) { return cond_work1(t); }, 0.0, y_max()));
    });
    return (*m1p_cum_)(y);
  }

  // m2_predicted(y) = int_0^y c2(t) dt = E[X^2 1{Y <= y}].
  virtual double m2_predicted(double y) const {
    std::call_once(m2p_once_, [this] {
      m2p_cum_ = std::make_unique<CumulativeInterpolant>(
          CumulativeInterpolant::build(
              [this](double t) { return cond_work2(t); }, 0.0, y_max()));
    });
    return (*m2p_cum_)(y);
  }

  // int_0^y t f_p(t) dt and int_0^y t^2 f_p(t) dt: moments of the predicted
  // sizes themselves.
  virtual double m1_predicted_sizes(double y) const {
    std::call_once(m1y_once_, [this] {
      m1y_cum_ = std::make_unique<CumulativeInterpolant>(
          CumulativeInterpolant::build(
              [this](double t) { return t * predicted_density(t); }, 0.0,
              y_max()));
    });
    return (*m1y_cum_)(y);
  }
  virtual double m2_predicted_sizes(double y) const {
    std::call_once(m2y_once_, [this] {
      m2y_cum_ = std::make_unique<CumulativeInterpolant>(
          CumulativeInterpolant::build(
              [this](double t) { return t * t * predicted_density(t); }, 0.0,
              y_max()));
    });
    return (*m2y_cum_)(y);
  }

  // excess_k(t, a) = int ((x-a)^+)^k g(x, t) dx, the truncated work moments
  // of jobs with predicted size t once `a` units are already accounted for.
  virtual double excess0(double t, double a) const {
    require_continuous("excess0");
    const double lo = std::max(a, 0.0);
    auto h = [this, t](double x) { return density(x, t); };
    return quad(h, lo, lo + x_max(), inner_settings(), inner_hints(t)).value;
  }
  virtual double excess1(double t, double a) const {
    require_continuous("excess1");
    const double lo = std::max(a, 0.0);
    auto h = [this, t, a](double x) { return (x - a) * density(x, t); };
    return quad(h, lo, lo + x_max(), inner_settings(), inner_hints(t)).value;
  }
  virtual double excess2(double t, double a) const {
    require_continuous("excess2");
    const double lo = std::max(a, 0.0);
    auto h = [this, t, a](double x) {
      const double e = x - a;
      return e * e * density(x, t);
    };
    return quad(h, lo, lo + x_max(), inner_settings(), inner_hints(t)).value;
  }

  // Verifies that the truncation hints leave no more than `tol` of
  // probability / mean-work mass outside the integration box. Called by the
  // model factories at construction.
  void validate_truncation(double tol = 1e-6) const {
    if (is_discrete()) return;
    const double mean = mean_service();
    const double xm = x_max();
    if (1.0 - service_cdf(xm) > tol) {
      throw ConfigError(name() + ": service mass beyond x_max=" +
                        std::to_string(xm) + " exceeds tolerance");
    }
    if (mean - m1_service(xm) > tol * std::max(1.0, mean)) {
      throw ConfigError(name() + ": service work beyond x_max exceeds "
                        "tolerance");
    }
    if (mean - m1_predicted(y_max()) > tol * std::max(1.0, mean)) {
      throw ConfigError(name() + ": predicted-axis work beyond y_max "
                        "exceeds tolerance");
    }
    if (std::isfinite(y_integration_upper()) &&
        1.0 - predicted_cdf(y_max()) > tol) {
      throw ConfigError(name() + ": predicted mass beyond y_max exceeds "
                        "tolerance");
    }
  }

 protected:
  void require_continuous(const char* op) const {
    if (is_discrete() || !has_joint_density()) {
      throw DomainError(std::string(op) +
                        " requires a model with a joint density (" + name() +
                        " is discrete or degenerate)");
    }
  }

  static QuadratureSettings inner_settings() {
    QuadratureSettings s;
    s.rel_tol = 1e-9;
    s.abs_tol = 1e-13;
    return s;
  }

  // Hints for integrals over x at fixed predicted value y; overridden where
  // the model knows its conditional mode.
  virtual std::vector<double> inner_hints(double) const { return {}; }

 private:
  mutable std::once_flag fp_once_, m1p_once_, m2p_once_, m1y_once_, m2y_once_,
      cm_once_;
  mutable std::unique_ptr<CumulativeInterpolant> fp_cum_, m1p_cum_, m2p_cum_,
      m1y_cum_, m2y_cum_;
  mutable std::unique_ptr<PchipInterpolant> cm_interp_;
};

using ModelPtr = std::shared_ptr<const PredictionModel>;

// ---------------------------------------------------------------------------
// Exact predictions: Y = X. There is no two-dimensional density; every
// predicted-axis functional collapses onto the service marginal. Feeding this
// model to a predicted-information operation must reproduce the corresponding
// full-information result, which is the toolkit's central consistency check.
class ExactModel final : public PredictionModel {
 public:
  explicit ExactModel(ServiceDistPtr base) : base_(std::move(base)) {}

  std::string name() const override { return "exact(" + base_->name() + ")"; }
  bool is_discrete() const override { return base_->is_discrete(); }
  bool has_joint_density() const override { return false; }
  double density(double, double) const override {
    throw DomainError("exact-prediction model concentrates on y = x and has "
                      "no joint density");
  }
  std::vector<JointAtom> joint_atoms() const override {
    std::vector<JointAtom> out;
    for (auto& [v, p] : base_->atoms()) out.push_back({v, v, p});
    return out;
  }
  std::pair<double, double> sample(Rng& rng) const override {
    const double x = base_->sample(rng);
    return {x, x};
  }
  ServiceDistPtr service_marginal() const override { return base_; }
  double y_max() const override { return base_->upper_bound(); }

  double predicted_density(double y) const override { return base_->pdf(y); }
  double predicted_cdf(double y) const override { return base_->cdf(y); }
  double cond_work1(double y) const override { return y * base_->pdf(y); }
  double cond_work2(double y) const override { return y * y * base_->pdf(y); }
  double m1_predicted(double y) const override { return base_->partial_m1(y); }
  double m2_predicted(double y) const override { return base_->partial_m2(y); }
  double m1_predicted_sizes(double y) const override {
    return base_->partial_m1(y);
  }
  double m2_predicted_sizes(double y) const override {
    return base_->partial_m2(y);
  }
  double conditional_mean_service(double y) const override { return y; }
  double conditional_mean_memo(double y) const override { return y; }

  double excess0(double t, double a) const override {
    return t >= a ? base_->pdf(t) : 0.0;
  }
  double excess1(double t, double a) const override {
    return t >= a ? (t - a) * base_->pdf(t) : 0.0;
  }
  double excess2(double t, double a) const override {
    return t >= a ? (t - a) * (t - a) * base_->pdf(t) : 0.0;
  }

 private:
  ServiceDistPtr base_;
};

// ---------------------------------------------------------------------------
// Service times exponential(1); the prediction for a job of size x is itself
// exponential with mean x: g(x,y) = e^{-x - y/x} / x. The predicted-axis
// marginals are modified Bessel functions (int_0^inf x^{n-1} e^{-x-y/x} dx =
// 2 y^{n/2} K_n(2 sqrt(y))), so no inner quadrature is needed:
//   f_p(y) = 2 K_0(2 sqrt(y))   (log-singular at 0)
//   c1(y)  = 2 sqrt(y) K_1(2 sqrt(y))
//   c2(y)  = 2 y K_2(2 sqrt(y))
// The predicted marginal's tail P(Y > 80) ~ 1.7e-8, so the predicted axis
// uses y_max = 80 (50 would leave ~3.5e-6 of mass, violating the 1e-6
// truncation budget and costing the fourth significant figure of high-load
// results).
class ExpMeanXModel final : public PredictionModel {
 public:
  ExpMeanXModel() : base_(std::make_shared<ExponentialDist>(1.0)) {}

  std::string name() const override { return "exp_mean_x"; }
  double density(double x, double y) const override {
    if (x <= 0 || y < 0) return 0.0;
    return std::exp(-x - y / x) / x;
  }
  std::pair<double, double> sample(Rng& rng) const override {
    const double x = rng.exponential(1.0);
    return {x, x * rng.exponential(1.0)};
  }
  ServiceDistPtr service_marginal() const override { return base_; }
  double y_max() const override { return 80.0; }

  double predicted_density(double y) const override {
    if (y < 0) return 0.0;
    if (y == 0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::cyl_bessel_k(0.0, 2.0 * std::sqrt(y));
  }
  double cond_work1(double y) const override {
    if (y < 0) return 0.0;
    if (y == 0) return 1.0;  // int e^{-x} dx
    const double r = std::sqrt(y);
    return 2.0 * r * std::cyl_bessel_k(1.0, 2.0 * r);
  }
  double cond_work2(double y) const override {
    if (y < 0) return 0.0;
    if (y == 0) return 1.0;  // int x e^{-x} dx
    return 2.0 * y * std::cyl_bessel_k(2.0, 2.0 * std::sqrt(y));
  }

  // The predicted-axis cumulatives integrate to closed forms through
  // d/dz [z^n K_n(z)] = -z^n K_{n-1}(z) with z = 2 sqrt(y). Each bracketed
  // combination tends to its constant as z -> 0 and underflows to zero for
  // large z, so the expressions hit the exact totals at both ends.
  double predicted_cdf(double y) const override {
    if (y <= 0) return 0.0;
    if (y < kTinyY) return y * (1.0 - std::log(y));
    const double z = 2.0 * std::sqrt(y);
    return 1.0 - z * std::cyl_bessel_k(1.0, z);
  }
  double m1_predicted(double y) const override {
    if (y <= 0) return 0.0;
    if (y < kTinyY) return y;
    const double z = 2.0 * std::sqrt(y);
    return 1.0 - 0.5 * z * z * std::cyl_bessel_k(2.0, z);
  }
  double m2_predicted(double y) const override {
    if (y <= 0) return 0.0;
    if (y < kTinyY) return y;
    const double z = 2.0 * std::sqrt(y);
    return 2.0 - 0.25 * z * z * z * std::cyl_bessel_k(3.0, z);
  }
  double m1_predicted_sizes(double y) const override {
    if (y <= 0) return 0.0;
    if (y < kTinyY) return 0.0;
    const double z = 2.0 * std::sqrt(y);
    const double z2 = z * z;
    return 1.0 - 0.25 * (z2 * z * std::cyl_bessel_k(1.0, z) +
                         2.0 * z2 * std::cyl_bessel_k(2.0, z));
  }
  double m2_predicted_sizes(double y) const override {
    if (y <= 0) return 0.0;
    if (y < kTinyY) return 0.0;
    const double z = 2.0 * std::sqrt(y);
    const double z2 = z * z;
    const double z3 = z2 * z;
    return 4.0 - (z3 * z2 * std::cyl_bessel_k(1.0, z) +
                  4.0 * z2 * z2 * std::cyl_bessel_k(2.0, z) +
                  8.0 * z3 * std::cyl_bessel_k(3.0, z)) /
                     16.0;
  }

  // With closed-form cumulatives the predicted axis needs no truncation at
  // all; population integrals may run to infinity.
  double y_integration_upper() const override {
    return std::numeric_limits<double>::infinity();
  }

 protected:
  // The conditional factor e^{-y/x} turns on near x ~ sqrt(y); seed the
  // excess-kernel subdivisions around that knee.
  std::vector<double> inner_hints(double y) const override {
    if (y <= 0) return {};
    const double r = std::sqrt(y);
    return {0.125 * r, r, 8.0 * r};
  }

 private:
  // Below this the Bessel factors overflow; the leading-order limits are
  // exact to within O(y^2 log y) there.
  static constexpr double kTinyY = 1e-200;

  ServiceDistPtr base_;
};

// ---------------------------------------------------------------------------
// Reversed predictor: service exponential(1), prediction exponential with
// mean 1/x, i.e. g(x,y) = x e^{-x(1+y)}. Perfectly anti-correlated ordering:
// E[X | Y=y] = 2/(1+y) is decreasing. The predicted marginal 1/(1+y)^2 has
// no finite mean, so predicted-axis integrals run to +infinity on the closed
// forms below rather than truncating.
class ReversedExpModel final : public PredictionModel {
 public:
  ReversedExpModel() : base_(std::make_shared<ExponentialDist>(1.0)) {}

  std::string name() const override { return "reversed_exp"; }
  double density(double x, double y) const override {
    if (x <= 0 || y < 0) return 0.0;
    return x * std::exp(-x * (1.0 + y));
  }
  std::pair<double, double> sample(Rng& rng) const override {
    const double x = rng.exponential(1.0);
    return {x, rng.exponential(1.0) / x};
  }
  ServiceDistPtr service_marginal() const override { return base_; }
  double y_max() const override { return 2000.0; }
  double y_integration_upper() const override {
    return std::numeric_limits<double>::infinity();
  }

  double predicted_density(double y) const override {
    if (y < 0) return 0.0;
    const double b = 1.0 + y;
    return 1.0 / (b * b);
  }
  double predicted_cdf(double y) const override {
    return y <= 0 ? 0.0 : y / (1.0 + y);
  }
  double cond_work1(double y) const override {
    if (y < 0) return 0.0;
    const double b = 1.0 + y;
    return 2.0 / (b * b * b);
  }
  double cond_work2(double y) const override {
    if (y < 0) return 0.0;
    const double b = 1.0 + y;
    return 6.0 / (b * b * b * b);
  }
  double m1_predicted(double y) const override {
    if (y <= 0) return 0.0;
    const double b = 1.0 + y;
    return 1.0 - 1.0 / (b * b);
  }
  double m2_predicted(double y) const override {
    if (y <= 0) return 0.0;
    const double b = 1.0 + y;
    return 2.0 * (1.0 - 1.0 / (b * b * b));
  }
  double m1_predicted_sizes(double y) const override {
    if (y <= 0) return 0.0;
    const double b = 1.0 + y;
    return std::log(b) + 1.0 / b - 1.0;
  }
  double m2_predicted_sizes(double y) const override {
    if (y <= 0) return 0.0;
    const double b = 1.0 + y;
    return y - 2.0 * std::log(b) + y / b;
  }
  double conditional_mean_service(double y) const override {
    return 2.0 / (1.0 + y);
  }
  double conditional_mean_memo(double y) const override {
    return 2.0 / (1.0 + y);
  }

  double excess0(double t, double a) const override {
    const double b = 1.0 + t, aa = std::max(a, 0.0);
    return std::exp(-aa * b) * (aa * b + 1.0) / (b * b);
  }
  double excess1(double t, double a) const override {
    const double b = 1.0 + t, aa = std::max(a, 0.0);
    return std::exp(-aa * b) * (aa * b + 2.0) / (b * b * b);
  }
  double excess2(double t, double a) const override {
    const double b = 1.0 + t, aa = std::max(a, 0.0);
    return std::exp(-aa * b) * (2.0 * aa * b + 6.0) / (b * b * b * b);
  }

 private:
  ServiceDistPtr base_;
};

// ---------------------------------------------------------------------------
// Multiplicative noise: Y | X=x uniform on [(1-alpha)x, (1+alpha)x],
// g(x,y) = f_b(x) / (2 alpha x) on that band. alpha in (0, 1]; alpha = 0 is
// constructed as ExactModel by the factory.
class UniformAlphaModel final : public PredictionModel {
 public:
  UniformAlphaModel(ServiceDistPtr base, double alpha)
      : base_(std::move(base)), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw ConfigError("uniform_alpha requires alpha in (0, 1]");
    }
    if (base_->is_discrete()) {
      throw ConfigError("uniform_alpha requires a continuous base");
    }
  }

  std::string name() const override {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "uniform_alpha(%s, %g)",
                  base_->name().c_str(), alpha_);
    return buf;
  }
  double density(double x, double y) const override {
    if (x <= 0 || y < (1 - alpha_) * x || y > (1 + alpha_) * x) return 0.0;
    return base_->pdf(x) / (2.0 * alpha_ * x);
  }
  std::pair<double, double> sample(Rng& rng) const override {
    const double x = base_->sample(rng);
    return {x, x * (1.0 - alpha_ + 2.0 * alpha_ * rng.uniform01())};
  }
  ServiceDistPtr service_marginal() const override { return base_; }
  double y_max() const override { return (1.0 + alpha_) * base_->upper_bound(); }

  double predicted_density(double y) const override {
    if (y <= 0) return 0.0;
    auto h = [this](double x) { return base_->pdf(x) / (2.0 * alpha_ * x); };
    return quad(h, x_lo(y), x_hi(y), inner_settings()).value;
  }
  // c1(y) integrates x g = f_b / (2 alpha): just a CDF difference.
  double cond_work1(double y) const override {
    if (y <= 0) return 0.0;
    return (base_->cdf(x_hi(y)) - base_->cdf(x_lo(y))) / (2.0 * alpha_);
  }
  double cond_work2(double y) const override {
    if (y <= 0) return 0.0;
    return (base_->partial_m1(x_hi(y)) - base_->partial_m1(x_lo(y))) /
           (2.0 * alpha_);
  }

  double excess0(double t, double a) const override {
    return excess_k(t, a, 0);
  }
  double excess1(double t, double a) const override {
    return excess_k(t, a, 1);
  }
  double excess2(double t, double a) const override {
    return excess_k(t, a, 2);
  }

 private:
  double x_lo(double y) const { return y / (1.0 + alpha_); }
  double x_hi(double y) const {
    return alpha_ < 1.0 ? std::min(y / (1.0 - alpha_), x_max() * 2.0)
                        : x_max() * 2.0;
  }
  double excess_k(double t, double a, int k) const {
    if (t <= 0) return 0.0;
    const double lo = std::max(a, x_lo(t)), hi = x_hi(t);
    if (lo >= hi) return 0.0;
    auto h = [this, a, k](double x) {
      double w = base_->pdf(x) / (2.0 * alpha_ * x);
      for (int i = 0; i < k; ++i) w *= (x - a);
      return w;
    };
    return quad(h, lo, hi, inner_settings()).value;
  }

  ServiceDistPtr base_;
  double alpha_;
};

// ---------------------------------------------------------------------------
// Two job types: short jobs of size s (fraction frac_short), long jobs of
// size l. A short job is mispredicted long with probability p, a long one
// mispredicted short with probability q; the predicted *value* is the size
// of the predicted type. Purely discrete: analytic consumers use the atoms
// or the closed-form operations, never quadrature.
class TwoTypeModel final : public PredictionModel {
 public:
  TwoTypeModel(double s, double l, double frac_short, double p, double q)
      : s_(s), l_(l), fs_(frac_short), p_(p), q_(q),
        base_(std::make_shared<TwoPointDist>(s, l, frac_short)) {
    if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) {
      throw ConfigError("two_type misprediction probabilities must lie in "
                        "[0,1]");
    }
    if (!(frac_short >= 0 && frac_short <= 1)) {
      throw ConfigError("two_type short-job fraction must lie in [0,1]");
    }
  }

  std::string name() const override { return "two_type"; }
  bool is_discrete() const override { return true; }
  bool has_joint_density() const override { return false; }
  double density(double, double) const override {
    throw DomainError("two_type model is discrete and has no density");
  }
  std::vector<JointAtom> joint_atoms() const override {
    return {{s_, s_, fs_ * (1 - p_)},
            {s_, l_, fs_ * p_},
            {l_, s_, (1 - fs_) * q_},
            {l_, l_, (1 - fs_) * (1 - q_)}};
  }
  std::pair<double, double> sample(Rng& rng) const override {
    const bool is_short = rng.uniform01() < fs_;
    const double x = is_short ? s_ : l_;
    const double flip = rng.uniform01();
    const double y = is_short ? (flip < p_ ? l_ : s_) : (flip < q_ ? s_ : l_);
    return {x, y};
  }
  ServiceDistPtr service_marginal() const override { return base_; }
  double y_max() const override { return l_; }

  double predicted_cdf(double y) const override {
    double c = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y <= y) c += a.prob;
    }
    return c;
  }
  double m1_predicted(double y) const override {
    double m = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y <= y) m += a.prob * a.x;
    }
    return m;
  }
  double m2_predicted(double y) const override {
    double m = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y <= y) m += a.prob * a.x * a.x;
    }
    return m;
  }
  double m1_predicted_sizes(double y) const override {
    double m = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y <= y) m += a.prob * a.y;
    }
    return m;
  }
  double m2_predicted_sizes(double y) const override {
    double m = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y <= y) m += a.prob * a.y * a.y;
    }
    return m;
  }
  double conditional_mean_service(double y) const override {
    double mass = 0.0, work = 0.0;
    for (auto& a : joint_atoms()) {
      if (a.y == y) {
        mass += a.prob;
        work += a.prob * a.x;
      }
    }
    if (!(mass > 0)) {
      throw DomainError("two_type conditional mean undefined at y=" +
                        std::to_string(y));
    }
    return work / mass;
  }
  double conditional_mean_memo(double y) const override {
    // Nearest atom wins; only s_ and l_ occur as predictions.
    return conditional_mean_service(std::abs(y - s_) <= std::abs(y - l_) ? s_
                                                                         : l_);
  }

  double short_size() const { return s_; }
  double long_size() const { return l_; }
  double frac_short() const { return fs_; }
  double p() const { return p_; }
  double q() const { return q_; }

 private:
  double s_, l_, fs_, p_, q_;
  ServiceDistPtr base_;
};

// ---------------------------------------------------------------------------
// Factories. Each validates truncation mass at construction. The two
// parameterless continuous models are memoized: they are immutable and their
// lazily built interpolants are expensive enough to be worth sharing.

inline ModelPtr exact_model(ServiceDistPtr base) {
  auto m = std::make_shared<ExactModel>(std::move(base));
  m->validate_truncation();
  return m;
}

inline ModelPtr exp_mean_x_model() {
  static const ModelPtr cached = [] {
    auto m = std::make_shared<ExpMeanXModel>();
    m->validate_truncation();
    return ModelPtr(m);
  }();
  return cached;
}

inline ModelPtr reversed_exp_model() {
  static const ModelPtr cached = [] {
    auto m = std::make_shared<ReversedExpModel>();
    m->validate_truncation();
    return ModelPtr(m);
  }();
  return cached;
}

inline ModelPtr uniform_alpha_model(ServiceDistPtr base, double alpha) {
  if (alpha == 0.0) return exact_model(std::move(base));
  auto m = std::make_shared<UniformAlphaModel>(std::move(base), alpha);
  m->validate_truncation();
  return m;
}

inline ModelPtr two_type_model(double s, double l, double frac_short, double p,
                               double q) {
  return std::make_shared<TwoTypeModel>(s, l, frac_short, p, q);
}

}  // namespace predq
