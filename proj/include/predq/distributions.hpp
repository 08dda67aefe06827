#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "predq/errors.hpp"
#include "predq/rng.hpp"

namespace predq {

// A service-time distribution with the handful of functionals the queueing
// formulas need. partial_m1/partial_m2 are the truncated moments
// int_0^x t f(t) dt and int_0^x t^2 f(t) dt, which drive every load and
// waiting-time expression; built-ins supply closed forms.
class ServiceDist {
 public:
  virtual ~ServiceDist() = default;
  virtual std::string name() const = 0;
  virtual double pdf(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual double mean() const = 0;
  virtual double second_moment() const = 0;
  virtual double partial_m1(double x) const = 0;
  virtual double partial_m2(double x) const = 0;
  virtual double sample(Rng& rng) const = 0;
  // Truncation bound for improper integrals: the mean mass beyond it is
  // negligible (<= ~1e-7 of the mean).
  virtual double upper_bound() const = 0;
  virtual bool is_discrete() const { return false; }
  // Point masses as (value, probability) pairs for discrete distributions.
  virtual std::vector<std::pair<double, double>> atoms() const { return {}; }
};

using ServiceDistPtr = std::shared_ptr<const ServiceDist>;

class ExponentialDist final : public ServiceDist {
 public:
  explicit ExponentialDist(double mean = 1.0) : mu_(mean) {
    if (!(mean > 0.0)) throw ConfigError("exponential mean must be positive");
  }
  std::string name() const override { return "exp"; }
  double pdf(double x) const override {
    return x < 0 ? 0.0 : std::exp(-x / mu_) / mu_;
  }
  double cdf(double x) const override {
    return x <= 0 ? 0.0 : 1.0 - std::exp(-x / mu_);
  }
  double mean() const override { return mu_; }
  double second_moment() const override { return 2.0 * mu_ * mu_; }
  double partial_m1(double x) const override {
    if (x <= 0) return 0.0;
    const double e = std::exp(-x / mu_);
    return mu_ * (1.0 - e) - x * e;
  }
  double partial_m2(double x) const override {
    if (x <= 0) return 0.0;
    const double e = std::exp(-x / mu_);
    return 2 * mu_ * mu_ - e * (x * x + 2 * mu_ * x + 2 * mu_ * mu_);
  }
  double sample(Rng& rng) const override { return rng.exponential(mu_); }
  double upper_bound() const override { return 50.0 * mu_; }

 private:
  double mu_;
};

// Heavy-tailed Weibull with shape 1/2: CDF 1 - exp(-sqrt(2x)), mean 1,
// E[X^2] = 6. Its density diverges like x^{-1/2} at the origin, and the tail
// needs a truncation bound far beyond the default 50 to keep the discarded
// mean mass below 1e-6 (at 400, roughly 8e-8 remains).
class WeibullSqrtDist final : public ServiceDist {
 public:
  std::string name() const override { return "weibull"; }
  double pdf(double x) const override {
    if (x <= 0) return 0.0;
    const double v = std::sqrt(2.0 * x);
    return std::exp(-v) / v;
  }
  double cdf(double x) const override {
    return x <= 0 ? 0.0 : 1.0 - std::exp(-std::sqrt(2.0 * x));
  }
  double mean() const override { return 1.0; }
  double second_moment() const override { return 6.0; }
  double partial_m1(double x) const override {
    if (x <= 0) return 0.0;
    const double v = std::sqrt(2.0 * x);
    return 0.5 * (2.0 - (v * v + 2 * v + 2) * std::exp(-v));
  }
  double partial_m2(double x) const override {
    if (x <= 0) return 0.0;
    const double v = std::sqrt(2.0 * x);
    const double poly = ((v + 4) * v + 12) * v * v + 24 * v + 24;
    return 0.25 * (24.0 - poly * std::exp(-v));
  }
  double sample(Rng& rng) const override {
    const double u = rng.uniform01();
    const double t = -std::log(1.0 - u);
    return 0.5 * t * t;
  }
  double upper_bound() const override { return 400.0; }
};

class DeterministicDist final : public ServiceDist {
 public:
  explicit DeterministicDist(double v) : v_(v) {
    if (!(v > 0.0)) throw ConfigError("deterministic value must be positive");
  }
  std::string name() const override { return "deterministic"; }
  double pdf(double) const override {
    throw DomainError("deterministic distribution has no density");
  }
  double cdf(double x) const override { return x >= v_ ? 1.0 : 0.0; }
  double mean() const override { return v_; }
  double second_moment() const override { return v_ * v_; }
  double partial_m1(double x) const override { return x >= v_ ? v_ : 0.0; }
  double partial_m2(double x) const override { return x >= v_ ? v_ * v_ : 0.0; }
  double sample(Rng&) const override { return v_; }
  double upper_bound() const override { return v_; }
  bool is_discrete() const override { return true; }
  std::vector<std::pair<double, double>> atoms() const override {
    return {{v_, 1.0}};
  }

 private:
  double v_;
};

class TwoPointDist final : public ServiceDist {
 public:
  TwoPointDist(double a, double b, double pa) : a_(a), b_(b), pa_(pa) {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw ConfigError("two-point values must be positive");
    }
    if (!(pa >= 0.0 && pa <= 1.0)) {
      throw ConfigError("two-point probability must lie in [0,1]");
    }
    if (a >= b) throw ConfigError("two-point values must satisfy a < b");
  }
  std::string name() const override { return "two_point"; }
  double pdf(double) const override {
    throw DomainError("two-point distribution has no density");
  }
  double cdf(double x) const override {
    if (x < a_) return 0.0;
    if (x < b_) return pa_;
    return 1.0;
  }
  double mean() const override { return pa_ * a_ + (1 - pa_) * b_; }
  double second_moment() const override {
    return pa_ * a_ * a_ + (1 - pa_) * b_ * b_;
  }
  double partial_m1(double x) const override {
    double m = 0.0;
    if (x >= a_) m += pa_ * a_;
    if (x >= b_) m += (1 - pa_) * b_;
    return m;
  }
  double partial_m2(double x) const override {
    double m = 0.0;
    if (x >= a_) m += pa_ * a_ * a_;
    if (x >= b_) m += (1 - pa_) * b_ * b_;
    return m;
  }
  double sample(Rng& rng) const override {
    return rng.uniform01() < pa_ ? a_ : b_;
  }
  double upper_bound() const override { return b_; }
  bool is_discrete() const override { return true; }
  std::vector<std::pair<double, double>> atoms() const override {
    return {{a_, pa_}, {b_, 1 - pa_}};
  }

 private:
  double a_, b_, pa_;
};

}  // namespace predq
