#include "predq/distributions.hpp"

#include <cmath>
#include <memory>

#include "predq/quadrature.hpp"
#include "predq/rng.hpp"
#include "helpers.hpp"

using namespace predq;
using testutil::approx_rel;

TEST_CASE("exponential closed forms") {
  ExponentialDist d(2.0);
  REQUIRE(d.mean() == 2.0);
  REQUIRE(d.second_moment() == 8.0);
  REQUIRE(d.cdf(2.0) == approx_rel(1.0 - std::exp(-1.0), 1e-12));
  REQUIRE(d.pdf(0.0) == approx_rel(0.5, 1e-12));
  // Partial moments against direct quadrature.
  for (double x : {0.1, 1.0, 3.7, 10.0}) {
    const double m1 =
        quad_finite([&](double t) { return t * d.pdf(t); }, 0.0, x).value;
    const double m2 =
        quad_finite([&](double t) { return t * t * d.pdf(t); }, 0.0, x).value;
    REQUIRE(d.partial_m1(x) == approx_rel(m1, 1e-9));
    REQUIRE(d.partial_m2(x) == approx_rel(m2, 1e-9));
  }
  REQUIRE(d.partial_m1(1e3) == approx_rel(d.mean(), 1e-12));
  REQUIRE(d.partial_m2(1e3) == approx_rel(d.second_moment(), 1e-12));
  REQUIRE_THROWS_AS(ExponentialDist(0.0), ConfigError);
  REQUIRE_THROWS_AS(ExponentialDist(-1.0), ConfigError);
}

TEST_CASE("heavy-tailed weibull closed forms") {
  WeibullSqrtDist d;
  // Shape 1/2, unit mean: P(X > x) = exp(-sqrt(2x)), E[X^2] = 6.
  REQUIRE(d.mean() == approx_rel(1.0, 1e-12));
  REQUIRE(d.second_moment() == approx_rel(6.0, 1e-12));
  REQUIRE(d.cdf(0.5) == approx_rel(1.0 - std::exp(-1.0), 1e-12));
  REQUIRE(d.cdf(2.0) == approx_rel(1.0 - std::exp(-2.0), 1e-12));
  // Mean from the tail: int_0^inf (1 - F) = 1.
  const double tail_mean =
      quad([&](double x) { return 1.0 - d.cdf(x); }, 0.0,
           std::numeric_limits<double>::infinity())
          .value;
  REQUIRE(tail_mean == approx_rel(1.0, 1e-8));
  for (double x : {0.05, 0.5, 2.0, 10.0, 50.0}) {
    const double m1 =
        quad_finite([&](double t) { return t * d.pdf(t); }, 0.0, x).value;
    const double m2 =
        quad_finite([&](double t) { return t * t * d.pdf(t); }, 0.0, x).value;
    REQUIRE(d.partial_m1(x) == approx_rel(m1, 1e-8));
    REQUIRE(d.partial_m2(x) == approx_rel(m2, 1e-8));
  }
  REQUIRE(d.partial_m1(d.upper_bound()) == approx_rel(1.0, 1e-6));
  REQUIRE(d.partial_m2(d.upper_bound()) == approx_rel(6.0, 1e-5));
  // Sampling by inversion.
  Rng rng(5);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = d.sample(rng);
    sum += x;
    sumsq += x * x;
  }
  REQUIRE(sum / n == approx_rel(1.0, 0.0, 0.012));   // 5 se, sd = sqrt(5)
  REQUIRE(sumsq / n == approx_rel(6.0, 0.0, 0.26));  // 5 se, sd ~ 50
}

TEST_CASE("deterministic service") {
  DeterministicDist d(3.0);
  REQUIRE(d.mean() == 3.0);
  REQUIRE(d.second_moment() == 9.0);
  REQUIRE(d.cdf(2.999) == 0.0);
  REQUIRE(d.cdf(3.0) == 1.0);
  REQUIRE(d.partial_m1(2.0) == 0.0);
  REQUIRE(d.partial_m1(3.0) == 3.0);
  REQUIRE(d.partial_m2(5.0) == 9.0);
  REQUIRE(d.is_discrete());
  REQUIRE(d.atoms().size() == 1);
  REQUIRE_THROWS_AS(d.pdf(3.0), DomainError);
  Rng rng(1);
  REQUIRE(d.sample(rng) == 3.0);
}

TEST_CASE("two point service") {
  TwoPointDist d(1.0, 4.0, 0.75);
  REQUIRE(d.mean() == approx_rel(1.75, 1e-15));
  // E[S^2] = 0.75 * 1^2 + 0.25 * 4^2.
  REQUIRE(d.second_moment() == approx_rel(0.75 + 4.0, 1e-15));
  REQUIRE(d.cdf(0.5) == 0.0);
  REQUIRE(d.cdf(1.0) == 0.75);
  REQUIRE(d.cdf(3.9) == 0.75);
  REQUIRE(d.cdf(4.0) == 1.0);
  REQUIRE(d.partial_m1(1.0) == approx_rel(0.75, 1e-15));
  REQUIRE(d.partial_m1(4.0) == approx_rel(1.75, 1e-15));
  REQUIRE(d.partial_m2(2.0) == approx_rel(0.75, 1e-15));
  REQUIRE(d.atoms().size() == 2);
  REQUIRE_THROWS_AS(TwoPointDist(4.0, 1.0, 0.5), ConfigError);
  REQUIRE_THROWS_AS(TwoPointDist(1.0, 4.0, 1.5), ConfigError);
  Rng rng(9);
  int shorts = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = d.sample(rng);
    REQUIRE((x == 1.0 || x == 4.0));
    shorts += x == 1.0;
  }
  // 5 se on the short fraction: se = sqrt(.75*.25/n) ~ 1e-3.
  REQUIRE(static_cast<double>(shorts) / n == approx_rel(0.75, 0.0, 5e-3));
}
