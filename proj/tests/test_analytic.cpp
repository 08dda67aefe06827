// Stationary-policy evaluators: closed forms, independent Simpson oracles,
// frozen reference values, exact-prediction degeneracies, and the finite
// batch quantities.
#include <cmath>
#include <memory>

#include "helpers.hpp"
#include "predq/predq.hpp"

using namespace predq;
using testutil::approx_rel;
using testutil::simpson;

namespace {

// Unit-mean exponential service with exact predictions: the simplest model
// whose service marginal matches the noisy-prediction models used below.
ModelPtr exp_exact() {
  return exact_model(std::make_shared<ExponentialDist>(1.0));
}

// Frozen to four decimals; independently recomputable from the closed
// forms in this file's Simpson oracles.
Catch::Approx four_decimals(double v) {
  return Catch::Approx(v).epsilon(1e-12).margin(6e-5);
}

}  // namespace

TEST_CASE("analytic: first-come-first-served matches the classic formula") {
  auto m = exp_exact();
  // Unit-mean exponential service: E[T] = 1 / (1 - lambda).
  for (double lam : {0.1, 0.5, 0.9}) {
    AnalyticResult r = fifo_time(m, lam);
    CHECK(r.expected_wait == approx_rel(lam / (1.0 - lam), 1e-12));
    CHECK(r.expected_residence == approx_rel(1.0, 1e-12));
    CHECK(r.expected_total == approx_rel(1.0 / (1.0 - lam), 1e-12));
  }
  // Also valid for discrete marginals.
  auto tt = two_type_model(1.0, 3.0, 0.8, 0.1, 0.1);
  const double es = 0.8 * 1.0 + 0.2 * 3.0;
  const double es2 = 0.8 * 1.0 + 0.2 * 9.0;
  const double lam = 0.5;
  CHECK(fifo_time(tt, lam).expected_wait ==
        approx_rel(lam * es2 / (2.0 * (1.0 - lam * es)), 1e-12));
}

TEST_CASE("analytic: shortest-first waits follow their closed forms "
          "pointwise") {
  auto m = exp_exact();
  const double lam = 0.6;
  for (double x : {0.2, 0.7, 1.5, 4.0}) {
    // rho_x = lambda (1 - e^{-x}(1+x)) for the unit exponential.
    const double rho_x = lam * (1.0 - std::exp(-x) * (1.0 + x));
    CHECK(sjf_wait(m, lam, x) ==
          approx_rel(lam * 2.0 / (2.0 * (1.0 - rho_x) * (1.0 - rho_x)),
                     1e-10));
    // m2 below x: 2 - e^{-x}(x^2 + 2x + 2).
    const double m2x = 2.0 - std::exp(-x) * (x * x + 2.0 * x + 2.0);
    CHECK(pspjf_wait(m, lam, x, PspjfWaitMoment::true_sizes) ==
          approx_rel(0.5 * lam * m2x / ((1.0 - rho_x) * (1.0 - rho_x)),
                     1e-10));
  }
}

TEST_CASE("analytic: integrated policies agree with a Simpson oracle on the "
          "exponential queue") {
  auto m = exp_exact();
  const double lam = 0.8;

  auto rho_x = [&](double x) {
    return lam * (1.0 - std::exp(-x) * (1.0 + x));
  };

  // Non-preemptive shortest-first.
  const double sjf_oracle = simpson(
      [&](double x) {
        const double d = 1.0 - rho_x(x);
        return std::exp(-x) * lam / (d * d);
      },
      0.0, 60.0, 200000);
  CHECK(sjf_time(m, lam).expected_wait == approx_rel(sjf_oracle, 1e-7));

  // Preemptive shortest-first: wait to first service plus residence.
  const double psjf_wait_oracle = simpson(
      [&](double x) {
        const double d = 1.0 - rho_x(x);
        const double m2x = 2.0 - std::exp(-x) * (x * x + 2.0 * x + 2.0);
        return std::exp(-x) * 0.5 * lam * m2x / (d * d);
      },
      0.0, 60.0, 200000);
  const double psjf_res_oracle = simpson(
      [&](double x) { return std::exp(-x) * x / (1.0 - rho_x(x)); }, 0.0,
      60.0, 200000);
  AnalyticResult p = psjf_time(m, lam);
  CHECK(p.expected_wait == approx_rel(psjf_wait_oracle, 1e-7));
  CHECK(p.expected_residence == approx_rel(psjf_res_oracle, 1e-7));
  CHECK(p.expected_total ==
        approx_rel(psjf_wait_oracle + psjf_res_oracle, 1e-7));
}

TEST_CASE("analytic: noisy-prediction policy agrees with a substituted "
          "Simpson oracle") {
  // Exponential sizes with exponentially dispersed predictions. The
  // predicted marginal is 2 K0(2 sqrt(y)); substituting y = u^2 removes the
  // logarithmic endpoint singularity so a fixed-grid rule converges.
  auto m = exp_mean_x_model();
  const double lam = 0.7;
  const double oracle = simpson(
      [&](double u) {
        if (u == 0.0) return 0.0;  // u * K0(u^2) -> 0 from the right
        const double y = u * u;
        const double d = 1.0 - lam * m->m1_predicted(y);
        return 2.0 * u * m->predicted_density(y) * lam / (d * d);
      },
      0.0, 16.0, 200000);
  CHECK(spjf_time(m, lam).expected_wait == approx_rel(oracle, 1e-6));
}

TEST_CASE("analytic: frozen reference waits for the exponential queue with "
          "dispersed predictions") {
  // Mean response times, frozen to four decimals when first computed; the
  // Simpson oracles above pin the same pipeline at other arrival rates.
  auto m = exp_mean_x_model();
  CHECK(sjf_time(m, 0.5).expected_total == four_decimals(1.7127));
  CHECK(sjf_time(m, 0.9).expected_total == four_decimals(4.1969));
  CHECK(spjf_time(m, 0.5).expected_total == four_decimals(1.7948));
  CHECK(spjf_time(m, 0.9).expected_total == four_decimals(5.3610));
}

TEST_CASE("analytic: exact predictions collapse predicted policies onto "
          "their informed versions") {
  auto m = exp_exact();
  const double lam = 0.75;
  for (double v : {0.1, 0.8, 2.0, 5.0}) {
    CHECK(spjf_wait(m, lam, v) == approx_rel(sjf_wait(m, lam, v), 1e-12));
    CHECK(pspjf_wait(m, lam, v, PspjfWaitMoment::true_sizes) ==
          approx_rel(pspjf_wait(m, lam, v, PspjfWaitMoment::predicted_sizes),
                     1e-12));
  }
  CHECK(spjf_time(m, lam).expected_total ==
        approx_rel(sjf_time(m, lam).expected_total, 1e-6));
  AnalyticResult pp = pspjf_time(m, lam);
  AnalyticResult pj = psjf_time(m, lam);
  CHECK(pp.expected_wait == approx_rel(pj.expected_wait, 1e-6));
  CHECK(pp.expected_residence == approx_rel(pj.expected_residence, 1e-6));
  CHECK(spjf_pom(m, lam) == approx_rel(1.0, 1e-6));
}

TEST_CASE("analytic: prediction noise always costs under shortest-first") {
  auto noisy = exp_mean_x_model();
  const double pom = spjf_pom(noisy, 0.9);
  CHECK(pom > 1.0);
  // Consistency with the two evaluators it is defined from.
  CHECK(pom == approx_rel(spjf_time(noisy, 0.9).expected_wait /
                              sjf_time(noisy, 0.9).expected_wait,
                          1e-12));
}

TEST_CASE("analytic: closed-batch averages and their misprediction ratio") {
  QuadratureSettings qs;

  // Unit exponential, full information, n = 2:
  //   E[X2; X2 < X1] = int x e^{-x} e^{-x} dx = 1/4.
  auto exact = exp_exact();
  CHECK(finite_n_wait_full(exact, 2, qs) == approx_rel(0.25, 1e-6));
  // Linear in n - 1.
  CHECK(finite_n_wait_full(exact, 11, qs) ==
        approx_rel(10.0 * finite_n_wait_full(exact, 2, qs), 1e-9));
  CHECK(finite_n_wait_full(exact, 1, qs) == 0.0);

  // Dispersed predictions keep the same service marginal but reorder pairs:
  // the predicted-information pair term rises to 1/3.
  auto noisy = exp_mean_x_model();
  CHECK(finite_n_wait_full(noisy, 2, qs) == approx_rel(0.25, 1e-4));
  CHECK(finite_n_wait_predicted(noisy, 2, qs) ==
        approx_rel(1.0 / 3.0, 1e-4));
  CHECK(price_of_misprediction(finite_n_wait_full(noisy, 2, qs),
                               finite_n_wait_predicted(noisy, 2, qs)) ==
        approx_rel(4.0 / 3.0, 1e-3));

  // Inverted predictions (large jobs predicted small): pair term 2/3.
  auto rev = reversed_exp_model();
  CHECK(finite_n_wait_predicted(rev, 2, qs) == approx_rel(2.0 / 3.0, 1e-4));

  // Exact predictions leave the batch wait unchanged.
  CHECK(finite_n_wait_predicted(exact, 2, qs) == approx_rel(0.25, 1e-6));

  // Discrete path: two sizes 1 and 3, 80% short, error-free labels. Pair
  // term: E[X2; X2 < X1] + E[X2; tie]/2
  //     = 1*0.8*0.2 + (1*0.8*0.8 + 3*0.2*0.2)/2 = 0.16 + 0.38 = 0.54,
  // which is also E[min(X1, X2)]/2 = (1*0.96 + 3*0.04)/2.
  auto tt = two_type_model(1.0, 3.0, 0.8, 0.0, 0.0);
  CHECK(finite_n_wait_full(tt, 2, qs) == approx_rel(0.54, 1e-12));
  CHECK(finite_n_wait_predicted(tt, 2, qs) == approx_rel(0.54, 1e-12));
}

TEST_CASE("analytic: invalid inputs are rejected with the right category") {
  auto m = exp_exact();
  CHECK_THROWS_AS(fifo_time(m, 1.0), UnstableError);
  CHECK_THROWS_AS(sjf_time(m, 1.2), UnstableError);
  CHECK_THROWS_AS(spjf_time(m, 1.2), UnstableError);
  CHECK_THROWS_AS(psjf_time(m, 55.0), UnstableError);
  CHECK_THROWS_AS(pspjf_time(m, 1.0), UnstableError);
  CHECK_THROWS_AS(fifo_time(m, -0.5), ConfigError);
  CHECK_THROWS_AS(sjf_wait(m, std::nan(""), 1.0), ConfigError);
  CHECK_THROWS_AS(finite_n_wait_full(m, 0), ConfigError);
  CHECK_THROWS_AS(price_of_misprediction(0.0, 1.0), DomainError);

  // Continuous-only policies refuse discrete marginals.
  auto tt = two_type_model(1.0, 3.0, 0.8, 0.1, 0.1);
  CHECK_THROWS_AS(sjf_time(tt, 0.3), DomainError);
  CHECK_THROWS_AS(spjf_time(tt, 0.3), DomainError);
  CHECK_THROWS_AS(psjf_time(tt, 0.3), DomainError);
  CHECK_THROWS_AS(pspjf_time(tt, 0.3), DomainError);
}
