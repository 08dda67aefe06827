// Multi-class non-preemptive priority queue: hand-traced waiting times, the
// work-conservation invariant, label-confusion behavior, and agreement with
// the event-driven simulator.
#include <cmath>
#include <memory>
#include <vector>

#include "helpers.hpp"
#include "predq/predq.hpp"

using namespace predq;
using testutil::approx_rel;

namespace {

ClassModel two_class_deterministic() {
  ClassModel cm;
  cm.lambdas = {0.3, 0.2};
  cm.services = {std::make_shared<DeterministicDist>(1.0),
                 std::make_shared<DeterministicDist>(2.0)};
  cm.confusion = {{0.9, 0.1}, {0.2, 0.8}};
  return cm;
}

}  // namespace

TEST_CASE("priority queue: single class reduces to the classic pooled queue") {
  ClassModel cm;
  cm.lambdas = {0.5};
  cm.services = {std::make_shared<ExponentialDist>(1.0)};
  cm.confusion = {{1.0}};
  // lambda E[S^2] / (2 (1 - rho)) with E[S^2] = 2: 0.5 * 2 / (2 * 0.5) = 1.
  CHECK(priority_wait(cm, 0, false) == approx_rel(1.0, 1e-12));
  CHECK(priority_wait(cm, 0, true) == approx_rel(1.0, 1e-12));
  CHECK(priority_pom(cm) == approx_rel(1.0, 1e-12));
}

TEST_CASE("priority queue: hand-derived two-class waits") {
  ClassModel cm = two_class_deterministic();
  // Residual work W0 = (0.3 * 1 + 0.2 * 4) / 2 = 0.55; loads 0.3 and 0.4.
  CHECK(cm.residual_work() == approx_rel(0.55, 1e-13));
  CHECK(cm.total_rho() == approx_rel(0.7, 1e-13));

  // Truth-ordered: W(0) = 0.55 / 0.7, W(1) = 0.55 / (0.7 * 0.3).
  CHECK(priority_wait(cm, 0, false) == approx_rel(0.55 / 0.7, 1e-13));
  CHECK(priority_wait(cm, 1, false) == approx_rel(0.55 / 0.21, 1e-13));

  // Labeled work: rho'(0) = 0.3*1*0.9 + 0.2*2*0.2 = 0.35 and rho'(1) = 0.35,
  // so W(0) = 0.55 / 0.65 and W(1) = 0.55 / (0.65 * 0.3).
  CHECK(cm.predicted_rho(0) == approx_rel(0.35, 1e-13));
  CHECK(cm.predicted_rho(1) == approx_rel(0.35, 1e-13));
  CHECK(priority_wait(cm, 0, true) == approx_rel(0.55 / 0.65, 1e-13));
  CHECK(priority_wait(cm, 1, true) == approx_rel(0.55 / 0.195, 1e-13));

  // Label arrival rates: 0.3*0.9 + 0.2*0.2 = 0.31 and the remainder 0.19.
  CHECK(cm.predicted_lambda(0) == approx_rel(0.31, 1e-13));
  CHECK(cm.predicted_lambda(1) == approx_rel(0.19, 1e-13));

  const double informed =
      (0.3 * (0.55 / 0.7) + 0.2 * (0.55 / 0.21)) / 0.5;
  const double labeled =
      (0.31 * (0.55 / 0.65) + 0.19 * (0.55 / 0.195)) / 0.5;
  CHECK(priority_mean_wait(cm, false) == approx_rel(informed, 1e-13));
  CHECK(priority_mean_wait(cm, true) == approx_rel(labeled, 1e-13));
  CHECK(priority_pom(cm) == approx_rel(labeled / informed, 1e-13));
  CHECK(priority_pom(cm) > 1.0);
}

TEST_CASE("priority queue: work conservation holds for truth and labels") {
  // For any non-preemptive work-conserving priority order,
  //   sum_i rho_i W_i = rho W0 / (1 - rho),
  // where the classes are whatever the scheduler keys on.
  ClassModel cm;
  cm.lambdas = {0.25, 0.15, 0.1};
  cm.services = {std::make_shared<ExponentialDist>(0.8),
                 std::make_shared<DeterministicDist>(1.5),
                 std::make_shared<WeibullSqrtDist>()};
  cm.confusion = {{0.7, 0.2, 0.1}, {0.15, 0.6, 0.25}, {0.05, 0.35, 0.6}};
  const double rho = cm.total_rho();
  const double target = rho * cm.residual_work() / (1.0 - rho);

  double truth = 0.0, labels = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    truth += cm.lambdas[i] * cm.services[i]->mean() * priority_wait(cm, i, false);
    labels += cm.predicted_rho(i) * priority_wait(cm, i, true);
  }
  CHECK(truth == approx_rel(target, 1e-12));
  CHECK(labels == approx_rel(target, 1e-12));

  // Waits rise with (true-ordered) priority index.
  CHECK(priority_wait(cm, 0, false) < priority_wait(cm, 1, false));
  CHECK(priority_wait(cm, 1, false) < priority_wait(cm, 2, false));
}

TEST_CASE("priority queue: identity and swapped confusions") {
  ClassModel cm = two_class_deterministic();
  cm.confusion = {{1.0, 0.0}, {0.0, 1.0}};
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(priority_wait(cm, i, true) ==
          approx_rel(priority_wait(cm, i, false), 1e-13));
  }
  CHECK(priority_pom(cm) == approx_rel(1.0, 1e-13));

  // Swapping every label hands priority to the true class 1: rho'(0) = 0.4.
  cm.confusion = {{0.0, 1.0}, {1.0, 0.0}};
  CHECK(priority_wait(cm, 0, true) == approx_rel(0.55 / 0.6, 1e-13));
  CHECK(priority_wait(cm, 1, true) == approx_rel(0.55 / 0.18, 1e-13));
}

TEST_CASE("priority queue: invalid models are rejected") {
  ClassModel cm = two_class_deterministic();

  ClassModel bad = cm;
  bad.confusion = {{0.9, 0.2}, {0.2, 0.8}};  // row sums 1.1
  CHECK_THROWS_AS(priority_wait(bad, 0, false), ConfigError);

  bad = cm;
  bad.confusion = {{1.0}, {0.2, 0.8}};  // not square
  CHECK_THROWS_AS(priority_wait(bad, 0, false), ConfigError);

  bad = cm;
  bad.lambdas = {-0.1, 0.2};
  CHECK_THROWS_AS(priority_wait(bad, 0, false), ConfigError);

  bad = cm;
  bad.lambdas = {0.5, 0.4};  // load 0.5 + 0.8 >= 1
  CHECK_THROWS_AS(priority_wait(bad, 0, false), UnstableError);

  CHECK_THROWS_AS(priority_wait(cm, 2, false), ConfigError);

  ClassModel empty;
  CHECK_THROWS_AS(priority_mean_wait(empty, false), ConfigError);
}

TEST_CASE("priority queue: simulation agrees with the formulas",
          "[slow]") {
  ClassModel cm = two_class_deterministic();

  for (bool predicted : {false, true}) {
    SimConfig cfg;
    cfg.class_model = cm;
    cfg.discipline =
        predicted ? Discipline::PRED_PRIORITY : Discipline::PRIORITY;
    cfg.horizon = 1e5;
    cfg.warmup = 1e4;

    double w0 = 0.0, w1 = 0.0, wall = 0.0;
    long n0 = 0, n1 = 0;
    const int trials = 8;
    for (int t = 0; t < trials; ++t) {
      cfg.seed = 9000 + static_cast<std::uint64_t>(t);
      TrialResult r = run_trial(cfg);
      REQUIRE(r.class_mean_wait.size() == 2);
      w0 += r.class_mean_wait[0] * static_cast<double>(r.class_completed[0]);
      w1 += r.class_mean_wait[1] * static_cast<double>(r.class_completed[1]);
      wall += r.mean_wait * static_cast<double>(r.completed);
      n0 += r.class_completed[0];
      n1 += r.class_completed[1];
    }
    w0 /= static_cast<double>(n0);
    w1 /= static_cast<double>(n1);
    wall /= static_cast<double>(n0 + n1);

    CAPTURE(predicted);
    CHECK(w0 == approx_rel(priority_wait(cm, 0, predicted), 0.03));
    CHECK(w1 == approx_rel(priority_wait(cm, 1, predicted), 0.03));
    CHECK(wall == approx_rel(priority_mean_wait(cm, predicted), 0.03));

    // Label shares drift toward the confusion-mixed rates.
    const double share0 = static_cast<double>(n0) /
                          static_cast<double>(n0 + n1);
    const double expect0 =
        (predicted ? cm.predicted_lambda(0) : cm.lambdas[0]) /
        cm.total_lambda();
    CHECK(share0 == approx_rel(expect0, 0.02));
  }
}
