// Event-driven queue: hand-traced schedules, conservation identities,
// determinism, exact-prediction degeneracies, and the closed-batch sampler.
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "helpers.hpp"
#include "predq/predq.hpp"

using namespace predq;
using testutil::approx_rel;

namespace {

ModelPtr exp_exact() {
  return exact_model(std::make_shared<ExponentialDist>(1.0));
}

const std::vector<ScriptedJob>& four_jobs() {
  static const std::vector<ScriptedJob> jobs = {
      {0.0, 5.0, 5.0}, {1.0, 2.0, 2.0}, {2.0, 4.0, 4.0}, {3.5, 0.5, 0.5}};
  return jobs;
}

SimConfig scripted_cfg(Discipline d) {
  SimConfig cfg;
  cfg.model = exp_exact();  // unused by scripted arrivals beyond validation
  cfg.discipline = d;
  cfg.horizon = 20.0;
  cfg.collect_events = true;
  return cfg;
}

void expect_events(const std::vector<SimEvent>& got,
                   const std::vector<SimEvent>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CAPTURE(i, got[i].time, got[i].kind, got[i].job);
    CHECK(got[i].time == approx_rel(want[i].time, 1e-12, 1e-12));
    CHECK(got[i].kind == want[i].kind);
    CHECK(got[i].job == want[i].job);
  }
}

}  // namespace

TEST_CASE("simulator: hand-traced preemptive remaining-time schedule") {
  TrialResult r = run_scripted(scripted_cfg(Discipline::SRPT), four_jobs());

  // t=0: job 0 (size 5) starts. t=1: job 1 (2 < 4 left) preempts. t=3:
  // job 1 done; jobs 0 and 2 tie at 4 remaining, earlier arrival resumes.
  // t=3.5: job 3 (0.5) preempts again; done at 4. Job 0 finishes at 7.5,
  // then job 2 at 11.5.
  expect_events(r.events,
                {{0.0, 'A', 0},
                 {0.0, 'S', 0},
                 {1.0, 'A', 1},
                 {1.0, 'P', 0},
                 {1.0, 'S', 1},
                 {2.0, 'A', 2},
                 {3.0, 'C', 1},
                 {3.0, 'S', 0},
                 {3.5, 'A', 3},
                 {3.5, 'P', 0},
                 {3.5, 'S', 3},
                 {4.0, 'C', 3},
                 {4.0, 'S', 0},
                 {7.5, 'C', 0},
                 {7.5, 'S', 2},
                 {11.5, 'C', 2}});

  CHECK(r.completed == 4);
  CHECK(r.preemptions == 2);
  // Waits to first service: 0, 0, 5.5, 0; responses: 7.5, 2, 9.5, 0.5.
  CHECK(r.mean_wait == approx_rel(5.5 / 4.0, 1e-12));
  CHECK(r.mean_total == approx_rel(20.0 / 4.0 - 0.125, 1e-12));
  CHECK(r.busy_time == approx_rel(11.5, 1e-12));
  CHECK(r.dispensed_work == approx_rel(11.5, 1e-12));
  CHECK(r.arrived_work == approx_rel(11.5, 1e-12));
  CHECK(r.residual_work_at_end == 0.0);
  CHECK(r.in_system_at_end == 0);
  // Time-averaged population over [0, 20]: piecewise-constant integral
  // 1+2+3+1+1.5+7+4 = 19.5.
  CHECK(r.time_avg_in_system == approx_rel(19.5 / 20.0, 1e-12));
}

TEST_CASE("simulator: hand-traced first-come-first-served schedule") {
  TrialResult r = run_scripted(scripted_cfg(Discipline::FIFO), four_jobs());
  expect_events(r.events,
                {{0.0, 'A', 0},
                 {0.0, 'S', 0},
                 {1.0, 'A', 1},
                 {2.0, 'A', 2},
                 {3.5, 'A', 3},
                 {5.0, 'C', 0},
                 {5.0, 'S', 1},
                 {7.0, 'C', 1},
                 {7.0, 'S', 2},
                 {11.0, 'C', 2},
                 {11.0, 'S', 3},
                 {11.5, 'C', 3}});
  CHECK(r.preemptions == 0);
  CHECK(r.mean_wait == approx_rel((0.0 + 4.0 + 5.0 + 7.5) / 4.0, 1e-12));
  CHECK(r.mean_total == approx_rel((5.0 + 6.0 + 9.0 + 8.0) / 4.0, 1e-12));
}

TEST_CASE("simulator: exhausted predictions pin the running job") {
  // Job 0 is under-predicted (true 3, predicted 1): once its attained
  // service passes the prediction its key is clamped at zero, so job 1's
  // smaller prediction cannot preempt it.
  const std::vector<ScriptedJob> jobs = {{0.0, 3.0, 1.0}, {1.5, 1.0, 0.5}};
  TrialResult pred = run_scripted(scripted_cfg(Discipline::SPRPT), jobs);
  CHECK(pred.preemptions == 0);
  expect_events(pred.events, {{0.0, 'A', 0},
                              {0.0, 'S', 0},
                              {1.5, 'A', 1},
                              {3.0, 'C', 0},
                              {3.0, 'S', 1},
                              {4.0, 'C', 1}});

  // Scheduling on true remaining time does preempt (1 < 1.5 left).
  TrialResult full = run_scripted(scripted_cfg(Discipline::SRPT), jobs);
  CHECK(full.preemptions == 1);
  CHECK(full.mean_wait == 0.0);
  CHECK(full.mean_total == approx_rel((4.0 + 1.0) / 2.0, 1e-12));
}

TEST_CASE("simulator: fixed seeds reproduce, fresh seeds differ") {
  SimConfig cfg;
  cfg.model = exp_mean_x_model();
  cfg.discipline = Discipline::SPRPT;
  cfg.lambda = 0.7;
  cfg.horizon = 5e3;
  cfg.collect_events = true;
  cfg.seed = 7;
  TrialResult a = run_trial(cfg);
  TrialResult b = run_trial(cfg);
  CHECK(a.completed == b.completed);
  CHECK(a.mean_wait == b.mean_wait);  // bitwise: same stream, same arithmetic
  CHECK(a.mean_total == b.mean_total);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    REQUIRE(a.events[i].time == b.events[i].time);
    REQUIRE(a.events[i].kind == b.events[i].kind);
    REQUIRE(a.events[i].job == b.events[i].job);
  }
  cfg.seed = 8;
  TrialResult c = run_trial(cfg);
  CHECK(a.mean_wait != c.mean_wait);
}

TEST_CASE("simulator: conservation identities hold for every discipline") {
  for (Discipline d :
       {Discipline::FIFO, Discipline::SJF, Discipline::PSJF, Discipline::SRPT,
        Discipline::SPJF, Discipline::PSPJF, Discipline::SPRPT,
        Discipline::SPEPT}) {
    SimConfig cfg;
    cfg.model = exp_mean_x_model();
    cfg.discipline = d;
    cfg.lambda = 0.7;
    cfg.horizon = 2e4;
    cfg.seed = 42;
    TrialResult r = run_trial(cfg);
    CAPTURE(to_string(d));
    // The server is busy exactly while it dispenses work.
    CHECK(r.busy_time == approx_rel(r.dispensed_work, 1e-9));
    // Work in equals work out plus work still in the room.
    CHECK(r.arrived_work ==
          approx_rel(r.dispensed_work + r.residual_work_at_end, 1e-9));
    // Server utilization approaches the offered load.
    CHECK(r.busy_time / cfg.horizon == approx_rel(0.7, 0.03));
    // Non-preemptive disciplines never preempt.
    if (!is_preemptive(d)) CHECK(r.preemptions == 0);
  }
}

TEST_CASE("simulator: time-averaged population obeys the flow identity",
          "[slow]") {
  SimConfig cfg;
  cfg.model = exp_mean_x_model();
  cfg.discipline = Discipline::FIFO;
  cfg.lambda = 0.7;
  cfg.horizon = 2e5;
  cfg.warmup = 2e4;
  cfg.seed = 3;
  TrialResult r = run_trial(cfg);
  const double rate = static_cast<double>(r.completed) /
                      (cfg.horizon - cfg.warmup);
  CHECK(r.time_avg_in_system == approx_rel(rate * r.mean_total, 0.03));
  // And the rate itself approaches the arrival rate.
  CHECK(rate == approx_rel(0.7, 0.02));
}

TEST_CASE("simulator: no arrivals means an idle server") {
  SimConfig cfg;
  cfg.model = exp_exact();
  cfg.discipline = Discipline::SJF;
  cfg.lambda = 0.0;
  cfg.horizon = 100.0;
  TrialResult r = run_trial(cfg);
  CHECK(r.completed == 0);
  CHECK(r.busy_time == 0.0);
  CHECK(r.arrived_work == 0.0);
  CHECK(r.time_avg_in_system == 0.0);
}

TEST_CASE("simulator: exact predictions make predicted policies "
          "event-identical to informed ones") {
  const std::pair<Discipline, Discipline> pairs[] = {
      {Discipline::SJF, Discipline::SPJF},
      {Discipline::PSJF, Discipline::PSPJF},
      {Discipline::SRPT, Discipline::SPRPT},
  };
  for (auto [informed, predicted] : pairs) {
    SimConfig cfg;
    cfg.model = exp_exact();
    cfg.lambda = 0.8;
    cfg.horizon = 5e3;
    cfg.seed = 11;
    cfg.collect_events = true;
    cfg.discipline = informed;
    TrialResult a = run_trial(cfg);
    cfg.discipline = predicted;
    TrialResult b = run_trial(cfg);
    CAPTURE(to_string(informed));
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      REQUIRE(a.events[i].time == b.events[i].time);
      REQUIRE(a.events[i].kind == b.events[i].kind);
      REQUIRE(a.events[i].job == b.events[i].job);
    }
    CHECK(a.mean_wait == b.mean_wait);
    CHECK(a.preemptions == b.preemptions);
  }
}

TEST_CASE("simulator: mean-estimate ordering follows the conditional mean") {
  // The conditional mean of the dispersed-prediction model increases with
  // the prediction, so scheduling on it reorders nothing relative to
  // scheduling on the prediction itself.
  SimConfig cfg;
  cfg.model = exp_mean_x_model();
  cfg.lambda = 0.7;
  cfg.horizon = 2e4;
  cfg.seed = 5;
  cfg.discipline = Discipline::SPJF;
  TrialResult a = run_trial(cfg);
  cfg.discipline = Discipline::SPEPT;
  TrialResult b = run_trial(cfg);
  CHECK(a.completed == b.completed);
  CHECK(a.mean_wait == approx_rel(b.mean_wait, 1e-12));
  CHECK(a.mean_total == approx_rel(b.mean_total, 1e-12));
}

TEST_CASE("simulator: closed batches match their analytic counterparts") {
  auto exact = exp_exact();
  auto noisy = exp_mean_x_model();

  struct Acc {
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    void add(double v) {
      sum += v;
      sumsq += v * v;
      ++n;
    }
    double mean() const { return sum / n; }
    double se() const {
      const double m = mean();
      return std::sqrt(std::max(0.0, sumsq / n - m * m) / n);
    }
  };

  Acc full, pred, rnd;
  const int reps = 400000;
  for (int i = 0; i < reps; ++i) {
    const auto seed = static_cast<std::uint64_t>(i) + 1;
    full.add(run_trial_finite(2, exact, FiniteKey::full, seed));
    pred.add(run_trial_finite(2, noisy, FiniteKey::predicted, seed));
    rnd.add(run_trial_finite(2, exact, FiniteKey::random, seed));
  }
  CAPTURE(full.mean(), pred.mean(), rnd.mean());
  // Shortest-first on two unit-exponential jobs: E[min]/2 = 1/4. Dispersed
  // predictions lift it to 1/3; random order pays E[X]/2 = 1/2.
  CHECK(std::abs(full.mean() - 0.25) < 4.0 * full.se());
  CHECK(std::abs(pred.mean() - 1.0 / 3.0) < 4.0 * pred.se());
  CHECK(std::abs(rnd.mean() - 0.5) < 4.0 * rnd.se());

  // A single job never waits.
  CHECK(run_trial_finite(1, exact, FiniteKey::full, 99) == 0.0);
}

TEST_CASE("simulator: invalid configurations are rejected") {
  SimConfig cfg;
  cfg.model = exp_exact();
  cfg.horizon = 10.0;
  cfg.warmup = 10.0;  // warmup must precede the horizon
  CHECK_THROWS_AS(Simulator(cfg), ConfigError);

  SimConfig no_model;
  no_model.discipline = Discipline::SJF;
  CHECK_THROWS_AS(Simulator(no_model), ConfigError);

  SimConfig needs_classes;
  needs_classes.model = exp_exact();
  needs_classes.discipline = Discipline::PRIORITY;
  CHECK_THROWS_AS(Simulator(needs_classes), ConfigError);

  CHECK_THROWS_AS(run_trial_finite(0, exp_exact(), FiniteKey::full, 1),
                  ConfigError);
  CHECK_THROWS_AS(run_trial_finite(2, nullptr, FiniteKey::full, 1),
                  ConfigError);

  CHECK_THROWS_AS(parse_discipline("NOT_A_POLICY"), ConfigError);
  CHECK(parse_discipline("SPRPT") == Discipline::SPRPT);
}
