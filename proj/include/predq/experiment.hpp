#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "predq/analytic.hpp"
#include "predq/errors.hpp"
#include "predq/models.hpp"
#include "predq/simulator.hpp"
#include "predq/srpt.hpp"

namespace predq {

// ---------------------------------------------------------------------------
// Closed-form dispatch for the single-queue policies. Holds the level-kernel
// analyzers so a sweep over arrival rates pays their construction once.
class AnalyticDispatcher {
 public:
  explicit AnalyticDispatcher(ModelPtr model, QuadratureSettings qs = {})
      : model_(std::move(model)), qs_(qs) {}

  AnalyticResult operator()(Discipline d, double lambda) const {
    switch (d) {
      case Discipline::FIFO: return fifo_time(model_, lambda);
      case Discipline::SJF: return sjf_time(model_, lambda, qs_);
      case Discipline::SPJF: return spjf_time(model_, lambda, qs_);
      case Discipline::PSJF: return psjf_time(model_, lambda, qs_);
      case Discipline::PSPJF:
        return pspjf_time(model_, lambda, PspjfWaitMoment::true_sizes, qs_);
      case Discipline::SRPT: {
        AnalyticResult r = informed_analyzer().time(lambda);
        r.policy = "SRPT";
        return r;
      }
      case Discipline::SPRPT: return predicted_analyzer().time(lambda);
      case Discipline::SPEPT:
      case Discipline::PRIORITY:
      case Discipline::PRED_PRIORITY:
        throw DomainError(std::string("no closed form implemented for ") +
                          to_string(d));
    }
    throw DomainError("unreachable policy");
  }

 private:
  const SprptAnalyzer& predicted_analyzer() const {
    std::call_once(pred_once_, [&] {
      pred_ = std::make_unique<SprptAnalyzer>(model_, qs_);
    });
    return *pred_;
  }
  const SprptAnalyzer& informed_analyzer() const {
    std::call_once(inf_once_, [&] {
      inf_ = std::make_unique<SprptAnalyzer>(
          model_->has_joint_density()
              ? exact_model(model_->service_marginal())
              : model_,
          qs_);
    });
    return *inf_;
  }

  ModelPtr model_;
  QuadratureSettings qs_;
  mutable std::once_flag pred_once_, inf_once_;
  mutable std::unique_ptr<SprptAnalyzer> pred_, inf_;
};

// ---------------------------------------------------------------------------
struct Summary {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1)
  double ci95 = 0.0;    // 1.96 stddev / sqrt(n)
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : xs) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
    s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

// Worker count: PREDQ_THREADS when set, hardware concurrency otherwise.
inline unsigned worker_count() {
  if (const char* env = std::getenv("PREDQ_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

struct ExperimentPlan {
  ModelPtr model;
  std::vector<Discipline> policies;
  std::vector<double> lambdas;
  int trials = 50;
  double horizon = 2e5;
  double warmup = 2e4;
  std::uint64_t base_seed = 1u;
  bool with_analytic = true;
};

struct CellResult {
  std::string model_name;
  std::string policy;
  double lambda = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  Summary sim_total;
  Summary sim_wait;
  double analytic_total = std::numeric_limits<double>::quiet_NaN();
  double analytic_wait = std::numeric_limits<double>::quiet_NaN();
  bool analytic_ok = false;
  std::string analytic_note;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Runs `trials` independent replications of one cell; trial i always uses
// seed base_seed + i, so results do not depend on the worker count, and the
// final reduction is a fixed left-to-right fold over trial index.
inline void run_cell_trials(const ExperimentPlan& plan, Discipline pol,
                            double lambda, std::vector<double>& totals,
                            std::vector<double>& waits) {
  totals.assign(static_cast<std::size_t>(plan.trials), 0.0);
  waits.assign(static_cast<std::size_t>(plan.trials), 0.0);
  const unsigned workers =
      std::min<unsigned>(worker_count(),
                         static_cast<unsigned>(std::max(plan.trials, 1)));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= plan.trials) return;
      try {
        SimConfig cfg;
        cfg.model = plan.model;
        cfg.discipline = pol;
        cfg.lambda = lambda;
        cfg.horizon = plan.horizon;
        cfg.warmup = plan.warmup;
        cfg.seed = plan.base_seed + static_cast<std::uint64_t>(i);
        const TrialResult r = run_trial(cfg);
        totals[static_cast<std::size_t>(i)] = r.mean_total;
        waits[static_cast<std::size_t>(i)] = r.mean_wait;
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(plan.trials);
        return;
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// Runs every (policy, lambda) cell of the plan: analytic value where a
// closed form exists, plus `trials` simulator replications. A cell whose
// closed form fails to converge is recorded and the sweep continues.
inline std::vector<CellResult> run_plan(const ExperimentPlan& plan) {
  if (!plan.model) throw ConfigError("experiment plan requires a model");
  if (plan.trials < 0) throw ConfigError("trial count must be >= 0");
  AnalyticDispatcher dispatch(plan.model);
  std::vector<CellResult> out;
  for (Discipline pol : plan.policies) {
    for (double lambda : plan.lambdas) {
      CellResult cell;
      cell.model_name = plan.model->name();
      cell.policy = to_string(pol);
      cell.lambda = lambda;
      if (plan.with_analytic) {
        try {
          const AnalyticResult a = dispatch(pol, lambda);
          cell.analytic_total = a.expected_total;
          cell.analytic_wait = a.expected_wait;
          cell.analytic_ok = true;
        } catch (const NonConvergenceError& e) {
          cell.analytic_note = e.what();
        } catch (const DomainError& e) {
          cell.analytic_note = e.what();
        }
      }
      std::vector<double> totals, waits;
      detail::run_cell_trials(plan, pol, lambda, totals, waits);
      cell.sim_total = summarize(totals);
      cell.sim_wait = summarize(waits);
      if (cell.analytic_ok && cell.analytic_total > 0.0 &&
          cell.sim_total.n > 0) {
        cell.rel_error =
            (cell.sim_total.mean - cell.analytic_total) / cell.analytic_total;
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction-noise sweep: multiplicative uniform noise of half-width alpha
// around the true size, on an exponential or heavy-tailed Weibull base.
struct AlphaSweepConfig {
  std::string base = "exponential";  // or "weibull"
  double lambda = 0.95;
  std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<Discipline> policies = {Discipline::SPJF, Discipline::SPRPT};
  int trials = 50;
  double horizon = 2e5;
  double warmup = 2e4;
  std::uint64_t base_seed = 1u;
  bool with_analytic = true;
};

inline ServiceDistPtr make_base_dist(const std::string& name) {
  if (name == "exponential") return std::make_shared<ExponentialDist>(1.0);
  if (name == "weibull") return std::make_shared<WeibullSqrtDist>();
  throw ConfigError("unknown base distribution '" + name +
                    "' (expected exponential or weibull)");
}

inline std::vector<CellResult> alpha_sweep(const AlphaSweepConfig& cfg) {
  std::vector<CellResult> out;
  for (double alpha : cfg.alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ConfigError("alpha grid entries must lie in [0,1]");
    }
    ExperimentPlan plan;
    plan.model = uniform_alpha_model(make_base_dist(cfg.base), alpha);
    plan.policies = cfg.policies;
    plan.lambdas = {cfg.lambda};
    plan.trials = cfg.trials;
    plan.horizon = cfg.horizon;
    plan.warmup = cfg.warmup;
    plan.base_seed = cfg.base_seed;
    plan.with_analytic = cfg.with_analytic;
    std::vector<CellResult> cells = run_plan(plan);
    for (auto& c : cells) {
      c.alpha = alpha;
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. CSV carries full double precision (%.17g) and survives a
// parse round trip bit-for-bit; the Markdown table is for reading, six
// significant digits.
namespace detail {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string g6(double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline const char* cells_csv_header() {
  return "model,policy,lambda,alpha,trials,sim_mean_total,sim_stddev_total,"
         "sim_ci95_total,sim_mean_wait,sim_stddev_wait,sim_ci95_wait,"
         "analytic_total,analytic_wait,rel_error,analytic_note";
}

inline std::string to_csv(const std::vector<CellResult>& cells) {
  std::string out = cells_csv_header();
  out += '\n';
  for (const auto& c : cells) {
    out += detail::csv_quote(c.model_name);
    out += ',';
    out += c.policy;
    out += ',';
    out += detail::g17(c.lambda);
    out += ',';
    out += detail::g17(c.alpha);
    out += ',';
    out += std::to_string(c.sim_total.n);
    out += ',';
    out += detail::g17(c.sim_total.mean);
    out += ',';
    out += detail::g17(c.sim_total.stddev);
    out += ',';
    out += detail::g17(c.sim_total.ci95);
    out += ',';
    out += detail::g17(c.sim_wait.mean);
    out += ',';
    out += detail::g17(c.sim_wait.stddev);
    out += ',';
    out += detail::g17(c.sim_wait.ci95);
    out += ',';
    out += detail::g17(c.analytic_total);
    out += ',';
    out += detail::g17(c.analytic_wait);
    out += ',';
    out += detail::g17(c.rel_error);
    out += ',';
    out += detail::csv_quote(c.analytic_note);
    out += '\n';
  }
  return out;
}

inline std::vector<CellResult> parse_cells_csv(const std::string& text) {
  std::vector<CellResult> out;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    // Split respecting quotes.
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 15) {
      throw ConfigError("malformed experiment CSV row: " + line);
    }
    CellResult c;
    c.model_name = fields[0];
    c.policy = fields[1];
    c.lambda = std::strtod(fields[2].c_str(), nullptr);
    c.alpha = std::strtod(fields[3].c_str(), nullptr);
    const int n = static_cast<int>(std::strtol(fields[4].c_str(), nullptr, 10));
    c.sim_total.n = n;
    c.sim_wait.n = n;
    c.sim_total.mean = std::strtod(fields[5].c_str(), nullptr);
    c.sim_total.stddev = std::strtod(fields[6].c_str(), nullptr);
    c.sim_total.ci95 = std::strtod(fields[7].c_str(), nullptr);
    c.sim_wait.mean = std::strtod(fields[8].c_str(), nullptr);
    c.sim_wait.stddev = std::strtod(fields[9].c_str(), nullptr);
    c.sim_wait.ci95 = std::strtod(fields[10].c_str(), nullptr);
    c.analytic_total = std::strtod(fields[11].c_str(), nullptr);
    c.analytic_wait = std::strtod(fields[12].c_str(), nullptr);
    c.rel_error = std::strtod(fields[13].c_str(), nullptr);
    c.analytic_note = fields[14];
    c.analytic_ok = !std::isnan(c.analytic_total);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string to_markdown(const std::vector<CellResult>& cells) {
  std::string out =
      "| model | policy | lambda | alpha | trials | sim mean T | ci95 | "
      "analytic T | rel err |\n"
      "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : cells) {
    out += "| " + c.model_name + " | " + c.policy + " | " +
           detail::g6(c.lambda) + " | " + detail::g6(c.alpha) + " | " +
           std::to_string(c.sim_total.n) + " | " +
           detail::g6(c.sim_total.mean) + " | " +
           detail::g6(c.sim_total.ci95) + " | " +
           detail::g6(c.analytic_total) + " | " + detail::g6(c.rel_error) +
           " |\n";
  }
  return out;
}

}  // namespace predq
