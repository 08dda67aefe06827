#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "predq/errors.hpp"
#include "predq/models.hpp"
#include "predq/priority.hpp"
#include "predq/rng.hpp"

namespace predq {

enum class Discipline {
  FIFO,
  SJF,
  PSJF,
  SRPT,
  SPJF,
  PSPJF,
  SPRPT,
  SPEPT,
  PRIORITY,
  PRED_PRIORITY,
};

inline bool is_preemptive(Discipline d) {
  switch (d) {
    case Discipline::PSJF:
    case Discipline::PSPJF:
    case Discipline::SRPT:
    case Discipline::SPRPT:
      return true;
    default:
      return false;
  }
}

inline const char* to_string(Discipline d) {
  switch (d) {
    case Discipline::FIFO: return "FIFO";
    case Discipline::SJF: return "SJF";
    case Discipline::PSJF: return "PSJF";
    case Discipline::SRPT: return "SRPT";
    case Discipline::SPJF: return "SPJF";
    case Discipline::PSPJF: return "PSPJF";
    case Discipline::SPRPT: return "SPRPT";
    case Discipline::SPEPT: return "SPEPT";
    case Discipline::PRIORITY: return "PRIORITY";
    case Discipline::PRED_PRIORITY: return "PRED_PRIORITY";
  }
  return "?";
}

inline Discipline parse_discipline(const std::string& s) {
  for (Discipline d :
       {Discipline::FIFO, Discipline::SJF, Discipline::PSJF, Discipline::SRPT,
        Discipline::SPJF, Discipline::PSPJF, Discipline::SPRPT,
        Discipline::SPEPT, Discipline::PRIORITY, Discipline::PRED_PRIORITY}) {
    if (s == to_string(d)) return d;
  }
  throw ConfigError("unknown policy '" + s + "'");
}

// One externally supplied job for scripted traces.
struct ScriptedJob {
  double arrival;
  double size;
  double predicted;
};

struct SimEvent {
  double time;
  char kind;  // 'A' arrival, 'S' service start, 'P' preemption, 'C' completion
  std::uint64_t job;
};

struct SimConfig {
  ModelPtr model;                          // single-class policies
  std::optional<ClassModel> class_model;   // PRIORITY / PRED_PRIORITY
  Discipline discipline = Discipline::FIFO;
  double lambda = 0.0;       // ignored when class_model is set
  double horizon = 1e5;      // simulated time
  double warmup = 0.0;       // jobs completing before this are discarded
  std::uint64_t seed = 1;
  bool collect_events = false;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::int64_t completed = 0;  // completions inside the measurement window
  double mean_wait = 0.0;      // arrival -> first service
  double mean_total = 0.0;     // arrival -> completion
  double time_avg_in_system = 0.0;
  std::int64_t preemptions = 0;
  // Full-run accounting (includes warmup), for conservation checks.
  double busy_time = 0.0;
  double dispensed_work = 0.0;
  double arrived_work = 0.0;
  double residual_work_at_end = 0.0;
  std::int64_t in_system_at_end = 0;
  // Per scheduling-class tallies (PRIORITY keys on true class,
  // PRED_PRIORITY on the label).
  std::vector<double> class_mean_wait;
  std::vector<std::int64_t> class_completed;
  std::vector<SimEvent> events;
};

namespace detail {

struct SimJobState {
  double arrival = 0.0;
  double size = 0.0;
  double predicted = 0.0;
  double remaining = 0.0;
  double attained = 0.0;
  double first_start = -1.0;
  std::int32_t sched_class = -1;
};

struct ReadyKey {
  double key;
  double arrival;
  std::uint64_t id;
  bool operator<(const ReadyKey& o) const {
    if (key != o.key) return key < o.key;
    if (arrival != o.arrival) return arrival < o.arrival;
    return id < o.id;
  }
};

// Scheduling key at insertion time (jobs in the ready set are not running,
// so remaining/attained are frozen until they are picked again).
inline double insertion_key(const SimJobState& j, Discipline d,
                            const PredictionModel* model) {
  switch (d) {
    case Discipline::FIFO: return j.arrival;
    case Discipline::SJF:
    case Discipline::PSJF: return j.size;
    case Discipline::SPJF:
    case Discipline::PSPJF: return j.predicted;
    case Discipline::SRPT: return j.remaining;
    case Discipline::SPRPT: return std::max(j.predicted - j.attained, 0.0);
    case Discipline::SPEPT:
      return model ? model->conditional_mean_memo(j.predicted) : j.predicted;
    case Discipline::PRIORITY:
    case Discipline::PRED_PRIORITY:
      return static_cast<double>(j.sched_class);
  }
  return 0.0;
}

// Key of the running job at elapsed service `served` into its current stint.
inline double running_key(const SimJobState& j, Discipline d, double served,
                          const PredictionModel* model) {
  switch (d) {
    case Discipline::SRPT: return j.remaining - served;
    case Discipline::SPRPT:
      return std::max(j.predicted - (j.attained + served), 0.0);
    default: {
      SimJobState copy = j;
      return insertion_key(copy, d, model);
    }
  }
}

}  // namespace detail

// Event-driven single-server queue. Arrivals are Poisson (or scripted);
// each carries a (size, prediction) pair from the model, or a (class,
// size, label) triple from the class model. The server follows the
// discipline's key ordering, lowest key first, ties broken by arrival time.
// Preemptive disciplines preempt only on a strictly smaller key, so a job
// whose remaining predicted time has been exhausted (key pinned at zero)
// can no longer be preempted. Simultaneous events process the completion
// before the arrival.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.discipline == Discipline::PRIORITY ||
        cfg_.discipline == Discipline::PRED_PRIORITY) {
      if (!cfg_.class_model) {
        throw ConfigError("priority policies require a class model");
      }
      cfg_.class_model->validate();
    } else if (!cfg_.model) {
      throw ConfigError("simulation requires a prediction model");
    }
    if (!(cfg_.horizon > 0.0) || !(cfg_.warmup >= 0.0) ||
        cfg_.warmup >= cfg_.horizon) {
      throw ConfigError("simulation needs 0 <= warmup < horizon");
    }
    if (cfg_.discipline == Discipline::SPEPT && cfg_.model &&
        !cfg_.model->has_conditional_mean()) {
      throw ConfigError("SPEPT requires a model with a conditional mean");
    }
  }

  TrialResult run() {
    Rng rng(cfg_.seed);
    return run_impl(&rng, nullptr);
  }

  TrialResult run_scripted(const std::vector<ScriptedJob>& jobs) {
    Rng rng(cfg_.seed);
    return run_impl(&rng, &jobs);
  }

 private:
  double arrival_rate() const {
    return cfg_.class_model ? cfg_.class_model->total_lambda() : cfg_.lambda;
  }

  detail::SimJobState make_job(double t, Rng& rng) const {
    detail::SimJobState j;
    j.arrival = t;
    if (cfg_.class_model) {
      const ClassModel& cm = *cfg_.class_model;
      const double u = rng.uniform01() * cm.total_lambda();
      std::size_t cls = 0;
      double acc = 0.0;
      for (; cls + 1 < cm.classes(); ++cls) {
        acc += cm.lambdas[cls];
        if (u < acc) break;
      }
      j.size = cm.services[cls]->sample(rng);
      const double v = rng.uniform01();
      std::size_t label = 0;
      double cacc = 0.0;
      for (; label + 1 < cm.classes(); ++label) {
        cacc += cm.confusion[cls][label];
        if (v < cacc) break;
      }
      j.predicted = j.size;
      j.sched_class = cfg_.discipline == Discipline::PRED_PRIORITY
                          ? static_cast<std::int32_t>(label)
                          : static_cast<std::int32_t>(cls);
    } else {
      auto [x, y] = cfg_.model->sample(rng);
      j.size = x;
      j.predicted = y;
    }
    j.remaining = j.size;
    return j;
  }

  TrialResult run_impl(Rng* rng, const std::vector<ScriptedJob>* script) {
    const Discipline pol = cfg_.discipline;
    const bool preemptive = is_preemptive(pol);
    const PredictionModel* model = cfg_.model.get();
    const double horizon = cfg_.horizon;
    const double warmup = cfg_.warmup;
    const double lam = arrival_rate();
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<detail::SimJobState> jobs;
    if (script) {
      jobs.reserve(script->size());
    } else if (lam > 0.0) {
      jobs.reserve(static_cast<std::size_t>(lam * horizon * 1.1) + 16);
    }
    std::set<detail::ReadyKey> ready;

    TrialResult out;
    out.seed = cfg_.seed;
    std::size_t n_classes =
        cfg_.class_model ? cfg_.class_model->classes() : 0;
    std::vector<double> class_wait_sum(n_classes, 0.0);
    out.class_completed.assign(n_classes, 0);

    // Statistics accumulators.
    double wait_sum = 0.0, total_sum = 0.0;
    double area = 0.0, last_t = 0.0;
    std::int64_t in_system = 0;

    auto advance_area = [&](double to) {
      const double lo = std::max(last_t, warmup);
      const double hi = std::min(to, horizon);
      if (hi > lo) area += static_cast<double>(in_system) * (hi - lo);
      last_t = to;
    };

    // Arrival source.
    std::size_t script_pos = 0;
    auto next_arrival_time = [&](double now) -> double {
      if (script) {
        return script_pos < script->size() ? (*script)[script_pos].arrival
                                           : inf;
      }
      return lam > 0.0 ? now + rng->exponential(1.0 / lam) : inf;
    };

    double next_arr = next_arrival_time(0.0);
    std::int64_t serving = -1;  // index into jobs
    double serve_start = 0.0, completion = inf;

    auto log_event = [&](double t, char kind, std::uint64_t id) {
      if (cfg_.collect_events) out.events.push_back({t, kind, id});
    };

    auto start_service = [&](double t) {
      // Pick the lowest-key ready job and begin (or resume) it.
      auto it = ready.begin();
      serving = static_cast<std::int64_t>(it->id);
      ready.erase(it);
      detail::SimJobState& j = jobs[static_cast<std::size_t>(serving)];
      if (j.first_start < 0.0) j.first_start = t;
      serve_start = t;
      completion = t + j.remaining;
      log_event(t, 'S', static_cast<std::uint64_t>(serving));
    };

    while (true) {
      const double t_next = std::min(completion, next_arr);
      if (!(t_next <= horizon)) break;

      if (completion <= next_arr) {
        // ---- completion (wins ties against arrivals) ----
        const double t = completion;
        advance_area(t);
        detail::SimJobState& j = jobs[static_cast<std::size_t>(serving)];
        const double served = j.remaining;
        out.dispensed_work += served;
        out.busy_time += t - serve_start;
        j.attained += served;
        j.remaining = 0.0;
        --in_system;
        log_event(t, 'C', static_cast<std::uint64_t>(serving));
        if (t >= warmup) {
          ++out.completed;
          wait_sum += j.first_start - j.arrival;
          total_sum += t - j.arrival;
          if (j.sched_class >= 0 &&
              static_cast<std::size_t>(j.sched_class) < n_classes) {
            class_wait_sum[static_cast<std::size_t>(j.sched_class)] +=
                j.first_start - j.arrival;
            ++out.class_completed[static_cast<std::size_t>(j.sched_class)];
          }
        }
        serving = -1;
        completion = inf;
        if (!ready.empty()) start_service(t);
        continue;
      }

      // ---- arrival ----
      const double t = next_arr;
      advance_area(t);
      detail::SimJobState j = script
          ? [&] {
              const ScriptedJob& sj = (*script)[script_pos++];
              detail::SimJobState js;
              js.arrival = sj.arrival;
              js.size = sj.size;
              js.remaining = sj.size;
              js.predicted = sj.predicted;
              return js;
            }()
          : make_job(t, *rng);
      next_arr = next_arrival_time(t);
      const std::uint64_t id = jobs.size();
      jobs.push_back(j);
      ++in_system;
      out.arrived_work += j.size;
      log_event(t, 'A', id);
      const double key = detail::insertion_key(jobs[id], pol, model);
      ready.insert({key, j.arrival, id});

      if (serving < 0) {
        start_service(t);
        continue;
      }
      if (preemptive) {
        detail::SimJobState& cur = jobs[static_cast<std::size_t>(serving)];
        const double served = t - serve_start;
        const double cur_key = detail::running_key(cur, pol, served, model);
        if (ready.begin()->key < cur_key) {
          // Preempt: bank the work done so far, requeue the running job.
          cur.remaining -= served;
          cur.attained += served;
          out.dispensed_work += served;
          out.busy_time += served;
          ++out.preemptions;
          log_event(t, 'P', static_cast<std::uint64_t>(serving));
          ready.insert({detail::insertion_key(cur, pol, model), cur.arrival,
                        static_cast<std::uint64_t>(serving)});
          serving = -1;
          completion = inf;
          start_service(t);
        }
      }
    }

    // Horizon reached: close out the running stint and the area integral.
    if (serving >= 0) {
      detail::SimJobState& cur = jobs[static_cast<std::size_t>(serving)];
      const double served = horizon - serve_start;
      cur.remaining -= served;
      cur.attained += served;
      out.dispensed_work += served;
      out.busy_time += served;
    }
    advance_area(horizon);

    out.in_system_at_end = in_system;
    for (const auto& j : jobs) out.residual_work_at_end += j.remaining;

    if (out.completed > 0) {
      out.mean_wait = wait_sum / static_cast<double>(out.completed);
      out.mean_total = total_sum / static_cast<double>(out.completed);
    }
    if (horizon > warmup) {
      out.time_avg_in_system = area / (horizon - warmup);
    }
    out.class_mean_wait.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (out.class_completed[c] > 0) {
        out.class_mean_wait[c] =
            class_wait_sum[c] / static_cast<double>(out.class_completed[c]);
      }
    }
    return out;
  }

  SimConfig cfg_;
};

inline TrialResult run_trial(const SimConfig& cfg) {
  return Simulator(cfg).run();
}

inline TrialResult run_scripted(const SimConfig& cfg,
                                const std::vector<ScriptedJob>& jobs) {
  return Simulator(cfg).run_scripted(jobs);
}

// ---------------------------------------------------------------------------
// Closed batch: n jobs all present at time zero, served to completion
// shortest-key-first without preemption (no further arrivals, so preemptive
// and non-preemptive variants coincide). Ties are randomized by the shuffle.
enum class FiniteKey { full, predicted, random };

inline double run_trial_finite(int n, const ModelPtr& model, FiniteKey key,
                               std::uint64_t seed) {
  if (n < 1) throw ConfigError("batch size must be at least 1");
  if (!model) throw ConfigError("simulation requires a prediction model");
  Rng rng(seed);
  std::vector<std::pair<double, double>> batch(static_cast<std::size_t>(n));
  for (auto& j : batch) j = model->sample(rng);

  // Random service order for ties: shuffle, then stable-sort by key.
  for (std::size_t i = batch.size(); i > 1; --i) {
    const std::size_t k =
        static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
    std::swap(batch[i - 1], batch[std::min(k, i - 1)]);
  }
  if (key != FiniteKey::random) {
    std::stable_sort(batch.begin(), batch.end(),
                     [&](const auto& a, const auto& b) {
                       const double ka = key == FiniteKey::full ? a.first
                                                                : a.second;
                       const double kb = key == FiniteKey::full ? b.first
                                                                : b.second;
                       return ka < kb;
                     });
  }
  double clock = 0.0, wait_sum = 0.0;
  for (const auto& j : batch) {
    wait_sum += clock;
    clock += j.first;
  }
  return wait_sum / static_cast<double>(n);
}

}  // namespace predq
