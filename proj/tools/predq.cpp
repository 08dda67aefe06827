// Command-line front end for the scheduling-with-predictions toolkit.
//
// Subcommands:
//   analytic   closed-form response time for one policy at one arrival rate
//   simulate   replicated discrete-event simulation of one or more cells
//   table      load sweep comparing policies (analytic + simulation)
//   figure1    prediction-noise sweep at fixed load
//   pom        price-of-misprediction scenarios
//
// Exit codes: 0 success, 2 configuration error, 3 unstable system,
// 4 numerical non-convergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "predq/predq.hpp"

namespace {

using namespace predq;

struct ModelOptions {
  std::string kind = "exp_mean_x";
  std::string base = "exponential";
  double alpha = 0.5;
  double s = 1.0, l = 2.0, frac_short = 0.5, p = 0.0, q = 0.0;
};

void add_model_flags(CLI::App* cmd, ModelOptions& mo) {
  cmd->add_option("--model", mo.kind,
                  "prediction model: exp_mean_x, reversed, exact, uniform, "
                  "two_type")
      ->capture_default_str();
  cmd->add_option("--base", mo.base,
                  "service base for exact/uniform: exponential, weibull")
      ->capture_default_str();
  cmd->add_option("--alpha", mo.alpha, "noise half-width for uniform model")
      ->capture_default_str();
  cmd->add_option("--short", mo.s, "two_type short size")
      ->capture_default_str();
  cmd->add_option("--long", mo.l, "two_type long size")->capture_default_str();
  cmd->add_option("--frac-short", mo.frac_short, "two_type short fraction")
      ->capture_default_str();
  cmd->add_option("--p", mo.p, "P(short mislabeled long)")
      ->capture_default_str();
  cmd->add_option("--q", mo.q, "P(long mislabeled short)")
      ->capture_default_str();
}

ModelPtr build_model(const ModelOptions& mo) {
  if (mo.kind == "exp_mean_x") return exp_mean_x_model();
  if (mo.kind == "reversed") return reversed_exp_model();
  if (mo.kind == "exact") return exact_model(make_base_dist(mo.base));
  if (mo.kind == "uniform") {
    return uniform_alpha_model(make_base_dist(mo.base), mo.alpha);
  }
  if (mo.kind == "two_type") {
    return two_type_model(mo.s, mo.l, mo.frac_short, mo.p, mo.q);
  }
  throw ConfigError("unknown model kind '" + mo.kind + "'");
}

void emit(const std::string& text, const std::string& path) {
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << text;
}

std::string render(const std::vector<CellResult>& cells,
                   const std::string& format) {
  if (format == "csv") return to_csv(cells);
  if (format == "markdown" || format == "md") return to_markdown(cells);
  throw ConfigError("unknown output format '" + format + "'");
}

int cmd_analytic(const ModelOptions& mo, const std::string& policy,
                 double lambda, const QuadratureSettings& qs) {
  const ModelPtr model = build_model(mo);
  const AnalyticDispatcher dispatch(model, qs);
  const AnalyticResult r = dispatch(parse_discipline(policy), lambda);
  std::printf("model      %s\n", model->name().c_str());
  std::printf("policy     %s\n", r.policy.c_str());
  std::printf("lambda     %.10g\n", r.lambda);
  std::printf("wait       %.10g\n", r.expected_wait);
  std::printf("residence  %.10g\n", r.expected_residence);
  std::printf("total      %.10g\n", r.expected_total);
  std::printf("quad_error %.3g\n", r.error_estimate);
  return 0;
}

int cmd_simulate(const std::optional<std::string>& config_path,
                 const ModelOptions& mo, std::vector<std::string> policies,
                 std::vector<double> lambdas, int trials, double horizon,
                 double warmup, std::uint64_t seed, bool no_analytic,
                 std::string format, std::string out_path) {
  ExperimentPlan plan;
  if (config_path) {
    const IniFile ini = IniFile::parse_file(*config_path);
    plan = plan_from_ini(ini, model_from_ini(ini));
    const OutputConfig oc = output_from_ini(ini);
    if (format.empty()) format = oc.format;
    if (out_path.empty()) out_path = oc.path;
  } else {
    plan.model = build_model(mo);
    for (const auto& p : policies) plan.policies.push_back(parse_discipline(p));
    plan.lambdas = lambdas;
    plan.trials = trials;
    plan.horizon = horizon;
    plan.warmup = warmup;
    plan.base_seed = seed;
  }
  if (format.empty()) format = "markdown";
  if (out_path.empty()) out_path = "-";
  if (plan.policies.empty() || plan.lambdas.empty()) {
    throw ConfigError("simulate needs at least one policy and one lambda");
  }
  for (double l : plan.lambdas) {
    if (plan.model->mean_service() * l >= 1.0) {
      throw UnstableError("offered load >= 1 at lambda " + std::to_string(l),
                          plan.model->mean_service() * l);
    }
  }
  plan.with_analytic = !no_analytic;
  emit(render(run_plan(plan), format), out_path);
  return 0;
}

int cmd_table(int which, bool analytic_only, bool include_high_lambda,
              int trials, double horizon, double warmup, std::uint64_t seed,
              const std::string& format, const std::string& out_path) {
  if (which != 1 && which != 2) {
    throw ConfigError("--which must be 1 (non-preemptive) or 2 (preemptive)");
  }
  const ModelPtr model = exp_mean_x_model();
  const std::vector<double> all_lambdas = {0.5,  0.6,  0.7,  0.8,
                                           0.9,  0.95, 0.98, 0.99};
  const std::vector<Discipline> policies =
      which == 1
          ? std::vector<Discipline>{Discipline::FIFO, Discipline::SJF,
                                    Discipline::SPJF}
          : std::vector<Discipline>{Discipline::SRPT, Discipline::SPRPT};

  // Analytic values for every load; simulation only where the run time
  // stays desk-scale unless the caller opts in.
  const AnalyticDispatcher dispatch(model);
  std::vector<CellResult> cells;
  for (Discipline pol : policies) {
    for (double lambda : all_lambdas) {
      const bool simulate =
          !analytic_only && (include_high_lambda || lambda <= 0.95);
      ExperimentPlan plan;
      plan.model = model;
      plan.policies = {pol};
      plan.lambdas = {lambda};
      plan.trials = simulate ? trials : 0;
      plan.horizon = horizon;
      plan.warmup = warmup;
      plan.base_seed = seed;
      std::vector<CellResult> cell = run_plan(plan);
      cells.insert(cells.end(), cell.begin(), cell.end());
    }
  }
  emit(render(cells, format), out_path);
  return 0;
}

int cmd_figure1(const std::string& base, double lambda,
                std::vector<double> alphas, int trials, double horizon,
                double warmup, std::uint64_t seed, const std::string& format,
                const std::string& out_path) {
  AlphaSweepConfig cfg;
  cfg.base = base;
  cfg.lambda = lambda;
  if (!alphas.empty()) cfg.alphas = std::move(alphas);
  cfg.trials = trials;
  cfg.horizon = horizon;
  cfg.warmup = warmup;
  cfg.base_seed = seed;
  emit(render(alpha_sweep(cfg), format), out_path);
  return 0;
}

int cmd_pom(const std::string& scenario, const ModelOptions& mo, int n,
            double lambda, double n_s, double n_l,
            std::vector<double> class_lambdas, std::vector<double> class_means,
            std::vector<std::string> confusion_rows) {
  if (scenario == "finite") {
    const ModelPtr model = build_model(mo);
    const double full = finite_n_wait_full(model, n);
    const double pred = finite_n_wait_predicted(model, n);
    std::printf("model          %s\n", model->name().c_str());
    std::printf("batch size     %d\n", n);
    std::printf("informed wait  %.10g\n", full);
    std::printf("predicted wait %.10g\n", pred);
    std::printf("pom            %.10g\n", price_of_misprediction(full, pred));
    return 0;
  }
  if (scenario == "two_type") {
    TwoTypeBatch b{n_s, n_l, mo.s, mo.l, mo.p, mo.q};
    const double full_e = two_type_wait(b, TwoTypeMode::full,
                                        TwoTypeForm::exact);
    const double pred_e = two_type_wait(b, TwoTypeMode::predicted,
                                        TwoTypeForm::exact);
    const double rand_e = two_type_wait(b, TwoTypeMode::random,
                                        TwoTypeForm::exact);
    std::printf("informed wait (exact)   %.10g\n", full_e);
    std::printf("random wait (exact)     %.10g\n", rand_e);
    std::printf("predicted wait (exact)  %.10g\n", pred_e);
    std::printf("asymptotic ratio        %.10g\n", two_type_ratio(b));
    std::printf("composition bound       %.10g\n",
                two_type_pom_bound(mo.s, mo.l, mo.p, mo.q));
    return 0;
  }
  if (scenario == "priority") {
    ClassModel cm;
    if (class_lambdas.size() != class_means.size() ||
        confusion_rows.size() != class_lambdas.size() ||
        class_lambdas.empty()) {
      throw ConfigError("priority scenario needs --class-lambdas, "
                        "--class-means and --confusion-row of equal count");
    }
    cm.lambdas = class_lambdas;
    for (double m : class_means) {
      cm.services.push_back(std::make_shared<DeterministicDist>(m));
    }
    for (const auto& row : confusion_rows) {
      std::vector<double> r;
      std::string tok;
      for (char c : row + ",") {
        if (c == ',') {
          if (!tok.empty()) r.push_back(std::strtod(tok.c_str(), nullptr));
          tok.clear();
        } else {
          tok += c;
        }
      }
      cm.confusion.push_back(std::move(r));
    }
    cm.validate();
    for (std::size_t i = 0; i < cm.classes(); ++i) {
      std::printf("class %zu wait: informed %.10g predicted %.10g\n", i,
                  priority_wait(cm, i, false), priority_wait(cm, i, true));
    }
    std::printf("pom %.10g\n", priority_pom(cm));
    return 0;
  }
  if (scenario == "spjf") {
    const ModelPtr model = build_model(mo);
    const double informed = sjf_time(model, lambda).expected_wait;
    const double predicted = spjf_time(model, lambda).expected_wait;
    std::printf("informed wait  %.10g\n", informed);
    std::printf("predicted wait %.10g\n", predicted);
    std::printf("pom            %.10g\n",
                price_of_misprediction(informed, predicted));
    return 0;
  }
  throw ConfigError("unknown pom scenario '" + scenario +
                    "' (finite, two_type, priority, spjf)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"M/G/1 scheduling with predictions: closed forms, simulation, "
               "and price-of-misprediction experiments"};
  app.require_subcommand(1);

  // ---- analytic ----
  auto* an = app.add_subcommand("analytic", "closed-form response time");
  ModelOptions an_mo;
  add_model_flags(an, an_mo);
  std::string an_policy = "SPJF";
  double an_lambda = 0.9;
  an->add_option("--policy", an_policy, "scheduling policy")
      ->capture_default_str();
  an->add_option("--lambda", an_lambda, "arrival rate")->capture_default_str();
  QuadratureSettings an_qs;
  an->add_option("--rel-tol", an_qs.rel_tol, "quadrature relative tolerance")
      ->capture_default_str();
  an->add_option("--abs-tol", an_qs.abs_tol, "quadrature absolute tolerance")
      ->capture_default_str();
  an->add_option("--max-subdivisions", an_qs.max_subdivisions,
                 "quadrature panel budget")
      ->capture_default_str();

  // ---- simulate ----
  auto* si = app.add_subcommand("simulate", "discrete-event simulation");
  ModelOptions si_mo;
  add_model_flags(si, si_mo);
  std::optional<std::string> si_config;
  std::vector<std::string> si_policies = {"FIFO"};
  std::vector<double> si_lambdas = {0.9};
  int si_trials = 50;
  double si_horizon = 2e5, si_warmup = 2e4;
  std::uint64_t si_seed = 1;
  bool si_no_analytic = false;
  std::string si_format, si_out;
  si->add_option("--config", si_config, "INI config file");
  si->add_option("--policy", si_policies, "policies to simulate")
      ->delimiter(',')
      ->capture_default_str();
  si->add_option("--lambda", si_lambdas, "arrival rates")
      ->delimiter(',')
      ->capture_default_str();
  si->add_option("--trials", si_trials, "independent replications")
      ->capture_default_str();
  si->add_option("--horizon", si_horizon, "simulated time per trial")
      ->capture_default_str();
  si->add_option("--warmup", si_warmup, "initial time discarded")
      ->capture_default_str();
  si->add_option("--seed", si_seed, "base seed (trial i uses seed+i)")
      ->capture_default_str();
  si->add_flag("--no-analytic", si_no_analytic,
               "skip closed-form reference values");
  si->add_option("--format", si_format, "markdown or csv");
  si->add_option("--out", si_out, "output path ('-' for stdout)");

  // ---- table ----
  auto* ta = app.add_subcommand("table",
                                "load sweep on the exponential model with "
                                "exponential predictions");
  int ta_which = 1;
  bool ta_analytic_only = false, ta_high = false;
  int ta_trials = 50;
  double ta_horizon = 2e5, ta_warmup = 2e4;
  std::uint64_t ta_seed = 1;
  std::string ta_format = "markdown", ta_out = "-";
  ta->add_option("--which", ta_which,
                 "1 = FIFO/SJF/SPJF, 2 = SRPT/SPRPT")
      ->capture_default_str();
  ta->add_flag("--analytic-only", ta_analytic_only, "skip all simulation");
  ta->add_flag("--include-high-lambda", ta_high,
               "also simulate lambda 0.98 and 0.99");
  ta->add_option("--trials", ta_trials, "replications per cell")
      ->capture_default_str();
  ta->add_option("--horizon", ta_horizon, "simulated time per trial")
      ->capture_default_str();
  ta->add_option("--warmup", ta_warmup, "initial time discarded")
      ->capture_default_str();
  ta->add_option("--seed", ta_seed, "base seed")->capture_default_str();
  ta->add_option("--format", ta_format, "markdown or csv")
      ->capture_default_str();
  ta->add_option("--out", ta_out, "output path")->capture_default_str();

  // ---- figure1 ----
  auto* fi = app.add_subcommand("figure1",
                                "response time vs prediction noise at fixed "
                                "load");
  std::string fi_base = "exponential";
  double fi_lambda = 0.95;
  std::vector<double> fi_alphas;
  int fi_trials = 50;
  double fi_horizon = 2e5, fi_warmup = 2e4;
  std::uint64_t fi_seed = 1;
  std::string fi_format = "markdown", fi_out = "-";
  fi->add_option("--base", fi_base, "exponential or weibull")
      ->capture_default_str();
  fi->add_option("--lambda", fi_lambda, "arrival rate")->capture_default_str();
  fi->add_option("--alphas", fi_alphas,
                 "noise half-widths (default 0,0.25,0.5,0.75,1)")
      ->delimiter(',');
  fi->add_option("--trials", fi_trials, "replications per cell")
      ->capture_default_str();
  fi->add_option("--horizon", fi_horizon, "simulated time per trial")
      ->capture_default_str();
  fi->add_option("--warmup", fi_warmup, "initial time discarded")
      ->capture_default_str();
  fi->add_option("--seed", fi_seed, "base seed")->capture_default_str();
  fi->add_option("--format", fi_format, "markdown or csv")
      ->capture_default_str();
  fi->add_option("--out", fi_out, "output path")->capture_default_str();

  // ---- pom ----
  auto* po = app.add_subcommand("pom", "price-of-misprediction scenarios");
  ModelOptions po_mo;
  add_model_flags(po, po_mo);
  std::string po_scenario = "finite";
  int po_n = 2;
  double po_lambda = 0.9, po_ns = 6, po_nl = 4;
  std::vector<double> po_class_lambdas, po_class_means;
  std::vector<std::string> po_confusion;
  po->add_option("--scenario", po_scenario,
                 "finite, two_type, priority, spjf")
      ->capture_default_str();
  po->add_option("--n", po_n, "batch size for finite scenario")
      ->capture_default_str();
  po->add_option("--lambda", po_lambda, "arrival rate for spjf scenario")
      ->capture_default_str();
  po->add_option("--n-short", po_ns, "two_type short count")
      ->capture_default_str();
  po->add_option("--n-long", po_nl, "two_type long count")
      ->capture_default_str();
  po->add_option("--class-lambdas", po_class_lambdas,
                 "priority per-class arrival rates")
      ->delimiter(',');
  po->add_option("--class-means", po_class_means,
                 "priority per-class deterministic service times")
      ->delimiter(',');
  po->add_option("--confusion-row", po_confusion,
                 "priority confusion matrix rows, e.g. 0.9,0.1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (an->parsed()) return cmd_analytic(an_mo, an_policy, an_lambda, an_qs);
    if (si->parsed()) {
      return cmd_simulate(si_config, si_mo, si_policies, si_lambdas,
                          si_trials, si_horizon, si_warmup, si_seed,
                          si_no_analytic, si_format, si_out);
    }
    if (ta->parsed()) {
      return cmd_table(ta_which, ta_analytic_only, ta_high, ta_trials,
                       ta_horizon, ta_warmup, ta_seed, ta_format, ta_out);
    }
    if (fi->parsed()) {
      return cmd_figure1(fi_base, fi_lambda, fi_alphas, fi_trials, fi_horizon,
                         fi_warmup, fi_seed, fi_format, fi_out);
    }
    if (po->parsed()) {
      return cmd_pom(po_scenario, po_mo, po_n, po_lambda, po_ns, po_nl,
                     po_class_lambdas, po_class_means, po_confusion);
    }
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const UnstableError& e) {
    std::cerr << "unstable: " << e.what() << "\n";
    return 3;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
