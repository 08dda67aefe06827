#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "predq/errors.hpp"
#include "predq/experiment.hpp"
#include "predq/models.hpp"
#include "predq/quadrature.hpp"
#include "predq/simulator.hpp"

namespace predq {

// Minimal INI reader: [section] headers, key = value pairs, '#' or ';'
// comments, surrounding whitespace ignored. Unknown sections and keys are
// rejected by the typed builders below, naming the offender.
class IniFile {
 public:
  static IniFile parse(std::istream& in) {
    IniFile f;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": unterminated section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) {
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": empty section name");
        }
        f.sections_[section];
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      }
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": key outside any [section]");
      }
      f.sections_[section][key] = value;
    }
    return f;
  }

  static IniFile parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in);
  }

  bool has_section(const std::string& s) const {
    return sections_.count(s) > 0;
  }

  const std::map<std::string, std::string>& section(
      const std::string& s) const {
    static const std::map<std::string, std::string> empty;
    auto it = sections_.find(s);
    return it == sections_.end() ? empty : it->second;
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : sections_) out.push_back(k);
    return out;
  }

  // Rejects sections outside `allowed`, and per-section keys outside the
  // given key sets.
  void restrict(const std::map<std::string, std::set<std::string>>& allowed)
      const {
    for (const auto& [name, kv] : sections_) {
      auto it = allowed.find(name);
      if (it == allowed.end()) {
        throw ConfigError("unknown config section [" + name + "]");
      }
      for (const auto& [key, value] : kv) {
        if (!it->second.count(key)) {
          throw ConfigError("unknown key '" + key + "' in section [" + name +
                            "]");
        }
      }
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
};

namespace detail {

inline std::string ini_get(const IniFile& f, const std::string& sec,
                           const std::string& key, const std::string& dflt) {
  const auto& kv = f.section(sec);
  auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

inline double ini_double(const IniFile& f, const std::string& sec,
                         const std::string& key, double dflt) {
  const std::string v = ini_get(f, sec, key, "");
  if (v.empty()) return dflt;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "' in [" + sec +
                      "] is not a number: '" + v + "'");
  }
  return x;
}

inline std::int64_t ini_int(const IniFile& f, const std::string& sec,
                            const std::string& key, std::int64_t dflt) {
  const std::string v = ini_get(f, sec, key, "");
  if (v.empty()) return dflt;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "' in [" + sec +
                      "] is not an integer: '" + v + "'");
  }
  return x;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<double> ini_double_list(const IniFile& f,
                                           const std::string& sec,
                                           const std::string& key,
                                           const std::vector<double>& dflt) {
  const std::string v = ini_get(f, sec, key, "");
  if (v.empty()) return dflt;
  std::vector<double> out;
  for (const std::string& tok : split_list(v)) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw ConfigError("list key '" + key + "' in [" + sec +
                        "] has a non-numeric entry: '" + tok + "'");
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

// Allowed sections/keys for the toolkit's config files.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"model",
       {"kind", "base", "alpha", "s", "l", "frac_short", "p", "q"}},
      {"plan",
       {"policies", "lambdas", "trials", "horizon", "warmup", "seed"}},
      {"analytic", {"rel_tol", "abs_tol", "max_subdivisions"}},
      {"output", {"format", "path"}},
  };
  return schema;
}

inline ModelPtr model_from_ini(const IniFile& f) {
  f.restrict(config_schema());
  const std::string kind = detail::ini_get(f, "model", "kind", "exp_mean_x");
  if (kind == "exp_mean_x") return exp_mean_x_model();
  if (kind == "reversed") return reversed_exp_model();
  if (kind == "exact") {
    return exact_model(
        make_base_dist(detail::ini_get(f, "model", "base", "exponential")));
  }
  if (kind == "uniform") {
    const double alpha = detail::ini_double(f, "model", "alpha", 0.5);
    return uniform_alpha_model(
        make_base_dist(detail::ini_get(f, "model", "base", "exponential")),
        alpha);
  }
  if (kind == "two_type") {
    return two_type_model(detail::ini_double(f, "model", "s", 1.0),
                          detail::ini_double(f, "model", "l", 2.0),
                          detail::ini_double(f, "model", "frac_short", 0.5),
                          detail::ini_double(f, "model", "p", 0.0),
                          detail::ini_double(f, "model", "q", 0.0));
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

inline ExperimentPlan plan_from_ini(const IniFile& f, ModelPtr model) {
  f.restrict(config_schema());
  ExperimentPlan plan;
  plan.model = std::move(model);
  for (const std::string& p :
       detail::split_list(detail::ini_get(f, "plan", "policies", "FIFO"))) {
    plan.policies.push_back(parse_discipline(p));
  }
  plan.lambdas = detail::ini_double_list(f, "plan", "lambdas", {0.5});
  plan.trials = static_cast<int>(detail::ini_int(f, "plan", "trials", 50));
  plan.horizon = detail::ini_double(f, "plan", "horizon", 2e5);
  plan.warmup = detail::ini_double(f, "plan", "warmup", 2e4);
  plan.base_seed =
      static_cast<std::uint64_t>(detail::ini_int(f, "plan", "seed", 1));
  if (plan.trials < 1) throw ConfigError("plan trials must be >= 1");
  if (!(plan.horizon > 0.0)) throw ConfigError("plan horizon must be > 0");
  if (!(plan.warmup >= 0.0) || plan.warmup >= plan.horizon) {
    throw ConfigError("plan needs 0 <= warmup < horizon");
  }
  for (double l : plan.lambdas) {
    if (!(l >= 0.0)) throw ConfigError("plan lambdas must be >= 0");
  }
  return plan;
}

inline QuadratureSettings quad_from_ini(const IniFile& f) {
  f.restrict(config_schema());
  QuadratureSettings qs;
  qs.rel_tol = detail::ini_double(f, "analytic", "rel_tol", qs.rel_tol);
  qs.abs_tol = detail::ini_double(f, "analytic", "abs_tol", qs.abs_tol);
  qs.max_subdivisions = static_cast<int>(detail::ini_int(
      f, "analytic", "max_subdivisions", qs.max_subdivisions));
  if (!(qs.rel_tol > 0.0) || !(qs.abs_tol >= 0.0) ||
      qs.max_subdivisions < 1) {
    throw ConfigError("[analytic] tolerances must be positive");
  }
  return qs;
}

struct OutputConfig {
  std::string format = "markdown";  // markdown | csv
  std::string path = "-";           // "-" = stdout
};

inline OutputConfig output_from_ini(const IniFile& f) {
  f.restrict(config_schema());
  OutputConfig out;
  out.format = detail::ini_get(f, "output", "format", out.format);
  out.path = detail::ini_get(f, "output", "path", out.path);
  if (out.format != "markdown" && out.format != "csv") {
    throw ConfigError("[output] format must be markdown or csv");
  }
  return out;
}

}  // namespace predq
