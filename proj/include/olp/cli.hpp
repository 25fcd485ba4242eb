#pragma once

// Command-line front end: run / lab / replay / validate.
//
// Settings come from an optional flat key=value file (--config) and from
// flags with the same names; flags win. Exit codes: 0 success, 1 mismatch
// or validation failure, 2 usage error, 3 solver flags under --strict.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "olp/harness.hpp"
#include "olp/instance_io.hpp"
#include "olp/stats_lab.hpp"

#ifndef OLP_VERSION
#define OLP_VERSION "0.1.0"
#endif

namespace olp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { run, lab, replay, validate };
enum class OutputFormat { csv, json };

/// Every key accepted in a config file or as --key on the command line.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "input",     "policy",      "n",           "n-grid",       "seeds",     "figure",         "lab",
      "out",       "format",      "parallelism", "strict",       "alg3-epsilon", "alg1-train-mult", "tolerance",
      "m",         "capacity-fraction", "step-solve", "solver",   "trials",    "t",              "epsilon",
      "K",         "reference-size", "doublings", "manifest",      "instance",  "lab-seed"};
  return keys;
}

using Settings = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool is_known_key(const std::string& k) {
  for (const auto& x : known_keys())
    if (x == k) return true;
  return false;
}

/// Flat key=value; '#' starts a comment line.
inline Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  Settings s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (!is_known_key(key)) throw UsageError("unknown config key '" + key + "'");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_number(v);
  } catch (const std::exception&) {
    throw UsageError("invalid value for " + key + ": '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw UsageError("invalid value for " + key + ": '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("invalid value for " + key + ": '" + v + "'");
}

struct CliConfig {
  Command command = Command::run;
  Settings settings;  // merged file + flags
  std::optional<int> figure;
  std::vector<ExperimentPlan> plans;
  std::vector<std::string> plan_labels;
  std::optional<double> bound_coefficient;
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::csv;
  std::size_t parallelism = 1;
  bool strict = false;
};

inline std::size_t default_parallelism() { return std::max(1u, std::thread::hardware_concurrency()); }

/// `5` means seeds 1..5; a list `3,7,9` is taken as given.
inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  const auto items = split_list(v);
  if (items.empty()) throw UsageError("invalid value for seeds: '" + v + "'");
  std::vector<std::uint64_t> out;
  if (items.size() == 1 && v.find(',') == std::string::npos) {
    const std::uint64_t k = to_uint("seeds", items[0]);
    if (k == 0) throw UsageError("seeds must be >= 1");
    for (std::uint64_t s = 1; s <= k; ++s) out.push_back(s);
    return out;
  }
  for (const auto& s : items) out.push_back(to_uint("seeds", s));
  return out;
}

inline PolicyKind parse_policy(const std::string& name, const Settings& s) {
  auto get = [&](const char* k) -> std::optional<std::string> {
    const auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
  if (name == "alg1") {
    KnownDistribution p;
    if (auto v = get("alg1-train-mult")) p.train_multiplier = to_uint("alg1-train-mult", *v);
    return p;
  }
  if (name == "alg2") return DynamicLearning{};
  if (name == "alg3") {
    ConservativeLearning p;
    if (auto v = get("alg3-epsilon")) p.epsilon = to_double("alg3-epsilon", *v);
    return p;
  }
  if (name == "alg4") return ActionHistory{};
  if (name == "alg5") return TrendAdaptive{};
  throw UsageError("unknown policy '" + name + "'");
}

inline InputSpec parse_input(const std::string& v) {
  const auto id = static_cast<int>(to_uint("input", v));
  if (id < 1 || id > 5) throw UsageError("unknown input preset '" + v + "'");
  return input_preset(id);
}

inline const std::vector<std::size_t>& default_grid() {
  static const std::vector<std::size_t> g = {100, 300, 1000, 3000, 10000};
  return g;
}

struct FigurePreset {
  int id = 0;
  std::vector<int> inputs;
  std::vector<std::string> policies;
  std::optional<double> bound_coefficient;
  bool consumption = false;
};

/// Regret figures and their consumption companions share one preset.
inline FigurePreset figure_preset(int id) {
  FigurePreset f;
  f.id = id;
  if (id >= 1 && id <= 6) {
    static const double coef[] = {25.0, 4.0, 4.0};
    const int k = (id - 1) / 2;
    f.inputs = {k + 1};
    f.policies = {"alg2"};
    f.bound_coefficient = coef[k];
    f.consumption = true;
  } else if (id >= 7 && id <= 18) {
    const int block = (id - 7) / 6;  // 0: conservative, 1: action history
    const int k = ((id - 7) % 6) / 2;
    f.inputs = {k + 1};
    f.policies = {"alg2", block == 0 ? "alg3" : "alg4"};
    f.consumption = true;
  } else if (id == 20) {
    f.inputs = {4, 5};
    f.policies = {"alg4"};
  } else if (id == 21) {
    f.inputs = {4, 5};
    f.policies = {"alg4", "alg5"};
  } else if (id == 22 || id == 23) {
    f.inputs = {4, 5};
    f.policies = {"alg5"};
    f.consumption = true;
  } else {
    throw UsageError("unknown figure preset " + std::to_string(id));
  }
  return f;
}

/// Turns merged settings into run plans.
inline void build_plans(CliConfig& cfg) {
  const Settings& s = cfg.settings;
  auto get = [&](const char* k) -> std::optional<std::string> {
    const auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };

  std::vector<int> inputs;
  std::vector<std::string> policies;
  bool consumption = false;
  if (auto v = get("figure")) {
    const FigurePreset f = figure_preset(static_cast<int>(to_uint("figure", *v)));
    cfg.figure = f.id;
    inputs = f.inputs;
    policies = f.policies;
    cfg.bound_coefficient = f.bound_coefficient;
    consumption = f.consumption;
  }
  if (auto v = get("input")) {
    parse_input(*v);
    inputs = {static_cast<int>(to_uint("input", *v))};
  }
  if (auto v = get("policy")) policies = split_list(*v);
  if (inputs.empty()) inputs = {3};
  if (policies.empty()) policies = {"alg2"};

  std::vector<std::size_t> grid = default_grid();
  if (auto v = get("n-grid")) {
    grid.clear();
    for (const auto& x : split_list(*v)) grid.push_back(to_uint("n-grid", x));
  }
  if (auto v = get("n")) grid = {to_uint("n", *v)};
  if (grid.empty()) throw UsageError("empty horizon grid");
  const std::vector<std::uint64_t> seeds = parse_seeds(get("seeds").value_or("20"));

  PolicyConfig pc;
  if (auto v = get("tolerance")) {
    pc.solver.objective_tolerance = to_double("tolerance", *v);
    if (!(pc.solver.objective_tolerance > 0.0)) throw UsageError("tolerance must be > 0");
  }
  if (auto v = get("solver")) {
    try {
      pc.solver.method = solver_method_from_name(*v);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (auto v = get("step-solve")) {
    try {
      pc.step_solve = step_solve_from_name(*v);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  cfg.plans.clear();
  cfg.plan_labels.clear();
  for (int id : inputs) {
    ExperimentPlan plan;
    plan.input = parse_input(std::to_string(id));
    if (auto v = get("m")) plan.input.m = to_uint("m", *v);
    if (auto v = get("capacity-fraction")) plan.input.capacity_fraction = to_double("capacity-fraction", *v);
    for (const auto& p : policies) plan.policies.push_back(parse_policy(p, s));
    plan.horizon_grid = grid;
    plan.seeds = seeds;
    plan.config = pc;
    plan.parallelism = cfg.parallelism;
    plan.record_consumption = consumption;
    try {
      plan.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    cfg.plans.push_back(std::move(plan));
    cfg.plan_labels.push_back("input" + std::to_string(id));
  }
}

/// Parses argv (subcommand first). Throws UsageError or CLI::ParseError.
inline CliConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"online linear programming experiments", "olp"};
  app.require_subcommand(1);
  std::map<std::string, std::vector<std::string>> raw;
  std::string config_path;
  bool strict = false;
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"run", "lab", "replay", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key=value settings file");
    for (const auto& key : known_keys()) {
      if (key == "strict")
        sub->add_flag("--strict", strict, "exit 3 when any solve was flagged");
      else
        sub->add_option("--" + key, raw[key])->take_all();
    }
    subs[name] = sub;
  }
  app.parse(argc, argv);

  CliConfig cfg;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) {
      if (name == "run") cfg.command = Command::run;
      if (name == "lab") cfg.command = Command::lab;
      if (name == "replay") cfg.command = Command::replay;
      if (name == "validate") cfg.command = Command::validate;
    }
  if (!config_path.empty()) cfg.settings = read_config_file(config_path);
  for (const auto& [key, values] : raw) {
    if (values.empty()) continue;
    std::string joined;
    for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
    cfg.settings[key] = joined;
  }
  if (strict) cfg.settings["strict"] = "true";

  const Settings& s = cfg.settings;
  if (auto it = s.find("strict"); it != s.end()) cfg.strict = to_bool("strict", it->second);
  if (auto it = s.find("out"); it != s.end()) cfg.out_dir = it->second;
  if (auto it = s.find("format"); it != s.end()) {
    if (it->second == "csv")
      cfg.format = OutputFormat::csv;
    else if (it->second == "json")
      cfg.format = OutputFormat::json;
    else
      throw UsageError("unknown format '" + it->second + "'");
  }
  cfg.parallelism = default_parallelism();
  if (auto it = s.find("parallelism"); it != s.end()) {
    cfg.parallelism = to_uint("parallelism", it->second);
    if (cfg.parallelism < 1) throw UsageError("parallelism must be >= 1");
  }
  if (cfg.command == Command::run) build_plans(cfg);
  if (cfg.command == Command::lab && !s.count("lab")) throw UsageError("lab requires --lab concentration|convergence|lln");
  if (cfg.command == Command::replay && !s.count("manifest")) throw UsageError("replay requires --manifest");
  return cfg;
}

// ---------------------------------------------------------------------------
// Execution

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

struct RunOutcome {
  std::vector<std::string> files;
  std::size_t flagged = 0;
};

inline RunOutcome execute_plans(const std::vector<ExperimentPlan>& plans, const std::vector<std::string>& labels,
                                std::optional<double> bound, OutputFormat format, std::size_t parallelism,
                                const fs::path& dir) {
  fs::create_directories(dir);
  RunOutcome out;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    ExperimentPlan plan = plans[k];
    plan.parallelism = parallelism;
    const ExperimentResult res = run_experiment(plan);
    for (const auto& r : res.runs) out.flagged += r.solver_flags;
    const std::string& label = labels[k];
    std::ostringstream runs, summary;
    std::string ext = ".csv";
    if (format == OutputFormat::csv) {
      write_runs_csv(runs, res.runs, plan.input.m);
      write_summary_csv(summary, res.reports, bound);
    } else {
      ext = ".json";
      runs << runs_json(res.runs).dump(1) << '\n';
      summary << summary_json(res.reports, bound).dump(1) << '\n';
    }
    write_text(dir / ("runs_" + label + ext), runs.str());
    write_text(dir / ("summary_" + label + ext), summary.str());
    out.files.push_back("runs_" + label + ext);
    out.files.push_back("summary_" + label + ext);
    if (plan.record_consumption && format == OutputFormat::csv) {
      std::ostringstream cons;
      write_consumption_csv(cons, res.traces);
      write_text(dir / ("consumption_" + label + ".csv"), cons.str());
      out.files.push_back("consumption_" + label + ".csv");
    }
  }
  return out;
}

struct LabSettings {
  std::string kind;  // concentration | convergence | lln
  int input = 3;
  std::vector<std::size_t> n_grid = {1000, 10000, 100000};
  std::vector<std::uint64_t> seeds;
  std::size_t trials = 10000;
  std::size_t t = 500;
  std::vector<double> epsilons = {0.2};
  double K = 10.0;
  std::size_t reference_size = 1000000;
  std::size_t doublings = 6;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
};

inline json to_json(const LabSettings& l) {
  return {{"kind", l.kind},         {"input", l.input},       {"n_grid", l.n_grid},
          {"seeds", l.seeds},       {"trials", l.trials},     {"t", l.t},
          {"epsilons", l.epsilons}, {"K", l.K},               {"reference_size", l.reference_size},
          {"doublings", l.doublings}, {"seed", l.seed},       {"tolerance", l.tolerance}};
}

inline LabSettings lab_from_json(const json& j) {
  LabSettings l;
  l.kind = j.at("kind").get<std::string>();
  l.input = j.at("input").get<int>();
  l.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  l.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  l.trials = j.at("trials").get<std::size_t>();
  l.t = j.at("t").get<std::size_t>();
  l.epsilons = j.at("epsilons").get<std::vector<double>>();
  l.K = j.at("K").get<double>();
  l.reference_size = j.at("reference_size").get<std::size_t>();
  l.doublings = j.at("doublings").get<std::size_t>();
  l.seed = j.at("seed").get<std::uint64_t>();
  l.tolerance = j.at("tolerance").get<double>();
  return l;
}

inline LabSettings lab_settings(const Settings& s) {
  auto get = [&](const char* k) -> std::optional<std::string> {
    const auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
  LabSettings l;
  l.kind = s.at("lab");
  if (l.kind != "concentration" && l.kind != "convergence" && l.kind != "lln")
    throw UsageError("unknown lab '" + l.kind + "'");
  if (auto v = get("input")) {
    parse_input(*v);
    l.input = static_cast<int>(to_uint("input", *v));
  }
  if (l.kind == "convergence" && !is_stationary(static_cast<InputKind>(l.input)))
    throw UsageError("convergence lab needs input 1, 2 or 3");
  if (auto v = get("n-grid")) {
    l.n_grid.clear();
    for (const auto& x : split_list(*v)) l.n_grid.push_back(to_uint("n-grid", x));
  }
  if (auto v = get("n")) l.n_grid = {to_uint("n", *v)};
  l.seeds = parse_seeds(get("seeds").value_or("30"));
  if (auto v = get("trials")) l.trials = to_uint("trials", *v);
  if (auto v = get("t")) l.t = to_uint("t", *v);
  if (auto v = get("epsilon")) {
    l.epsilons.clear();
    for (const auto& x : split_list(*v)) l.epsilons.push_back(to_double("epsilon", x));
  }
  if (auto v = get("K")) l.K = to_double("K", *v);
  if (auto v = get("reference-size")) l.reference_size = to_uint("reference-size", *v);
  if (auto v = get("doublings")) l.doublings = to_uint("doublings", *v);
  if (auto v = get("lab-seed")) l.seed = to_uint("lab-seed", *v);
  if (auto v = get("tolerance")) l.tolerance = to_double("tolerance", *v);
  if (l.kind == "concentration" && l.trials < 100) throw UsageError("trials must be >= 100");
  return l;
}

inline RunOutcome execute_lab(const LabSettings& l, const fs::path& dir) {
  fs::create_directories(dir);
  RunOutcome out;
  std::ostringstream os;
  if (l.kind == "concentration") {
    const RegenSpec spec = example_regen_spec();
    os << "epsilon,t,T,M,lambda,K,delta,bound,p_hat,ci_halfwidth,ci_lower,convex,holds\n";
    for (double eps : l.epsilons) {
      ConcentrationCheck c;
      try {
        c = check_concentration(spec, eps, l.t, l.K, l.trials, l.seed);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      os << csv_number(eps) << ',' << l.t << ',' << csv_number(c.params.T) << ',' << csv_number(c.params.M) << ','
         << csv_number(c.params.lambda) << ',' << csv_number(c.params.K) << ',' << csv_number(c.choice.delta) << ','
         << csv_number(c.choice.bound) << ',' << csv_number(c.tail.p_hat) << ',' << csv_number(c.tail.ci_halfwidth)
         << ',' << csv_number(c.tail.lower) << ',' << (c.choice.convex ? 1 : 0) << ',' << (c.holds() ? 1 : 0) << '\n';
    }
  } else if (l.kind == "lln") {
    const RegenSpec spec = example_regen_spec();
    os << "t,median_error\n";
    for (const auto& row : lln_experiment(spec, l.t, l.doublings, std::max<std::size_t>(l.trials, 1), l.seed))
      os << row.t << ',' << csv_number(row.median_error) << '\n';
  } else {
    SolverConfig sc;
    sc.objective_tolerance = l.tolerance;
    const InputSpec spec = input_preset(l.input);
    const ReferenceDual ref = reference_dual(spec, l.reference_size, sc, l.seed);
    const ConvergenceTable tab = dual_convergence_experiment(spec, l.n_grid, l.seeds, sc, ref.price);
    os << "n,mean_sq_error,unconverged,slope\n";
    for (const auto& row : tab.rows) {
      os << row.n << ',' << csv_number(row.mean_sq_error) << ',' << row.unconverged << ','
         << (tab.slope ? csv_number(*tab.slope) : std::string("undefined")) << '\n';
      out.flagged += row.unconverged;
    }
    if (!ref.converged) ++out.flagged;
  }
  const std::string name = "lab_" + l.kind + ".csv";
  write_text(dir / name, os.str());
  out.files.push_back(name);
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const fs::path& dir, json body, const std::vector<std::string>& files) {
  body["tool"] = "olp";
  body["version"] = OLP_VERSION;
  body["created"] = utc_timestamp();  // not compared on replay
  body["outputs"] = files;
  write_text(dir / "manifest.json", body.dump(2) + "\n");
}

inline json run_manifest(const CliConfig& cfg) {
  json plans = json::array();
  for (std::size_t k = 0; k < cfg.plans.size(); ++k) {
    json p = to_json(cfg.plans[k]);
    p["label"] = cfg.plan_labels[k];
    plans.push_back(std::move(p));
  }
  json j = {{"command", "run"}, {"format", cfg.format == OutputFormat::csv ? "csv" : "json"}, {"plans", plans}};
  j["figure"] = cfg.figure ? json(*cfg.figure) : json(nullptr);
  j["bound_coefficient"] = cfg.bound_coefficient ? json(*cfg.bound_coefficient) : json(nullptr);
  return j;
}

/// First differing cell between two CSV (or any line-based) texts, empty when equal.
inline std::optional<std::string> first_difference(const std::string& name, const std::string& a, const std::string& b) {
  if (a == b) return std::nullopt;
  std::istringstream sa(a), sb(b);
  std::string la, lb, header;
  for (std::size_t line = 1;; ++line) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    if (line == 1 && ga) header = la;
    if (!ga && !gb) return name + ": contents differ in line endings";
    if (ga != gb) return name + ": line " + std::to_string(line) + " present in only one file";
    if (la == lb) continue;
    const auto ca = split_list(la), cb = split_list(lb), ch = split_list(header);
    for (std::size_t c = 0; c < std::max(ca.size(), cb.size()); ++c) {
      const std::string va = c < ca.size() ? ca[c] : "<missing>";
      const std::string vb = c < cb.size() ? cb[c] : "<missing>";
      if (va != vb) {
        const std::string col = c < ch.size() ? ch[c] : std::to_string(c + 1);
        return name + ": line " + std::to_string(line) + ", column " + col + ": expected '" + va + "', got '" + vb + "'";
      }
    }
    return name + ": line " + std::to_string(line) + " differs";
  }
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline int replay(const fs::path& manifest_path, std::size_t parallelism, std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const std::exception& e) {
    err << "olp: cannot load manifest: " << e.what() << '\n';
    return 2;
  }
  const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  const fs::path tmp = fs::temp_directory_path() /
                       ("olp-replay-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  RunOutcome redo;
  std::vector<std::string> expected;
  try {
    expected = m.at("outputs").get<std::vector<std::string>>();
    const std::string command = m.at("command").get<std::string>();
    if (command == "run") {
      if (!m.at("figure").is_null()) figure_preset(m.at("figure").get<int>());
      std::vector<ExperimentPlan> plans;
      std::vector<std::string> labels;
      for (const auto& p : m.at("plans")) {
        plans.push_back(plan_from_json(p));
        labels.push_back(p.at("label").get<std::string>());
      }
      std::optional<double> bound;
      if (!m.at("bound_coefficient").is_null()) bound = m.at("bound_coefficient").get<double>();
      const OutputFormat fmt = m.at("format").get<std::string>() == "json" ? OutputFormat::json : OutputFormat::csv;
      redo = execute_plans(plans, labels, bound, fmt, parallelism, tmp);
    } else if (command == "lab") {
      redo = execute_lab(lab_from_json(m.at("lab")), tmp);
    } else {
      throw UsageError("manifest has unknown command '" + command + "'");
    }
  } catch (const UsageError& e) {
    err << "olp: " << e.what() << '\n';
    fs::remove_all(tmp);
    return 2;
  } catch (const json::exception& e) {
    err << "olp: malformed manifest: " << e.what() << '\n';
    fs::remove_all(tmp);
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "olp: manifest rejected: " << e.what() << '\n';
    fs::remove_all(tmp);
    return 2;
  }
  int code = 0;
  if (redo.files != expected) {
    err << "olp: replay produced a different set of output files\n";
    code = 1;
  }
  for (const auto& f : expected) {
    if (code) break;
    std::string original;
    try {
      original = read_text(dir / f);
    } catch (const std::exception&) {
      err << "olp: " << f << " missing from " << dir.string() << '\n';
      code = 1;
      break;
    }
    if (auto d = first_difference(f, original, read_text(tmp / f))) {
      err << "olp: mismatch: " << *d << '\n';
      code = 1;
    }
  }
  fs::remove_all(tmp);
  if (code == 0) out << "replay: " << expected.size() << " files identical\n";
  return code;
}

inline int validate(const CliConfig& cfg, std::ostream& out) {
  const Settings& s = cfg.settings;
  std::vector<std::pair<std::string, Instance>> instances;
  if (auto it = s.find("instance"); it != s.end()) {
    instances.emplace_back(it->second, load_instance(it->second));
  } else {
    InputSpec spec = parse_input(s.count("input") ? s.at("input") : "3");
    if (s.count("m")) spec.m = to_uint("m", s.at("m"));
    if (s.count("capacity-fraction")) spec.capacity_fraction = to_double("capacity-fraction", s.at("capacity-fraction"));
    spec.horizon = s.count("n") ? to_uint("n", s.at("n")) : 1000;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (std::uint64_t seed : parse_seeds(s.count("seeds") ? s.at("seeds") : "1"))
      instances.emplace_back(spec.label() + " seed " + std::to_string(seed), gen_instance(spec, seed));
  }
  std::size_t total = 0;
  for (const auto& [name, inst] : instances) {
    const auto report = validate_instance(inst, generated_bounds(inst));
    out << name << ": " << (report.empty() ? "ok" : std::to_string(report.size()) + " violation(s)") << '\n';
    for (const auto& v : report) out << "  " << v.message << '\n';
    total += report.size();
  }
  return total == 0 ? 0 : 1;
}

/// Entry point shared by the binary and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << "usage: olp {run|lab|replay|validate} [--config file] [--key value ...]\nkeys:";
      for (const auto& k : known_keys()) out << " --" << k;
      out << '\n';
      return 0;
    }
    std::string what = e.what();
    what.erase(std::remove(what.begin(), what.end(), '\n'), what.end());
    err << "olp: " << what << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "olp: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "olp: " << e.what() << '\n';
    return 2;
  }

  try {
    switch (cfg.command) {
      case Command::run: {
        const RunOutcome r =
            execute_plans(cfg.plans, cfg.plan_labels, cfg.bound_coefficient, cfg.format, cfg.parallelism, cfg.out_dir);
        write_manifest(cfg.out_dir, run_manifest(cfg), r.files);
        out << "wrote " << r.files.size() << " files to " << cfg.out_dir << '\n';
        if (cfg.strict && r.flagged > 0) {
          err << "olp: " << r.flagged << " flagged solve(s)\n";
          return 3;
        }
        return 0;
      }
      case Command::lab: {
        const LabSettings l = lab_settings(cfg.settings);
        const RunOutcome r = execute_lab(l, cfg.out_dir);
        write_manifest(cfg.out_dir, {{"command", "lab"}, {"lab", to_json(l)}}, r.files);
        out << read_text(fs::path(cfg.out_dir) / r.files.front());
        if (cfg.strict && r.flagged > 0) {
          err << "olp: " << r.flagged << " flagged solve(s)\n";
          return 3;
        }
        return 0;
      }
      case Command::replay:
        return replay(cfg.settings.at("manifest"), cfg.parallelism, out, err);
      case Command::validate:
        return validate(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "olp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "olp: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace olp::cli
