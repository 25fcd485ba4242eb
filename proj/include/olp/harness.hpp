#pragma once

// Monte-Carlo regret experiments over (horizon, seed) cells, the three-part
// regret decomposition, consumption traces, and CSV / JSON emitters.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "olp/core.hpp"
#include "olp/dual_solver.hpp"
#include "olp/inputs.hpp"
#include "olp/instance_io.hpp"
#include "olp/policies.hpp"

namespace olp {

struct ExperimentPlan {
  InputSpec input;
  std::vector<PolicyKind> policies;
  std::vector<std::size_t> horizon_grid;
  std::vector<std::uint64_t> seeds;
  PolicyConfig config;
  double binding_threshold = 1e-4;
  std::size_t parallelism = 1;
  bool record_consumption = false;  // keep traces for (largest n, first seed)

  void validate() const {
    if (policies.empty()) throw std::invalid_argument("plan: no policies");
    if (horizon_grid.empty()) throw std::invalid_argument("plan: empty horizon grid");
    if (seeds.empty()) throw std::invalid_argument("plan: no seeds");
    if (parallelism < 1) throw std::invalid_argument("plan: parallelism must be >= 1");
    for (std::size_t n : horizon_grid)
      if (n <= input.m || n < 2) throw std::invalid_argument("plan: horizons must exceed m");
    for (const auto& p : policies) {
      validate_policy(p);
      if (std::holds_alternative<KnownDistribution>(p) && !is_stationary(input.kind))
        throw std::invalid_argument("plan: alg1 needs a stationary input");
    }
    InputSpec probe = input;
    probe.horizon = horizon_grid.front();
    probe.validate();
  }
};

struct RunRecord {
  std::string policy;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double offline = 0.0;
  double online = 0.0;
  double regret = 0.0;
  std::size_t depletion_time = 0;
  std::vector<double> leftover;
  std::size_t solver_flags = 0;  // unconverged policy solves, plus one if the offline solve was flagged
  double binding_leftover = 0.0;
};

struct ConsumptionTrace {
  std::string policy;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::vector<double> fractions;  // row-major n x m
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // ordered by (n, seed, policy)
  std::vector<RegretReport> reports;
  std::vector<ConsumptionTrace> traces;
};

struct DecompositionReport {
  double dual_error_sum = 0.0;
  double exit_gap = 0.0;
  double binding_leftover = 0.0;
  DualPrice reference_p_star;

  double total() const { return dual_error_sum + exit_gap + binding_leftover; }
};

inline std::vector<std::size_t> binding_set(const DualPrice& reference, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (reference[i] > threshold) out.push_back(i);
  return out;
}

/// Steps before the first recorded price (the all-reject warm-up of the
/// geometric policies) carry no price and add nothing to dual_error_sum.
inline DecompositionReport decompose_regret(const RunResult& result, const Instance& inst, const DualPrice& reference,
                                            double binding_threshold = 1e-4) {
  if (reference.size() != inst.resources()) throw std::invalid_argument("decompose: reference has wrong dimension");
  DecompositionReport rep;
  rep.reference_p_star = reference;
  const std::size_t n = inst.horizon();
  const std::size_t tau = std::min(result.depletion_time, n);
  const auto& traj = result.dual_trajectory;
  std::size_t k = 0;
  const DualPrice* current = nullptr;
  double err = 0.0;
  for (std::size_t t = 1; t <= tau; ++t) {
    while (k < traj.size() && traj[k].step < t) {
      current = &traj[k].price;
      err = squared_distance(*current, reference);
      ++k;
    }
    if (current) rep.dual_error_sum += err;
  }
  rep.exit_gap = static_cast<double>(n - tau);
  for (std::size_t i : binding_set(reference, binding_threshold)) rep.binding_leftover += result.leftover[i];
  return rep;
}

/// Leftover after each step divided by initial capacity (1 where b_i = 0).
inline ConsumptionTrace consumption_trace(const RunResult& result, const Instance& inst) {
  const std::size_t n = inst.horizon(), m = inst.resources();
  if (result.decisions.size() != n) throw std::invalid_argument("consumption_trace: decision vector length differs from n");
  ConsumptionTrace tr;
  tr.n = n;
  tr.m = m;
  tr.fractions.resize(n * m);
  const auto b = inst.capacities();
  std::vector<double> left(b.begin(), b.end());
  for (std::size_t t = 0; t < n; ++t) {
    if (result.decisions[t]) {
      const auto a = inst.orders()[t].consumption;
      for (std::size_t i = 0; i < m; ++i) left[i] -= a[i];
    }
    for (std::size_t i = 0; i < m; ++i) tr.fractions[t * m + i] = b[i] > 0.0 ? left[i] / b[i] : 1.0;
  }
  return tr;
}

// ---------------------------------------------------------------------------

namespace detail {

struct CellOutput {
  std::vector<RunRecord> records;
  std::vector<ConsumptionTrace> traces;
};

inline CellOutput run_cell(const ExperimentPlan& plan, std::size_t n, std::uint64_t seed, bool keep_trace) {
  InputSpec spec = plan.input;
  spec.horizon = n;
  const Instance inst = gen_instance(spec, seed);
  const OfflineValue off = offline_optimum(inst, plan.config.solver);
  const auto binding = binding_set(off.price, plan.binding_threshold);
  CellOutput out;
  for (const auto& kind : plan.policies) {
    const RunResult r = run_policy(kind, inst, spec, plan.config, seed);
    RunRecord rec;
    rec.policy = policy_name(kind);
    rec.n = n;
    rec.seed = seed;
    rec.offline = off.value;
    rec.online = r.revenue;
    rec.regret = off.value - r.revenue;
    rec.depletion_time = r.depletion_time;
    rec.leftover = r.leftover;
    rec.solver_flags = r.unconverged_solves + (off.converged ? 0 : 1);
    for (std::size_t i : binding) rec.binding_leftover += r.leftover[i];
    out.records.push_back(std::move(rec));
    if (keep_trace) {
      ConsumptionTrace tr = consumption_trace(r, inst);
      tr.policy = policy_name(kind);
      tr.seed = seed;
      out.traces.push_back(std::move(tr));
    }
  }
  return out;
}

/// Runs f(0..count-1) on `workers` threads; results land by index.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& f) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Aggregates run records into one report per policy, in plan order.
inline std::vector<RegretReport> aggregate(const ExperimentPlan& plan, const std::vector<RunRecord>& runs) {
  std::vector<RegretReport> reports;
  for (const auto& kind : plan.policies) {
    RegretReport rep;
    rep.policy = policy_name(kind);
    rep.seeds_used = plan.seeds.size();
    for (std::size_t n : plan.horizon_grid) {
      std::vector<double> regrets;
      double gap = 0.0, bind = 0.0;
      std::size_t flags = 0;
      for (const auto& r : runs) {
        if (r.policy != rep.policy || r.n != n) continue;
        regrets.push_back(r.regret);
        gap += static_cast<double>(r.n - r.depletion_time);
        bind += r.binding_leftover;
        flags += r.solver_flags;
      }
      const double k = static_cast<double>(regrets.size());
      double mean = 0.0;
      for (double x : regrets) mean += x;
      mean /= k;
      rep.horizon_grid.push_back(n);
      rep.mean_regret.push_back(mean);
      rep.regret_std.push_back(detail::sample_std(regrets, mean));
      rep.mean_depletion_gap.push_back(gap / k);
      rep.mean_leftover_binding.push_back(bind / k);
      rep.solver_flags.push_back(flags);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

/// Every (horizon, seed) cell runs independently; the output order is fixed
/// by (horizon, seed, policy) whatever the parallelism.
inline ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const std::size_t cells = plan.horizon_grid.size() * plan.seeds.size();
  const std::size_t trace_n = *std::max_element(plan.horizon_grid.begin(), plan.horizon_grid.end());
  std::vector<detail::CellOutput> outputs(cells);
  detail::parallel_for(cells, plan.parallelism, [&](std::size_t c) {
    const std::size_t n = plan.horizon_grid[c / plan.seeds.size()];
    const std::size_t s = c % plan.seeds.size();
    const bool keep = plan.record_consumption && n == trace_n && s == 0;
    outputs[c] = detail::run_cell(plan, n, plan.seeds[s], keep);
  });
  ExperimentResult res;
  for (auto& o : outputs) {
    for (auto& r : o.records) res.runs.push_back(std::move(r));
    for (auto& t : o.traces)
      if (res.traces.size() < plan.policies.size()) res.traces.push_back(std::move(t));
  }
  res.reports = aggregate(plan, res.runs);
  return res;
}

// ---------------------------------------------------------------------------
// Output

inline std::string csv_number(double v) { return format_number(v + 0.0); }

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs, std::size_t m) {
  os << "policy,n,seed,offline,online,regret,depletion_time";
  for (std::size_t i = 1; i <= m; ++i) os << ",leftover_" << i;
  os << ",solver_flags\n";
  for (const auto& r : runs) {
    os << r.policy << ',' << r.n << ',' << r.seed << ',' << csv_number(r.offline) << ',' << csv_number(r.online) << ','
       << csv_number(r.regret) << ',' << r.depletion_time;
    for (double b : r.leftover) os << ',' << csv_number(b);
    os << ',' << r.solver_flags << '\n';
  }
}

/// With a coefficient c, a trailing `bound` column holds c * sqrt(n).
inline void write_summary_csv(std::ostream& os, const std::vector<RegretReport>& reports,
                              std::optional<double> bound_coefficient = std::nullopt) {
  os << "policy,n,mean_regret,std_regret,mean_exit_gap,mean_binding_leftover";
  if (bound_coefficient) os << ",bound";
  os << '\n';
  for (const auto& rep : reports)
    for (std::size_t g = 0; g < rep.horizon_grid.size(); ++g) {
      os << rep.policy << ',' << rep.horizon_grid[g] << ',' << csv_number(rep.mean_regret[g]) << ','
         << csv_number(rep.regret_std[g]) << ',' << csv_number(rep.mean_depletion_gap[g]) << ','
         << csv_number(rep.mean_leftover_binding[g]);
      if (bound_coefficient)
        os << ',' << csv_number(*bound_coefficient * std::sqrt(static_cast<double>(rep.horizon_grid[g])));
      os << '\n';
    }
}

inline void write_consumption_csv(std::ostream& os, const std::vector<ConsumptionTrace>& traces) {
  const std::size_t m = traces.empty() ? 0 : traces.front().m;
  os << "policy,n,seed,t";
  for (std::size_t i = 1; i <= m; ++i) os << ",fraction_" << i;
  os << '\n';
  for (const auto& tr : traces)
    for (std::size_t t = 0; t < tr.n; ++t) {
      os << tr.policy << ',' << tr.n << ',' << tr.seed << ',' << t + 1;
      for (std::size_t i = 0; i < tr.m; ++i) os << ',' << csv_number(tr.fractions[t * tr.m + i]);
      os << '\n';
    }
}

inline nlohmann::json runs_json(const std::vector<RunRecord>& runs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : runs)
    out.push_back({{"policy", r.policy},
                   {"n", r.n},
                   {"seed", r.seed},
                   {"offline", r.offline},
                   {"online", r.online},
                   {"regret", r.regret},
                   {"depletion_time", r.depletion_time},
                   {"leftover", r.leftover},
                   {"solver_flags", r.solver_flags}});
  return out;
}

inline nlohmann::json summary_json(const std::vector<RegretReport>& reports,
                                   std::optional<double> bound_coefficient = std::nullopt) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rep : reports)
    for (std::size_t g = 0; g < rep.horizon_grid.size(); ++g) {
      nlohmann::json row = {{"policy", rep.policy},
                            {"n", rep.horizon_grid[g]},
                            {"mean_regret", rep.mean_regret[g]},
                            {"std_regret", rep.regret_std[g]},
                            {"mean_exit_gap", rep.mean_depletion_gap[g]},
                            {"mean_binding_leftover", rep.mean_leftover_binding[g]}};
      if (bound_coefficient) row["bound"] = *bound_coefficient * std::sqrt(static_cast<double>(rep.horizon_grid[g]));
      out.push_back(std::move(row));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Plan <-> JSON, for manifests.

inline nlohmann::json to_json(const PolicyKind& kind) {
  nlohmann::json j = {{"name", policy_name(kind)}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnownDistribution>) j["train_multiplier"] = p.train_multiplier;
        if constexpr (std::is_same_v<T, ConservativeLearning>) j["epsilon"] = p.epsilon;
        if constexpr (!std::is_same_v<T, KnownDistribution> && !std::is_same_v<T, ActionHistory>)
          if (p.delta_hint) j["delta_hint"] = *p.delta_hint;
      },
      kind);
  return j;
}

inline PolicyKind policy_from_json(const nlohmann::json& j) {
  const std::string name = j.at("name").get<std::string>();
  std::optional<double> hint;
  if (j.contains("delta_hint")) hint = j.at("delta_hint").get<double>();
  if (name == "alg1") return KnownDistribution{j.value("train_multiplier", std::size_t{10})};
  if (name == "alg2") return DynamicLearning{hint};
  if (name == "alg3") return ConservativeLearning{j.value("epsilon", 0.1), hint};
  if (name == "alg4") return ActionHistory{};
  if (name == "alg5") return TrendAdaptive{hint};
  throw std::invalid_argument("unknown policy '" + name + "'");
}

inline nlohmann::json to_json(const InputSpec& s) {
  nlohmann::json j = {{"kind", static_cast<int>(s.kind)},
                      {"m", s.m},
                      {"capacity_fraction", s.capacity_fraction},
                      {"consumption", s.consumption == ConsumptionDist::abs_normal ? "abs_normal" : "uniform"},
                      {"consumption_a", s.consumption_a},
                      {"consumption_b", s.consumption_b},
                      {"price_lo", s.price_lo},
                      {"price_hi", s.price_hi},
                      {"trend_start", s.trend_start},
                      {"trend_slope", s.trend_slope},
                      {"trend_noise", s.trend_noise}};
  if (s.walk)
    j["walk"] = {{"lower", s.walk->lower},
                 {"upper", s.walk->upper},
                 {"start", s.walk->start},
                 {"increment", s.walk->increment == IncrementDist::rademacher ? "rademacher" : "uniform"},
                 {"increment_lo", s.walk->increment_lo},
                 {"increment_hi", s.walk->increment_hi}};
  return j;
}

inline InputSpec input_from_json(const nlohmann::json& j) {
  const int kind = j.at("kind").get<int>();
  InputSpec s = input_preset(kind);
  s.m = j.at("m").get<std::size_t>();
  s.capacity_fraction = j.at("capacity_fraction").get<double>();
  s.consumption = j.at("consumption").get<std::string>() == "uniform" ? ConsumptionDist::uniform : ConsumptionDist::abs_normal;
  s.consumption_a = j.at("consumption_a").get<double>();
  s.consumption_b = j.at("consumption_b").get<double>();
  s.price_lo = j.at("price_lo").get<double>();
  s.price_hi = j.at("price_hi").get<double>();
  s.trend_start = j.at("trend_start").get<double>();
  s.trend_slope = j.at("trend_slope").get<double>();
  s.trend_noise = j.at("trend_noise").get<double>();
  s.walk.reset();
  if (j.contains("walk")) {
    const auto& w = j.at("walk");
    BoundedWalkSpec b;
    b.lower = w.at("lower").get<double>();
    b.upper = w.at("upper").get<double>();
    b.start = w.at("start").get<double>();
    b.increment = w.at("increment").get<std::string>() == "uniform" ? IncrementDist::uniform : IncrementDist::rademacher;
    b.increment_lo = w.at("increment_lo").get<double>();
    b.increment_hi = w.at("increment_hi").get<double>();
    s.walk = b;
  }
  return s;
}

inline const char* step_solve_name(StepSolve s) {
  switch (s) {
    case StepSolve::exact:
      return "exact";
    case StepSolve::capped_subgradient:
      return "capped_subgradient";
    default:
      return "localized";
  }
}

inline StepSolve step_solve_from_name(const std::string& s) {
  if (s == "localized") return StepSolve::localized;
  if (s == "exact") return StepSolve::exact;
  if (s == "capped_subgradient") return StepSolve::capped_subgradient;
  throw std::invalid_argument("unknown step solve mode '" + s + "'");
}

inline const char* solver_method_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::projected_subgradient:
      return "projected_subgradient";
    case SolverMethod::epigraph_simplex:
      return "epigraph_simplex";
    default:
      return "ellipsoid";
  }
}

inline SolverMethod solver_method_from_name(const std::string& s) {
  if (s == "ellipsoid") return SolverMethod::ellipsoid;
  if (s == "projected_subgradient" || s == "subgradient") return SolverMethod::projected_subgradient;
  if (s == "epigraph_simplex" || s == "simplex") return SolverMethod::epigraph_simplex;
  throw std::invalid_argument("unknown solver method '" + s + "'");
}

inline nlohmann::json to_json(const ExperimentPlan& p) {
  nlohmann::json pols = nlohmann::json::array();
  for (const auto& k : p.policies) pols.push_back(to_json(k));
  return {{"input", to_json(p.input)},
          {"policies", pols},
          {"horizon_grid", p.horizon_grid},
          {"seeds", p.seeds},
          {"solver",
           {{"method", solver_method_name(p.config.solver.method)},
            {"objective_tolerance", p.config.solver.objective_tolerance},
            {"max_iterations", p.config.solver.max_iterations},
            {"capacity_floor", p.config.solver.capacity_floor}}},
          {"step_solve", step_solve_name(p.config.step_solve)},
          {"step_tolerance", p.config.step_tolerance},
          {"step_iterations", p.config.step_iterations},
          {"depletion_threshold", p.config.depletion_threshold},
          {"binding_threshold", p.binding_threshold},
          {"record_consumption", p.record_consumption}};
}

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  p.input = input_from_json(j.at("input"));
  for (const auto& k : j.at("policies")) p.policies.push_back(policy_from_json(k));
  p.horizon_grid = j.at("horizon_grid").get<std::vector<std::size_t>>();
  p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  const auto& s = j.at("solver");
  p.config.solver.method = solver_method_from_name(s.at("method").get<std::string>());
  p.config.solver.objective_tolerance = s.at("objective_tolerance").get<double>();
  p.config.solver.max_iterations = s.at("max_iterations").get<std::size_t>();
  p.config.solver.capacity_floor = s.at("capacity_floor").get<double>();
  p.config.step_solve = step_solve_from_name(j.at("step_solve").get<std::string>());
  p.config.step_tolerance = j.at("step_tolerance").get<double>();
  p.config.step_iterations = j.at("step_iterations").get<std::size_t>();
  p.config.depletion_threshold = j.at("depletion_threshold").get<double>();
  p.binding_threshold = j.at("binding_threshold").get<double>();
  p.record_consumption = j.at("record_consumption").get<bool>();
  return p;
}

}  // namespace olp
