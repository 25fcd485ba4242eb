#pragma once

// Online dual-based policies. Every policy accepts order t iff
// r_t > a_t'p_t and the order still fits in the leftover capacity; they
// differ in how the price p_t is learned:
//
//   alg1  fixed price from the (sampled) stochastic program
//   alg2  re-solve on the observed prefix at geometric times floor(delta^k)
//   alg3  alg2 with capacities shrunk by (1 - eps sqrt(n / t_k))
//   alg4  re-solve every step with leftover capacity spread over the rest
//   alg5  geometric schedule; fit a linear price trend, complete the future
//         orders and solve the remaining-horizon dual on leftover capacity

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "olp/core.hpp"
#include "olp/dual_solver.hpp"
#include "olp/inputs.hpp"

namespace olp {

enum class Decision { accept, reject_price, reject_capacity };

/// Accept iff r > a'p and a fits into the leftover capacity. Ties reject.
inline Decision dual_decision(OrderRef order, const DualPrice& p, std::span<const double> leftover) {
  if (p.size() != order.consumption.size() || leftover.size() != order.consumption.size())
    throw std::invalid_argument("dual_decision: dimension mismatch");
  if (!(order.reward > dot(order.consumption, p.values()))) return Decision::reject_price;
  for (std::size_t i = 0; i < leftover.size(); ++i)
    if (!(leftover[i] >= order.consumption[i])) return Decision::reject_capacity;
  return Decision::accept;
}

struct KnownDistribution {
  std::size_t train_multiplier = 10;
};
struct DynamicLearning {
  std::optional<double> delta_hint;
};
struct ConservativeLearning {
  double epsilon = 0.1;
  std::optional<double> delta_hint;
};
struct ActionHistory {};
struct TrendAdaptive {
  std::optional<double> delta_hint;
};

using PolicyKind = std::variant<KnownDistribution, DynamicLearning, ConservativeLearning, ActionHistory, TrendAdaptive>;

inline std::string policy_name(const PolicyKind& kind) {
  static const char* names[] = {"alg1", "alg2", "alg3", "alg4", "alg5"};
  return names[kind.index()];
}

inline void validate_policy(const PolicyKind& kind) {
  if (const auto* a1 = std::get_if<KnownDistribution>(&kind); a1 && a1->train_multiplier < 1)
    throw std::invalid_argument("alg1: train_multiplier must be >= 1");
  if (const auto* a3 = std::get_if<ConservativeLearning>(&kind); a3 && !(a3->epsilon >= 0.0 && a3->epsilon < 1.0))
    throw std::invalid_argument("alg3: epsilon must lie in [0, 1)");
}

/// How the action-history policy re-solves its dual at every step.
enum class StepSolve {
  localized,           // warm-started certified search in a ball around the previous price
  exact,               // full solve each step (epigraph simplex while t <= 2000)
  capped_subgradient,  // warm-started projected subgradient, fixed iteration cap
};

struct PolicyConfig {
  SolverConfig solver;
  StepSolve step_solve = StepSolve::localized;
  double step_tolerance = 1e-6;
  std::size_t step_iterations = 50;
  double depletion_threshold = 0.0;  // ā; 0 means the largest row norm of the instance
};

// ---------------------------------------------------------------------------

struct GeometricSchedule {
  double delta = 2.0;
  std::size_t levels = 1;                   // L
  std::vector<std::size_t> update_points;  // t_1 < ... < t_{L-1}
};

/// L = ceil(log2 n) (or ceil(log n / log hint)), delta = n^(1/L) nudged so
/// that floor(delta^L) = n exactly, t_k = floor(delta^k) for k < L.
inline GeometricSchedule geometric_schedule(std::size_t n, std::optional<double> delta_hint = std::nullopt) {
  if (n < 2) throw std::invalid_argument("geometric_schedule: n must be >= 2");
  const double nn = static_cast<double>(n);
  double base = 2.0;
  if (delta_hint) {
    if (!(*delta_hint > 1.0 && *delta_hint <= 2.0)) throw std::invalid_argument("delta hint must lie in (1, 2]");
    base = *delta_hint;
  }
  auto levels = static_cast<std::size_t>(std::ceil(std::log(nn) / std::log(base) - 1e-12));
  levels = std::max<std::size_t>(levels, 1);
  double delta = std::pow(nn, 1.0 / static_cast<double>(levels));
  const double L = static_cast<double>(levels);
  while (std::floor(std::pow(delta, L)) < nn) delta = std::nextafter(delta, 3.0);
  while (std::floor(std::pow(delta, L)) > nn) delta = std::nextafter(delta, 1.0);

  GeometricSchedule s;
  s.delta = delta;
  s.levels = levels;
  for (std::size_t k = 1; k < levels; ++k) {
    const auto t = static_cast<std::size_t>(std::floor(std::pow(delta, static_cast<double>(k))));
    if (t >= 1 && t < n && (s.update_points.empty() || t > s.update_points.back())) s.update_points.push_back(t);
  }
  return s;
}

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of price on time index.
inline TrendFit fit_trend(std::span<const double> prices, std::span<const double> t_indices) {
  if (prices.size() != t_indices.size()) throw std::invalid_argument("fit_trend: size mismatch");
  if (prices.size() < 2) throw std::invalid_argument("fit_trend: need at least two points");
  const double k = static_cast<double>(prices.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    mt += t_indices[i];
    my += prices[i];
  }
  mt /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    sxy += (t_indices[i] - mt) * (prices[i] - my);
    sxx += (t_indices[i] - mt) * (t_indices[i] - mt);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_trend: zero variance in time index");
  const double slope = sxy / sxx;
  return {slope, my - slope * mt};
}

namespace detail {

/// Bookkeeping shared by all policies: leftover capacity, decisions,
/// revenue curve, depletion time.
class OnlineRun {
 public:
  OnlineRun(const Instance& inst, double threshold) : inst_(inst), threshold_(threshold) {
    if (threshold_ <= 0.0) threshold_ = max_row_norm(inst.orders().view());
    res_.decisions.assign(inst.horizon(), 0);
    res_.leftover.assign(inst.capacities().begin(), inst.capacities().end());
    res_.revenue_curve.assign(inst.horizon(), 0.0);
    res_.depletion_time = inst.horizon();
  }

  // t is 1-based
  void step(std::size_t t, const DualPrice* price) {
    const OrderRef order = inst_.orders()[t - 1];
    if (price && dual_decision(order, *price, res_.leftover) == Decision::accept) {
      res_.decisions[t - 1] = 1;
      res_.revenue += order.reward;
      for (std::size_t i = 0; i < res_.leftover.size(); ++i) res_.leftover[i] -= order.consumption[i];
    }
    res_.revenue_curve[t - 1] = res_.revenue;
    if (!depleted_) {
      for (double b : res_.leftover)
        if (b < threshold_) {
          depleted_ = true;
          res_.depletion_time = t;
          break;
        }
    }
  }

  void record(std::size_t step, const DualPrice& p) { res_.dual_trajectory.push_back({step, p}); }
  void count_solve(bool converged) {
    ++res_.solves;
    if (!converged) ++res_.unconverged_solves;
  }

  std::span<const double> leftover() const { return res_.leftover; }
  RunResult take() { return std::move(res_); }

 private:
  const Instance& inst_;
  double threshold_;
  bool depleted_ = false;
  RunResult res_;
};

inline RunResult run_geometric(const Instance& inst, const PolicyConfig& cfg, std::optional<double> delta_hint,
                               double epsilon) {
  const std::size_t n = inst.horizon(), m = inst.resources();
  const GeometricSchedule sched = geometric_schedule(n, delta_hint);
  const OrderView orders = inst.orders().view();
  const auto d = inst.per_period_capacity();
  OnlineRun run(inst, cfg.depletion_threshold);
  std::optional<DualPrice> price;
  std::size_t next = 0;
  std::vector<double> dk(m);
  for (std::size_t t = 1; t <= n; ++t) {
    if (next < sched.update_points.size() && t == sched.update_points[next] + 1) {
      const std::size_t tk = sched.update_points[next++];
      const double shrink = std::max(0.0, 1.0 - epsilon * std::sqrt(static_cast<double>(n) / static_cast<double>(tk)));
      for (std::size_t i = 0; i < m; ++i) dk[i] = d[i] * shrink;
      const DualSolution s = solve_dual(normalized_dual(dk, orders.prefix(tk)), cfg.solver);
      run.count_solve(s.converged);
      price = s.price;
      run.record(tk, *price);
    }
    run.step(t, price ? &*price : nullptr);
  }
  return run.take();
}

}  // namespace detail

/// Fixed price from a sample-average approximation of the stochastic
/// program, trained on an independent stream of train_multiplier * n orders.
inline RunResult run_alg1(const Instance& inst, const InputSpec& spec, const PolicyConfig& cfg, std::uint64_t seed,
                          const KnownDistribution& params = {}) {
  if (!is_stationary(spec.kind)) throw std::invalid_argument("alg1: requires a stationary input");
  if (params.train_multiplier < 1) throw std::invalid_argument("alg1: train_multiplier must be >= 1");
  constexpr std::uint64_t kTrainingSalt = 0x5EED7A11ULL;
  InputSpec train = spec;
  train.m = inst.resources();
  train.horizon = params.train_multiplier * inst.horizon();
  const Instance sample = gen_instance(train, seed ^ kTrainingSalt);
  const DualSolution s = solve_dual(normalized_dual(inst.per_period_capacity(), sample.orders().view()), cfg.solver);

  detail::OnlineRun run(inst, cfg.depletion_threshold);
  run.count_solve(s.converged);
  run.record(0, s.price);
  for (std::size_t t = 1; t <= inst.horizon(); ++t) run.step(t, &s.price);
  return run.take();
}

inline RunResult run_alg2(const Instance& inst, const PolicyConfig& cfg, const DynamicLearning& params = {}) {
  return detail::run_geometric(inst, cfg, params.delta_hint, 0.0);
}

inline RunResult run_alg3(const Instance& inst, const PolicyConfig& cfg, const ConservativeLearning& params = {}) {
  if (!(params.epsilon >= 0.0 && params.epsilon < 1.0)) throw std::invalid_argument("alg3: epsilon must lie in [0, 1)");
  return detail::run_geometric(inst, cfg, params.delta_hint, params.epsilon);
}

inline RunResult run_alg4(const Instance& inst, const PolicyConfig& cfg) {
  const std::size_t n = inst.horizon(), m = inst.resources();
  if (n < 2) throw std::invalid_argument("alg4: n must be >= 2");
  const OrderView orders = inst.orders().view();
  detail::OnlineRun run(inst, cfg.depletion_threshold);
  DualPrice price = DualPrice::zero(m);
  run.record(0, price);
  std::vector<double> dt(m);
  double last_move = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    run.step(t, &price);
    if (t == n) break;
    const auto left = run.leftover();
    for (std::size_t i = 0; i < m; ++i) dt[i] = left[i] / static_cast<double>(n - t);
    const DualProblem prob = normalized_dual(dt, orders.prefix(t));

    SolverConfig sc = cfg.solver;
    switch (cfg.step_solve) {
      case StepSolve::localized:
        sc.method = SolverMethod::ellipsoid;
        sc.objective_tolerance = cfg.step_tolerance;
        sc.warm_start = price;
        sc.local_radius = 1e-3 * (1.0 + norm2(price.values()));
        break;
      case StepSolve::exact:
        sc.method = t <= 2000 ? SolverMethod::epigraph_simplex : SolverMethod::ellipsoid;
        sc.warm_start.reset();
        sc.local_radius = 0.0;
        break;
      case StepSolve::capped_subgradient:
        sc.method = SolverMethod::projected_subgradient;
        sc.warm_start = price;
        if (t > 1) {
          sc.max_iterations = cfg.step_iterations;
          sc.local_radius = std::max(4.0 * last_move, 1e-3 * (1.0 + price.sum()));
        }
        break;
    }
    const DualSolution s = solve_dual(prob, sc);
    run.count_solve(s.converged);
    last_move = std::sqrt(squared_distance(s.price, price));
    price = s.price;
    run.record(t, price);
  }
  return run.take();
}

inline RunResult run_alg5(const Instance& inst, const PolicyConfig& cfg, const TrendAdaptive& params = {}) {
  const std::size_t n = inst.horizon(), m = inst.resources();
  const GeometricSchedule sched = geometric_schedule(n, params.delta_hint);
  const OrderView orders = inst.orders().view();
  detail::OnlineRun run(inst, cfg.depletion_threshold);
  std::optional<DualPrice> price;
  std::size_t next = 0;
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = static_cast<double>(i + 1);
  std::vector<double> abar(m);
  for (std::size_t t = 1; t <= n; ++t) {
    if (next < sched.update_points.size() && t == sched.update_points[next] + 1) {
      const std::size_t tk = sched.update_points[next++];
      std::optional<TrendFit> fit;
      try {
        fit = fit_trend(orders.rewards().first(tk), std::span<const double>(times).first(tk));
      } catch (const std::invalid_argument&) {
        fit.reset();
      }
      if (!fit) {
        price = DualPrice::zero(m);
      } else {
        std::fill(abar.begin(), abar.end(), 0.0);
        for (std::size_t j = 0; j < tk; ++j) {
          const auto a = orders.row(j);
          for (std::size_t i = 0; i < m; ++i) abar[i] += a[i];
        }
        for (double& v : abar) v /= static_cast<double>(tk);
        // observed order t_k followed by the completed orders t_k+1..n
        OrderTable completed(m);
        completed.reserve(n - tk + 1);
        completed.push_back(orders.reward(tk - 1), orders.row(tk - 1));
        for (std::size_t i = tk + 1; i <= n; ++i)
          completed.push_back(fit->slope * static_cast<double>(i) + fit->intercept, abar);
        const std::vector<double> left(run.leftover().begin(), run.leftover().end());
        const DualProblem prob{left, completed.view(), 1.0};
        const DualSolution s = solve_dual(prob, cfg.solver);
        run.count_solve(s.converged);
        price = s.price;
      }
      run.record(tk, *price);
    }
    run.step(t, price ? &*price : nullptr);
  }
  return run.take();
}

/// Dispatches on the policy kind. `spec` and `seed` are used only by alg1.
inline RunResult run_policy(const PolicyKind& kind, const Instance& inst, const InputSpec& spec,
                            const PolicyConfig& cfg, std::uint64_t seed) {
  validate_policy(kind);
  return std::visit(
      [&](const auto& p) -> RunResult {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnownDistribution>)
          return run_alg1(inst, spec, cfg, seed, p);
        else if constexpr (std::is_same_v<T, DynamicLearning>)
          return run_alg2(inst, cfg, p);
        else if constexpr (std::is_same_v<T, ConservativeLearning>)
          return run_alg3(inst, cfg, p);
        else if constexpr (std::is_same_v<T, ActionHistory>)
          return run_alg4(inst, cfg);
        else
          return run_alg5(inst, cfg, p);
      },
      kind);
}

}  // namespace olp
