#pragma once

// Seeded generators for the stochastic inputs:
//
//   I    quantity dependent price  r_t = sum_i a_ti R_i(t), m hidden bounded walks
//   II   quantity independent price r_t = R(t), one bounded walk
//   III  i.i.d. price               r_t ~ Uniform(1, 5)
//   IV   weighted walk              r_t = r_{t-1} + 0.2 + Uniform(-0.2, 0.2)
//   V    linear trend               r_t = 1 + 0.2 t + Uniform(-0.2, 0.2)
//
// Inputs I-III draw a_ti ~ |Normal(0.5, 1)|, inputs IV-V a_ti ~ Uniform(0.6, 1.4).
// Also a generic finite-table regenerative process used by the
// concentration experiments.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "olp/core.hpp"
#include "olp/rng.hpp"

namespace olp {

enum class IncrementDist { rademacher, uniform };

struct BoundedWalkSpec {
  double lower = 1.0;
  double upper = 5.0;
  double start = 1.0;
  IncrementDist increment = IncrementDist::rademacher;
  double increment_lo = -1.0;  // uniform increments only
  double increment_hi = 1.0;

  void validate() const {
    if (!(lower < upper)) throw std::invalid_argument("walk: lower must be < upper");
    if (!(lower <= start && start <= upper)) throw std::invalid_argument("walk: start outside [lower, upper]");
    if (increment == IncrementDist::uniform && !(increment_lo <= increment_hi))
      throw std::invalid_argument("walk: increment_lo > increment_hi");
  }
};

enum class InputKind {
  input1_quantity_dependent = 1,
  input2_regenerative_price = 2,
  input3_iid_price = 3,
  input4_weighted_walk = 4,
  input5_linear_trend = 5,
};

enum class ConsumptionDist { abs_normal, uniform };

inline bool is_stationary(InputKind k) {
  return k == InputKind::input1_quantity_dependent || k == InputKind::input2_regenerative_price ||
         k == InputKind::input3_iid_price;
}

struct InputSpec {
  InputKind kind = InputKind::input3_iid_price;
  std::size_t m = 5;
  std::size_t horizon = 1000;
  double capacity_fraction = 0.25;
  std::optional<BoundedWalkSpec> walk;
  ConsumptionDist consumption = ConsumptionDist::abs_normal;
  double consumption_a = 0.5;  // abs_normal: mean; uniform: lower end
  double consumption_b = 1.0;  // abs_normal: sd;   uniform: upper end
  double price_lo = 1.0;       // input III
  double price_hi = 5.0;
  double trend_start = 1.0;  // input IV r_0, input V intercept
  double trend_slope = 0.2;
  double trend_noise = 0.2;  // half-width of the uniform noise

  void validate() const {
    if (m < 1) throw std::invalid_argument("input: m must be >= 1");
    if (horizon <= m) throw std::invalid_argument("input: horizon must exceed m");
    if (!(capacity_fraction > 0.0 && capacity_fraction < 1.0))
      throw std::invalid_argument("input: capacity_fraction must lie in (0, 1)");
    const bool needs_walk =
        kind == InputKind::input1_quantity_dependent || kind == InputKind::input2_regenerative_price;
    if (needs_walk && !walk) throw std::invalid_argument("input: inputs 1 and 2 require a walk spec");
    if (!needs_walk && walk) throw std::invalid_argument("input: walk spec given for an input without a walk");
    if (walk) walk->validate();
    if (trend_noise < 0.0) throw std::invalid_argument("input: negative trend noise");
  }

  std::string label() const { return "input" + std::to_string(static_cast<int>(kind)); }
};

/// Bounded walk with r̲ = 1, r̄ = 5, start r̲ and Rademacher steps.
inline BoundedWalkSpec default_walk() { return BoundedWalkSpec{}; }

/// The tabulated inputs I-V with default m and capacity fraction 0.25.
inline InputSpec input_preset(int id, std::size_t horizon = 1000) {
  InputSpec s;
  s.horizon = horizon;
  switch (id) {
    case 1:
      s.kind = InputKind::input1_quantity_dependent;
      s.walk = default_walk();
      break;
    case 2:
      s.kind = InputKind::input2_regenerative_price;
      s.walk = default_walk();
      break;
    case 3:
      s.kind = InputKind::input3_iid_price;
      break;
    case 4:
    case 5:
      s.kind = id == 4 ? InputKind::input4_weighted_walk : InputKind::input5_linear_trend;
      s.m = 2;
      s.consumption = ConsumptionDist::uniform;
      s.consumption_a = 0.6;
      s.consumption_b = 1.4;
      break;
    default:
      throw std::invalid_argument("unknown input preset " + std::to_string(id));
  }
  return s;
}

namespace detail {

inline std::vector<double> walk_path(const BoundedWalkSpec& spec, std::size_t steps, Rng& rng) {
  std::vector<double> out(steps);
  double cur = spec.start;
  for (std::size_t t = 0; t < steps; ++t) {
    out[t] = cur;
    const double eps = spec.increment == IncrementDist::rademacher
                           ? rng.rademacher()
                           : rng.uniform(spec.increment_lo, spec.increment_hi);
    const double next = cur + eps;
    if (next > spec.upper)
      cur = spec.upper;
    else if (next < spec.lower)
      cur = spec.lower;
    else
      cur = next;
  }
  return out;
}

}  // namespace detail

/// output[0] = start, output[t+1] = clamp(output[t] + eps_t) onto [lower, upper].
inline std::vector<double> gen_bounded_walk(const BoundedWalkSpec& spec, std::size_t steps, std::uint64_t seed) {
  spec.validate();
  if (steps < 1) throw std::invalid_argument("walk: steps must be >= 1");
  Rng rng(seed, Stream::walk, 0);
  return detail::walk_path(spec, steps, rng);
}

inline Instance gen_instance(const InputSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.horizon;
  const std::size_t m = spec.m;

  // Column-wise streams: column i of the consumption matrix does not depend on m.
  std::vector<double> rows(n * m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng rng(seed, Stream::consumption, i);
    for (std::size_t t = 0; t < n; ++t) {
      rows[t * m + i] = spec.consumption == ConsumptionDist::abs_normal
                            ? std::abs(rng.normal(spec.consumption_a, spec.consumption_b))
                            : rng.uniform(spec.consumption_a, spec.consumption_b);
    }
  }

  std::vector<double> rewards(n, 0.0);
  switch (spec.kind) {
    case InputKind::input1_quantity_dependent:
      for (std::size_t i = 0; i < m; ++i) {
        Rng rng(seed, Stream::walk, i);
        const auto path = detail::walk_path(*spec.walk, n, rng);
        for (std::size_t t = 0; t < n; ++t) rewards[t] += rows[t * m + i] * path[t];
      }
      break;
    case InputKind::input2_regenerative_price: {
      Rng rng(seed, Stream::walk, 0);
      rewards = detail::walk_path(*spec.walk, n, rng);
      break;
    }
    case InputKind::input3_iid_price: {
      Rng rng(seed, Stream::reward, 0);
      for (double& r : rewards) r = rng.uniform(spec.price_lo, spec.price_hi);
      break;
    }
    case InputKind::input4_weighted_walk: {
      Rng rng(seed, Stream::noise, 0);
      double prev = spec.trend_start;
      for (double& r : rewards) {
        r = prev + spec.trend_slope + rng.uniform(-spec.trend_noise, spec.trend_noise);
        prev = r;
      }
      break;
    }
    case InputKind::input5_linear_trend: {
      Rng rng(seed, Stream::noise, 0);
      for (std::size_t t = 0; t < n; ++t)
        rewards[t] = spec.trend_start + spec.trend_slope * static_cast<double>(t + 1) +
                     rng.uniform(-spec.trend_noise, spec.trend_noise);
      break;
    }
  }
  std::vector<double> d(m, spec.capacity_fraction);
  return Instance::from_per_period(OrderTable(m, std::move(rewards), std::move(rows)), d);
}

/// Bounds under which every default-configured generated instance validates:
/// r̄ = max(5, max |r_t|), ā = max row norm observed, (d̲, d̄) = (0.05, 1).
inline InstanceBounds generated_bounds(const Instance& inst) {
  InstanceBounds b;
  const OrderView v = inst.orders().view();
  b.reward_bound = std::max(5.0, max_abs_reward(v));
  b.row_norm_bound = max_row_norm(v);
  return b;
}

// ---------------------------------------------------------------------------
// Regenerative processes with enumerable cycles.

struct CycleVariant {
  double probability = 1.0;
  std::vector<double> values;  // one value per step of the cycle
};

/// Cycles are i.i.d.: a length L in {1..T} is drawn from cycle_length_probs,
/// then one of the variants tabulated for L. Values are bounded by M.
struct RegenSpec {
  std::size_t max_cycle_length = 1;               // T
  std::vector<double> cycle_length_probs;         // index L-1
  double value_bound = 1.0;                       // M
  std::vector<std::vector<CycleVariant>> table;   // index L-1

  void validate() const {
    if (max_cycle_length < 1) throw std::invalid_argument("regen: T must be >= 1");
    if (cycle_length_probs.size() != max_cycle_length || table.size() != max_cycle_length)
      throw std::invalid_argument("regen: length distribution and table must cover 1..T");
    double total = 0.0;
    for (std::size_t l = 0; l < max_cycle_length; ++l) {
      const double pl = cycle_length_probs[l];
      if (pl < 0.0) throw std::invalid_argument("regen: negative probability");
      total += pl;
      if (pl == 0.0) continue;
      if (table[l].empty()) throw std::invalid_argument("regen: no cycle values for a reachable length");
      double vtotal = 0.0;
      for (const auto& v : table[l]) {
        if (v.probability < 0.0) throw std::invalid_argument("regen: negative variant probability");
        vtotal += v.probability;
        if (v.values.size() != l + 1) throw std::invalid_argument("regen: variant length differs from cycle length");
        for (double x : v.values)
          if (!(std::abs(x) <= value_bound)) throw std::invalid_argument("regen: value exceeds bound M");
      }
      if (std::abs(vtotal - 1.0) > 1e-12) throw std::invalid_argument("regen: variant probabilities must sum to 1");
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("regen: length probabilities must sum to 1");
  }

  /// Every cycle has length 1 and value c.
  static RegenSpec constant(double c) {
    RegenSpec s;
    s.max_cycle_length = 1;
    s.cycle_length_probs = {1.0};
    s.value_bound = std::max(1.0, std::abs(c));
    s.table = {{CycleVariant{1.0, {c}}}};
    return s;
  }
};

struct RegenPath {
  std::vector<double> values;
  std::vector<std::size_t> cycle_starts;
};

inline RegenPath gen_regenerative_path(const RegenSpec& spec, std::size_t steps, std::uint64_t seed) {
  spec.validate();
  if (steps < 1) throw std::invalid_argument("regen: steps must be >= 1");
  Rng rng(seed, Stream::regen, 0);
  RegenPath out;
  out.values.reserve(steps);
  std::vector<double> vprobs;
  while (out.values.size() < steps) {
    const std::size_t l = rng.discrete(spec.cycle_length_probs);
    const auto& variants = spec.table[l];
    std::size_t v = 0;
    if (variants.size() > 1) {
      vprobs.clear();
      for (const auto& c : variants) vprobs.push_back(c.probability);
      v = rng.discrete(vprobs);
    }
    out.cycle_starts.push_back(out.values.size());
    for (double x : variants[v].values) {
      if (out.values.size() == steps) break;
      out.values.push_back(x);
    }
  }
  return out;
}

inline double mean_cycle_length(const RegenSpec& spec) {
  double e = 0.0;
  for (std::size_t l = 0; l < spec.max_cycle_length; ++l) e += spec.cycle_length_probs[l] * static_cast<double>(l + 1);
  return e;
}

/// alpha = E[cycle sum] / E[cycle length], by enumeration of the table.
inline double true_cycle_mean(const RegenSpec& spec) {
  spec.validate();
  double num = 0.0;
  for (std::size_t l = 0; l < spec.max_cycle_length; ++l) {
    if (spec.cycle_length_probs[l] == 0.0) continue;
    double cycle_sum = 0.0;
    for (const auto& v : spec.table[l]) {
      double s = 0.0;
      for (double x : v.values) s += x;
      cycle_sum += v.probability * s;
    }
    num += spec.cycle_length_probs[l] * cycle_sum;
  }
  return num / mean_cycle_length(spec);
}

}  // namespace olp
