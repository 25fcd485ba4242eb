#pragma once

// Monte-Carlo checks of the regenerative concentration bound, the law of
// large numbers for regenerative paths, and the convergence rate of the
// sample dual minimizer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "olp/core.hpp"
#include "olp/dual_solver.hpp"
#include "olp/inputs.hpp"
#include "olp/rng.hpp"

namespace olp {

/// How lambda relates to the cycle length distribution.
enum class LambdaReading {
  rate,               // 1 / E[tau]
  mean_cycle_length,  // E[tau]
};

inline double regeneration_lambda(const RegenSpec& spec, LambdaReading reading = LambdaReading::rate) {
  const double e = mean_cycle_length(spec);
  return reading == LambdaReading::rate ? 1.0 / e : e;
}

struct ConcentrationParams {
  double epsilon = 0.1;
  double t = 1000.0;
  double M = 1.0;  // |f| <= M
  double T = 1.0;  // cycle lengths <= T
  double lambda = 1.0;
  double K = 10.0;
  double delta = 0.5;
  // Two-sided variant: f in (range_lo, range_hi); the leading term uses
  // (range_hi - range_lo) in place of M and M = max(|lo|, |hi|).
  bool two_sided = false;
  double range_lo = 0.0;
  double range_hi = 0.0;

  double effective_M() const { return two_sided ? std::max(std::abs(range_lo), std::abs(range_hi)) : M; }

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("concentration: epsilon must be > 0");
    if (!(K > 2.0)) throw std::invalid_argument("concentration: K must be > 2");
    if (!(lambda > 0.0)) throw std::invalid_argument("concentration: lambda must be > 0");
    if (!(delta > 0.0 && delta < lambda)) throw std::invalid_argument("concentration: delta must lie in (0, lambda)");
    if (!(T > 0.0)) throw std::invalid_argument("concentration: T must be > 0");
    if (two_sided && !(range_lo < range_hi)) throw std::invalid_argument("concentration: empty value range");
    if (!(effective_M() > 0.0)) throw std::invalid_argument("concentration: M must be > 0");
    if (!(t > T * effective_M() * K / epsilon)) throw std::invalid_argument("concentration: requires t > T M K / epsilon");
  }
};

struct BoundTerms {
  double leading = 0.0;
  double count = 0.0;  // deviation of the regeneration count
  double drift = 0.0;
  double total() const { return leading + count + drift; }
};

inline BoundTerms concentration_terms(const ConcentrationParams& p) {
  p.validate();
  const double M = p.effective_M();
  const double k2 = (p.K - 2.0) / p.K;
  BoundTerms b;
  if (p.two_sided) {
    const double w = p.range_hi - p.range_lo;
    b.leading = std::exp(-2.0 * p.epsilon * p.epsilon * k2 * k2 * p.t / (p.lambda * w * w * p.T * p.T));
  } else {
    b.leading = 2.0 * std::exp(-2.0 * p.epsilon * p.epsilon * k2 * k2 * p.t / (p.lambda * M * M * p.T * p.T));
  }
  const double ld = p.lambda - p.delta;
  b.count = 2.0 * std::exp(-p.delta * p.delta * p.t / (ld * ld * p.lambda * p.lambda * p.T * p.T));
  b.drift = std::exp((2.0 * p.delta * M - k2 * p.epsilon) * p.t);
  return b;
}

/// Raw value of the bound; not clamped to [0, 1].
inline double concentration_bound(const ConcentrationParams& p) { return concentration_terms(p).total(); }

struct DeltaChoice {
  double delta = 0.0;
  double bound = 0.0;
  bool convex = true;  // second differences on the grid were all >= -1e-9
};

/// Grid search over delta in (0, lambda) at the midpoints of grid_size equal cells.
inline DeltaChoice optimize_delta(ConcentrationParams p, std::size_t grid_size) {
  if (grid_size < 1) throw std::invalid_argument("optimize_delta: grid_size must be >= 1");
  const double pitch = p.lambda / static_cast<double>(grid_size);
  std::vector<double> values(grid_size);
  DeltaChoice best;
  best.bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_size; ++i) {
    p.delta = (static_cast<double>(i) + 0.5) * pitch;
    values[i] = concentration_bound(p);
    if (values[i] < best.bound) {
      best.bound = values[i];
      best.delta = p.delta;
    }
  }
  for (std::size_t i = 1; i + 1 < grid_size; ++i)
    if (values[i - 1] - 2.0 * values[i] + values[i + 1] < -1e-9) best.convex = false;
  return best;
}

struct TailEstimate {
  double p_hat = 0.0;
  double ci_halfwidth = 0.0;  // 99% Wilson interval
  double lower = 0.0;
  double upper = 0.0;
  std::size_t exceedances = 0;
  std::size_t trials = 0;
};

inline constexpr double kZ99 = 2.5758293035489004;

inline TailEstimate wilson_interval(std::size_t hits, std::size_t trials, double z = kZ99) {
  TailEstimate e;
  e.exceedances = hits;
  e.trials = trials;
  const double n = static_cast<double>(trials);
  e.p_hat = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (e.p_hat + z2 / (2.0 * n)) / denom;
  e.ci_halfwidth = z * std::sqrt(e.p_hat * (1.0 - e.p_hat) / n + z2 / (4.0 * n * n)) / denom;
  e.lower = std::max(0.0, center - e.ci_halfwidth);
  e.upper = std::min(1.0, center + e.ci_halfwidth);
  return e;
}

/// Frequency of |(1/t) sum_{s<=t} X_s - alpha| > epsilon over independent paths.
inline TailEstimate empirical_tail(const RegenSpec& spec, double epsilon, std::size_t t, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("empirical_tail: at least 100 trials required");
  if (t < 1) throw std::invalid_argument("empirical_tail: t must be >= 1");
  const double alpha = true_cycle_mean(spec);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    const RegenPath path = gen_regenerative_path(spec, t, derived_seed(seed, k + 1));
    double s = 0.0;
    for (double x : path.values) s += x;
    if (std::abs(s / static_cast<double>(t) - alpha) > epsilon) ++hits;
  }
  return wilson_interval(hits, trials);
}

/// Cycle lengths uniform on {1, 2, 3}, values in [-1, 1].
inline RegenSpec example_regen_spec() {
  RegenSpec s;
  s.max_cycle_length = 3;
  s.cycle_length_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  s.value_bound = 1.0;
  s.table = {{CycleVariant{0.5, {1.0}}, CycleVariant{0.5, {-0.5}}},
             {CycleVariant{1.0, {0.5, 1.0}}},
             {CycleVariant{0.5, {-1.0, 0.0, 1.0}}, CycleVariant{0.5, {0.2, 0.4, -0.6}}}};
  return s;
}

struct ConcentrationCheck {
  ConcentrationParams params;  // delta set to the optimized value
  DeltaChoice choice;
  TailEstimate tail;
  bool holds() const { return tail.lower <= choice.bound; }
};

/// Optimized bound (T, M, lambda taken from the chain) against the Monte-Carlo tail.
inline ConcentrationCheck check_concentration(const RegenSpec& spec, double epsilon, std::size_t t, double K,
                                              std::size_t trials, std::uint64_t seed, std::size_t grid_size = 1000,
                                              LambdaReading reading = LambdaReading::rate) {
  ConcentrationCheck c;
  c.params.epsilon = epsilon;
  c.params.t = static_cast<double>(t);
  c.params.M = spec.value_bound;
  c.params.T = static_cast<double>(spec.max_cycle_length);
  c.params.lambda = regeneration_lambda(spec, reading);
  c.params.K = K;
  c.params.delta = c.params.lambda / 2.0;
  c.params.validate();
  c.choice = optimize_delta(c.params, grid_size);
  c.params.delta = c.choice.delta;
  c.tail = empirical_tail(spec, epsilon, t, trials, seed);
  return c;
}

struct LlnRow {
  std::size_t t = 0;
  double median_error = 0.0;
};

/// Median of |path average - alpha| over `trials` paths, for t = t0, 2 t0, ...
inline std::vector<LlnRow> lln_experiment(const RegenSpec& spec, std::size_t t0, std::size_t doublings,
                                          std::size_t trials, std::uint64_t seed) {
  if (t0 < 1 || trials < 1) throw std::invalid_argument("lln: t0 and trials must be >= 1");
  const double alpha = true_cycle_mean(spec);
  std::vector<LlnRow> out;
  std::vector<double> err(trials);
  for (std::size_t k = 0, t = t0; k <= doublings; ++k, t *= 2) {
    for (std::size_t i = 0; i < trials; ++i) {
      const RegenPath path = gen_regenerative_path(spec, t, derived_seed(seed, (k << 32) + i + 1));
      double s = 0.0;
      for (double x : path.values) s += x;
      err[i] = std::abs(s / static_cast<double>(t) - alpha);
    }
    std::sort(err.begin(), err.end());
    const double med = trials % 2 ? err[trials / 2] : 0.5 * (err[trials / 2 - 1] + err[trials / 2]);
    out.push_back({t, med});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ReferenceDual {
  DualPrice price;
  bool converged = false;
};

inline constexpr std::uint64_t kReferenceSalt = 0x5AAF;

/// p* approximated by the sample dual of one long stream.
inline ReferenceDual reference_dual(InputSpec spec, std::size_t sample_size, const SolverConfig& cfg,
                                    std::uint64_t seed) {
  if (!is_stationary(spec.kind)) throw std::invalid_argument("reference_dual: stationary inputs only");
  spec.horizon = sample_size;
  const Instance inst = gen_instance(spec, derived_seed(seed, kReferenceSalt));
  const DualSolution s = solve_dual(normalized_dual(inst.per_period_capacity(), inst.orders().view()), cfg);
  return {s.price, s.converged};
}

struct ConvergenceRow {
  std::size_t n = 0;
  double mean_sq_error = 0.0;
  std::size_t unconverged = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::optional<double> slope;  // least squares slope of log mse on log n; empty when undefined
};

/// Least squares slope of y on x; empty with fewer than two distinct x.
inline std::optional<double> ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  return sxy / sxx;
}

/// For each seed one stream of max(n_grid) orders is drawn; each n solves
/// the sample dual of its n-prefix and is compared with `reference`.
inline ConvergenceTable dual_convergence_experiment(InputSpec spec, std::span<const std::size_t> n_grid,
                                                    std::span<const std::uint64_t> seeds, const SolverConfig& cfg,
                                                    const DualPrice& reference) {
  if (!is_stationary(spec.kind)) throw std::invalid_argument("convergence: stationary inputs only");
  if (n_grid.empty() || seeds.empty()) throw std::invalid_argument("convergence: empty grid");
  if (reference.size() != spec.m) throw std::invalid_argument("convergence: reference has wrong dimension");
  ConvergenceTable table;
  table.rows.resize(n_grid.size());
  for (std::size_t g = 0; g < n_grid.size(); ++g) table.rows[g].n = n_grid[g];
  spec.horizon = *std::max_element(n_grid.begin(), n_grid.end());
  const std::vector<double> d(spec.m, spec.capacity_fraction);
  for (std::uint64_t seed : seeds) {
    const Instance inst = gen_instance(spec, seed);
    const OrderView all = inst.orders().view();
    for (auto& row : table.rows) {
      const DualSolution s = solve_dual(normalized_dual(d, all.prefix(row.n)), cfg);
      row.mean_sq_error += squared_distance(s.price, reference);
      if (!s.converged) ++row.unconverged;
    }
  }
  std::vector<double> lx, ly;
  for (auto& row : table.rows) {
    row.mean_sq_error /= static_cast<double>(seeds.size());
    if (row.mean_sq_error > 0.0) {
      lx.push_back(std::log(static_cast<double>(row.n)));
      ly.push_back(std::log(row.mean_sq_error));
    }
  }
  table.slope = ols_slope(lx, ly);
  return table;
}

}  // namespace olp
