#pragma once

// Minimization of the sample dual
//
//   f(p) = d'p + scale * sum_j (r_j - a_j'p)^+      over p >= 0, e'p <= R
//
// and the hindsight LP optimum through strong duality.
//
// Three methods are provided. The default is a deep-cut ellipsoid method:
// f is convex and piecewise linear in a handful of variables, so the
// ellipsoid method gives a certified optimality gap after O(m^2 log(1/eps))
// cuts. Orders whose plus-part is provably linear over the current
// ellipsoid are folded into two running sums, so late iterations touch only
// the few orders near the acceptance boundary. Projected subgradient and an
// exact epigraph LP (dense simplex, small problems only) are the
// alternatives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "olp/core.hpp"
#include "olp/simplex.hpp"

namespace olp {

struct DualProblem {
  std::span<const double> capacity;  // per-period d, or leftover b for the un-normalized form
  OrderView orders;
  double scale = 1.0;        // weight on the plus-part sum
  double price_bound = 0.0;  // R in e'p <= R; 0 means derive from the data

  std::size_t resources() const { return capacity.size(); }
  std::size_t size() const { return orders.size(); }

  void validate() const {
    if (orders.empty()) throw std::invalid_argument("dual: no orders");
    if (orders.resources() != capacity.size()) throw std::invalid_argument("dual: dimension mismatch");
    if (!(scale > 0.0)) throw std::invalid_argument("dual: scale must be positive");
    for (double d : capacity)
      if (!(d >= 0.0)) throw std::invalid_argument("dual: capacities must be >= 0");
  }
};

/// min d'p + (1/k) sum_j (r_j - a_j'p)^+ over the given k orders.
inline DualProblem normalized_dual(std::span<const double> d, OrderView orders) {
  return DualProblem{d, orders, 1.0 / static_cast<double>(orders.size())};
}

enum class SolverMethod { ellipsoid, projected_subgradient, epigraph_simplex };

struct SolverConfig {
  double objective_tolerance = 1e-8;  // relative
  std::size_t max_iterations = 0;     // 0: method default
  std::optional<DualPrice> warm_start;
  SolverMethod method = SolverMethod::ellipsoid;
  double capacity_floor = 0.05;  // d̲, used when some capacity is (near) zero
  // > 0 with a warm start: search a ball of this radius around the warm
  // start first and grow it until the solution is certified globally.
  double local_radius = 0.0;
};

struct DualSolution {
  DualPrice price;
  double objective = 0.0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline void check_dims(const DualProblem& prob, std::span<const double> p) {
  if (p.size() != prob.resources() || prob.orders.resources() != prob.resources())
    throw std::invalid_argument("dual: dimension mismatch");
}

}  // namespace detail

inline double dual_objective(const DualProblem& prob, std::span<const double> p) {
  detail::check_dims(prob, p);
  double plus = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const double s = prob.orders.reward(j) - dot(prob.orders.row(j), p);
    if (s > 0.0) plus += s;
  }
  return dot(prob.capacity, p) + prob.scale * plus;
}
inline double dual_objective(const DualProblem& prob, const DualPrice& p) { return dual_objective(prob, p.values()); }

/// d - scale * sum_j a_j 1(r_j > a_j'p); the strict inequality picks the
/// right-continuous element of the subdifferential at a breakpoint.
inline std::vector<double> dual_subgradient(const DualProblem& prob, std::span<const double> p) {
  detail::check_dims(prob, p);
  const std::size_t m = prob.resources();
  std::vector<double> g(prob.capacity.begin(), prob.capacity.end());
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const auto a = prob.orders.row(j);
    if (prob.orders.reward(j) > dot(a, p))
      for (std::size_t i = 0; i < m; ++i) g[i] -= prob.scale * a[i];
  }
  return g;
}
inline std::vector<double> dual_subgradient(const DualProblem& prob, const DualPrice& p) {
  return dual_subgradient(prob, p.values());
}

/// Radius R of the price set { p >= 0, e'p <= R }. Every minimizer satisfies
/// min_i d_i * e'p <= d'p <= f(p) <= f(0), so R = f(0) / min_i d_i; capacities
/// below the floor d̲ (in per-period units) are raised to it.
inline double price_bound(const DualProblem& prob, double capacity_floor = 0.05) {
  if (prob.price_bound > 0.0) return prob.price_bound;
  double plus = 0.0;
  for (double r : prob.orders.rewards())
    if (r > 0.0) plus += r;
  const double f0 = prob.scale * plus;
  if (f0 <= 0.0) return 0.0;
  const double floor_abs = capacity_floor * prob.scale * static_cast<double>(prob.size());
  double dmin = std::numeric_limits<double>::infinity();
  for (double d : prob.capacity) dmin = std::min(dmin, d);
  return f0 / std::max(dmin, floor_abs);
}

/// Weak-duality lower bound on min f: accept the orders priced in at p and
/// scale the acceptance vector down to capacity. Valid when all consumptions
/// are nonnegative; returns -inf otherwise.
inline double primal_lower_bound(const DualProblem& prob, std::span<const double> p) {
  const std::size_t m = prob.resources();
  std::vector<double> use(m, 0.0);
  double revenue = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const auto a = prob.orders.row(j);
    for (double v : a)
      if (v < 0.0) return -std::numeric_limits<double>::infinity();
    if (prob.orders.reward(j) > dot(a, p)) {
      revenue += prob.orders.reward(j);
      for (std::size_t i = 0; i < m; ++i) use[i] += a[i];
    }
  }
  double theta = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    if (prob.scale * use[i] > prob.capacity[i]) theta = std::min(theta, prob.capacity[i] / (prob.scale * use[i]));
  return prob.scale * theta * revenue;
}

namespace detail {

/// Clamp to p >= 0, then scale radially onto e'p <= bound.
inline void project_price(std::span<double> p, double bound) {
  double s = 0.0;
  for (double& v : p) {
    v = std::max(v, 0.0);
    s += v;
  }
  if (s > bound && s > 0.0)
    for (double& v : p) v *= bound / s;
}

inline std::size_t default_iterations(const DualProblem& prob, SolverMethod method) {
  const double m = static_cast<double>(prob.resources());
  const double base = 20.0 * m * std::sqrt(static_cast<double>(prob.size()));
  const double floor = method == SolverMethod::ellipsoid ? 600.0 * m * m : 0.0;
  return static_cast<std::size_t>(std::min(1e5, std::max({base, floor, 50.0})));
}

/// Minimizes the convex piecewise-linear model
///   constant + linear'p + scale * sum_{j in idx} (r_j - a_j'p)^+
/// over { p >= 0, e'p <= bound }, optionally intersected with the box
/// |p_i - box_center_i| <= box_half_width. Solved through the LP dual
///   max  scale * sum_j rho_j x_j - (bound - e'l) w - width'z
///   s.t. scale * sum_j a_ij x_j - w - z_i <= linear_i,  0 <= x <= 1,  w, z >= 0
/// (p = l + pi with lower corner l), whose row multipliers are pi.
struct RestrictedMinimum {
  std::vector<double> price;
  double value = 0.0;
  double global_lower = -std::numeric_limits<double>::infinity();  // bound on the unboxed model
};

inline std::optional<RestrictedMinimum> restricted_epigraph(const DualProblem& prob, std::span<const std::uint32_t> idx,
                                                            std::span<const double> linear, double constant,
                                                            double bound, std::span<const double> box_center = {},
                                                            double box_half_width = 0.0) {
  const std::size_t m = prob.resources(), u = idx.size();
  const bool boxed = !box_center.empty();
  std::vector<double> lower(m, 0.0), width(m, std::numeric_limits<double>::infinity());
  if (boxed)
    for (std::size_t i = 0; i < m; ++i) {
      lower[i] = std::max(0.0, box_center[i] - box_half_width);
      width[i] = box_center[i] + box_half_width - lower[i];
    }
  double lower_sum = 0.0;
  for (double v : lower) lower_sum += v;
  if (lower_sum > bound) return std::nullopt;

  LinearProgram lp(m, u + 1 + (boxed ? m : 0));
  for (std::size_t j = 0; j < u; ++j) {
    const auto a = prob.orders.row(idx[j]);
    lp.c[j] = prob.scale * (prob.orders.reward(idx[j]) - dot(a, lower));
    lp.upper[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) lp.at(i, j) = prob.scale * a[i];
  }
  lp.c[u] = -(bound - lower_sum);
  for (std::size_t i = 0; i < m; ++i) {
    lp.at(i, u) = -1.0;
    lp.b[i] = linear[i];
    if (boxed) {
      lp.at(i, u + 1 + i) = -1.0;
      lp.c[u + 1 + i] = -width[i];
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) return std::nullopt;
  RestrictedMinimum out;
  out.price.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.price[i] = lower[i] + std::clamp(sol.duals[i], 0.0, width[i]);
  project_price(out.price, bound);
  out.value = constant + dot(linear, lower) + sol.objective;
  // (x, w + max z) is feasible for the unboxed dual
  double zmax = 0.0;
  if (boxed)
    for (std::size_t i = 0; i < m; ++i) zmax = std::max(zmax, sol.x[u + 1 + i]);
  double dual_value = -bound * (sol.x[u] + zmax);
  for (std::size_t j = 0; j < u; ++j) dual_value += prob.scale * prob.orders.reward(idx[j]) * sol.x[j];
  out.global_lower = constant + dual_value;
  return out;
}

/// Exact evaluation of f and its subgradient inside a ball. Orders whose
/// margin r_j - a_j'p keeps its sign over the whole ball are summarized.
class LocalizedObjective {
 public:
  explicit LocalizedObjective(const DualProblem& prob) : prob_(prob), active_row_(prob.resources(), 0.0) {
    norms_.resize(prob.size());
    for (std::size_t j = 0; j < prob.size(); ++j) norms_[j] = norm2(prob.orders.row(j));
  }

  void localize_everywhere() {
    all_ = true;
    radius_ = std::numeric_limits<double>::infinity();
  }

  void localize(std::span<const double> center, double radius) {
    all_ = false;
    center_.assign(center.begin(), center.end());
    radius_ = radius;
    active_reward_ = 0.0;
    std::fill(active_row_.begin(), active_row_.end(), 0.0);
    uncertain_.clear();
    const std::size_t m = prob_.resources();
    for (std::size_t j = 0; j < prob_.size(); ++j) {
      const auto a = prob_.orders.row(j);
      const double s = prob_.orders.reward(j) - dot(a, center);
      const double reach = norms_[j] * radius * (1.0 + 1e-9) + 1e-12 * (1.0 + std::abs(s));
      if (s > reach) {
        active_reward_ += prob_.orders.reward(j);
        for (std::size_t i = 0; i < m; ++i) active_row_[i] += a[i];
      } else if (s >= -reach) {
        uncertain_.push_back(static_cast<std::uint32_t>(j));
      }
    }
  }

  double radius() const { return radius_; }
  std::size_t uncertain() const { return all_ ? prob_.size() : uncertain_.size(); }

  bool covers(std::span<const double> p) const {
    if (all_) return true;
    double d2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - center_[i]) * (p[i] - center_[i]);
    return std::sqrt(d2) <= radius_;
  }

  double evaluate(std::span<const double> p, std::span<double> grad) const {
    const std::size_t m = prob_.resources();
    std::fill(grad.begin(), grad.end(), 0.0);
    double plus = 0.0;
    auto visit = [&](std::size_t j) {
      const auto a = prob_.orders.row(j);
      const double s = prob_.orders.reward(j) - dot(a, p);
      if (s > 0.0) {
        plus += s;
        for (std::size_t i = 0; i < m; ++i) grad[i] += a[i];
      }
    };
    if (all_) {
      for (std::size_t j = 0; j < prob_.size(); ++j) visit(j);
    } else {
      plus = active_reward_ - dot(active_row_, p);
      for (std::size_t i = 0; i < m; ++i) grad[i] = active_row_[i];
      for (std::uint32_t j : uncertain_) visit(j);
    }
    for (std::size_t i = 0; i < m; ++i) grad[i] = prob_.capacity[i] - prob_.scale * grad[i];
    return dot(prob_.capacity, p) + prob_.scale * plus;
  }

  /// Minimum of the model that keeps the undecided orders exact, treats the
  /// priced-in ones as linear and drops the priced-out ones. The model is
  /// below f everywhere and equal to it on the ball, so its minimum value is
  /// a lower bound on min f, and a minimizer inside the ball minimizes f.
  /// With `boxed`, the search is confined to the cube inscribed in the ball.
  std::optional<RestrictedMinimum> restricted_minimum(double bound, bool boxed = false) const {
    if (all_) return std::nullopt;
    const std::size_t m = prob_.resources();
    std::vector<double> linear(m);
    for (std::size_t i = 0; i < m; ++i) linear[i] = prob_.capacity[i] - prob_.scale * active_row_[i];
    if (!boxed) return restricted_epigraph(prob_, uncertain_, linear, prob_.scale * active_reward_, bound);
    return restricted_epigraph(prob_, uncertain_, linear, prob_.scale * active_reward_, bound, center_,
                               box_half_width());
  }

  double box_half_width() const { return radius_ / std::sqrt(static_cast<double>(prob_.resources())); }


 private:
  const DualProblem& prob_;
  std::vector<double> norms_;
  bool all_ = true;
  std::vector<double> center_;
  double radius_ = std::numeric_limits<double>::infinity();
  double active_reward_ = 0.0;
  std::vector<double> active_row_;
  std::vector<std::uint32_t> uncertain_;
};

/// Ellipsoid { x : (x-c)' P^{-1} (x-c) <= 1 } with deep cuts.
class Ellipsoid {
 public:
  Ellipsoid(std::span<const double> center, double radius)
      : n_(center.size()), c_(center.begin(), center.end()), P_(n_ * n_, 0.0), Ph_(n_), b_(n_) {
    for (std::size_t i = 0; i < n_; ++i) P_[i * n_ + i] = radius * radius;
  }

  std::span<const double> center() const { return c_; }

  double quad(std::span<const double> h) {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) s += P_[i * n_ + k] * h[k];
      Ph_[i] = s;
    }
    return dot(h, Ph_);
  }

  // Upper bound on the largest semi-axis.
  double radius_bound() const {
    double tr = 0.0;
    for (std::size_t i = 0; i < n_; ++i) tr += P_[i * n_ + i];
    return std::sqrt(std::max(tr, 0.0));
  }

  /// Keeps E ∩ { x : h'(x - c) <= -alpha sqrt(h'Ph) }. Requires quad(h) to
  /// have been called with the same h.
  void cut(double hPh, double alpha) {
    alpha = std::clamp(alpha, 0.0, 0.5);
    const double s = std::sqrt(hPh);
    for (std::size_t i = 0; i < n_; ++i) b_[i] = Ph_[i] / s;
    const double n = static_cast<double>(n_);
    if (n_ == 1) {
      c_[0] -= 0.5 * (1.0 + alpha) * b_[0];
      P_[0] *= 0.25 * (1.0 - alpha) * (1.0 - alpha);
      return;
    }
    const double tau = (1.0 + n * alpha) / (n + 1.0);
    const double sigma = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha));
    const double delta = n * n / (n * n - 1.0) * (1.0 - alpha * alpha);
    for (std::size_t i = 0; i < n_; ++i) c_[i] -= tau * b_[i];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = i; k < n_; ++k) {
        const double v = delta * (P_[i * n_ + k] - sigma * b_[i] * b_[k]);
        P_[i * n_ + k] = v;
        P_[k * n_ + i] = v;
      }
  }

 private:
  std::size_t n_;
  std::vector<double> c_;
  std::vector<double> P_;
  std::vector<double> Ph_;
  std::vector<double> b_;
};

struct EllipsoidRun {
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

// Undecided orders up to which the restricted LP is attempted.
inline constexpr std::size_t kPolishLimit = 400;
inline constexpr std::size_t kWarmLimit = 1000;

/// Tries to finish the solve from the current localization: the restricted
/// minimum is a global lower bound and, when it lands inside the ball, an
/// exact minimizer.
inline bool polish(LocalizedObjective& model, double bound, EllipsoidRun& run, std::span<double> grad,
                   double tolerance_abs) {
  if (model.uncertain() > kPolishLimit) return false;
  const auto r = model.restricted_minimum(bound);
  if (!r) return false;
  run.lower_bound = std::max(run.lower_bound, r->value);
  if (model.covers(r->price)) {
    const double f = model.evaluate(r->price, grad);
    if (f < run.best_value) {
      run.best_value = f;
      run.best = r->price;
    }
  }
  if (run.best_value - run.lower_bound <= tolerance_abs) run.converged = true;
  return run.converged;
}

/// Deep-cut ellipsoid method over { p >= 0, e'p <= bound }, started from the
/// ball B(center, radius) which must contain that set. Stops once the
/// certified gap is within max(relative_tol * |best|, abs_floor).
inline EllipsoidRun ellipsoid_minimize(LocalizedObjective& model, std::size_t m, double bound,
                                       std::span<const double> center, double radius, double relative_tol,
                                       double abs_floor, std::size_t max_iterations,
                                       const std::vector<std::vector<double>>& seeds) {
  EllipsoidRun run;
  std::vector<double> grad(m), h(m);
  model.localize_everywhere();
  for (const auto& s : seeds) {
    double sum = 0.0;
    bool ok = true;
    for (double v : s) {
      ok = ok && v >= 0.0;
      sum += v;
    }
    if (!ok || sum > bound) continue;
    const double f = model.evaluate(s, grad);
    if (f < run.best_value) {
      run.best_value = f;
      run.best = s;
    }
  }

  Ellipsoid ell(center, radius);
  auto tolerance = [&]() { return std::max(relative_tol * std::abs(run.best_value), abs_floor); };

  for (std::size_t it = 0; it < max_iterations; ++it) {
    run.iterations = it + 1;
    const auto c = ell.center();
    // deepest violated constraint of the feasible set
    double best_alpha = -1.0, best_hph = 0.0;
    std::vector<double> best_h;
    auto try_cut = [&](double violation) {
      if (violation <= 0.0) return;
      const double hph = ell.quad(h);
      if (!(hph > 0.0)) return;
      const double alpha = violation / std::sqrt(hph);
      if (alpha > best_alpha) {
        best_alpha = alpha;
        best_hph = hph;
        best_h = h;
      }
    };
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(h.begin(), h.end(), 0.0);
      h[i] = -1.0;
      try_cut(-c[i]);
    }
    double sum = 0.0;
    for (double v : c) sum += v;
    std::fill(h.begin(), h.end(), 1.0);
    try_cut(sum - bound);
    if (best_alpha >= 0.0) {
      ell.quad(best_h);
      ell.cut(best_hph, best_alpha);
      continue;
    }

    // objective cut at a feasible center
    const double rb = 4.0 * ell.radius_bound();
    bool relocalized = false;
    if (!model.covers(c) || rb < model.radius() / 4.0) {
      model.localize(c, rb);
      relocalized = true;
    }
    const double f = model.evaluate(c, grad);
    if (f < run.best_value) {
      run.best_value = f;
      run.best.assign(c.begin(), c.end());
    }
    const double gpg = ell.quad(grad);
    const double width = std::sqrt(std::max(gpg, 0.0));
    run.lower_bound = std::max(run.lower_bound, f - width);
    if (run.best_value - run.lower_bound <= tolerance()) {
      run.converged = true;
      break;
    }
    if (relocalized && polish(model, bound, run, grad, tolerance())) break;
    if (!(gpg > 0.0)) {  // zero subgradient at a feasible point: optimal
      run.lower_bound = run.best_value;
      run.converged = true;
      break;
    }
    ell.cut(gpg, (f - run.best_value) / width);
  }
  return run;
}

inline DualSolution solve_ellipsoid(const DualProblem& prob, const SolverConfig& cfg) {
  const std::size_t m = prob.resources();
  const double bound = price_bound(prob, cfg.capacity_floor);
  const std::size_t budget = cfg.max_iterations ? cfg.max_iterations : default_iterations(prob, cfg.method);
  LocalizedObjective model(prob);
  std::vector<double> grad(m);

  std::vector<std::vector<double>> seeds{std::vector<double>(m, 0.0)};
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != m) throw std::invalid_argument("dual: warm start dimension mismatch");
    std::vector<double> w(cfg.warm_start->values().begin(), cfg.warm_start->values().end());
    project_price(w, bound);
    seeds.push_back(std::move(w));
  }

  DualSolution out;
  if (bound <= 0.0) {
    model.localize_everywhere();
    out.price = DualPrice::zero(m);
    out.objective = model.evaluate(std::vector<double>(m, 0.0), grad);
    out.lower_bound = out.objective;
    out.converged = true;
    return out;
  }

  const double f0 = dual_objective(prob, std::vector<double>(m, 0.0));
  const double abs_floor = 1e-14 * std::max(std::abs(f0), 1e-300);
  const double tol = cfg.objective_tolerance;
  auto finish = [&](const EllipsoidRun& run, std::size_t iterations) {
    out.price = DualPrice(run.best);
    out.objective = run.best_value;
    out.lower_bound = run.lower_bound;
    out.iterations = iterations;
    out.converged = run.converged;
    return out;
  };

  // Warm start: active-set steps. Localize around the current point, jump to
  // the restricted minimum, and stop once its dual bound closes the gap.
  std::size_t rounds = 0;
  if (cfg.warm_start && cfg.local_radius > 0.0) {
    std::vector<double> center = seeds.back();
    double rho = cfg.local_radius;
    for (; rounds < 12; ++rounds) {
      model.localize(center, rho);
      if (model.uncertain() > kWarmLimit) break;
      const auto r = model.restricted_minimum(bound, true);
      if (!r) break;
      EllipsoidRun run;
      run.best = r->price;
      run.best_value = model.evaluate(r->price, grad);
      run.lower_bound = r->global_lower;
      if (run.best_value - run.lower_bound <= std::max(tol * std::abs(run.best_value), abs_floor)) {
        run.converged = true;
        return finish(run, rounds + 1);
      }
      seeds.push_back(r->price);
      center = r->price;
      rho *= 2.0;
    }
  }

  std::vector<double> center(m, bound / static_cast<double>(m + 1));
  EllipsoidRun run = ellipsoid_minimize(model, m, bound, center, bound * 1.0001, tol, abs_floor, budget, seeds);
  if (!run.converged && run.best_value - run.lower_bound <= std::max(tol * std::abs(run.best_value), abs_floor))
    run.converged = true;
  return finish(run, rounds + run.iterations);
}

inline DualSolution solve_subgradient(const DualProblem& prob, const SolverConfig& cfg) {
  const std::size_t m = prob.resources();
  const double bound = price_bound(prob, cfg.capacity_floor);
  const std::size_t budget = cfg.max_iterations ? cfg.max_iterations : default_iterations(prob, cfg.method);
  LocalizedObjective model(prob);
  model.localize_everywhere();

  std::vector<double> p(m, 0.0), g(m);
  double best_f = model.evaluate(p, g);
  std::vector<double> best_p = p;
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != m) throw std::invalid_argument("dual: warm start dimension mismatch");
    std::vector<double> w(cfg.warm_start->values().begin(), cfg.warm_start->values().end());
    project_price(w, bound);
    const double fw = model.evaluate(w, g);
    p = w;
    if (fw < best_f) {
      best_f = fw;
      best_p = w;
    }
  }
  double f = model.evaluate(p, g);
  const double gnorm0 = norm2(g);
  const double c = cfg.local_radius > 0.0 ? cfg.local_radius : std::abs(f) / std::max(gnorm0, 1e-12);

  std::vector<double> avg(m, 0.0);
  std::size_t averaged = 0;
  std::size_t it = 0;
  bool stationary = false;
  for (; it < budget; ++it) {
    const double gn = norm2(g);
    if (gn == 0.0) {
      stationary = true;
      break;
    }
    const double step = c / std::sqrt(static_cast<double>(it + 1));
    for (std::size_t i = 0; i < m; ++i) p[i] -= step * g[i] / gn;
    project_price(p, bound);
    f = model.evaluate(p, g);
    if (f < best_f) {
      best_f = f;
      best_p = p;
    }
    if (2 * (it + 1) > budget) {
      for (std::size_t i = 0; i < m; ++i) avg[i] += p[i];
      ++averaged;
    }
  }
  if (averaged > 0) {
    for (double& v : avg) v /= static_cast<double>(averaged);
    const double fa = model.evaluate(avg, g);
    if (fa < best_f) {
      best_f = fa;
      best_p = avg;
    }
  }
  DualSolution out;
  out.price = DualPrice(best_p);
  out.objective = best_f;
  out.iterations = it;
  out.lower_bound = stationary ? best_f : primal_lower_bound(prob, best_p);
  out.converged = best_f - out.lower_bound <= cfg.objective_tolerance * std::max(std::abs(best_f), 1e-300);
  return out;
}

/// Exact LP  min d'p + scale * sum y  s.t.  y_j >= r_j - a_j'p,  y, p >= 0,  e'p <= R.
inline DualSolution solve_epigraph(const DualProblem& prob, const SolverConfig& cfg) {
  const std::size_t m = prob.resources(), k = prob.size();
  if (k > 2000) throw std::invalid_argument("epigraph simplex: limited to 2000 orders");
  const double bound = price_bound(prob, cfg.capacity_floor);
  std::vector<std::uint32_t> all(k);
  for (std::size_t j = 0; j < k; ++j) all[j] = static_cast<std::uint32_t>(j);
  const auto r = restricted_epigraph(prob, all, prob.capacity, 0.0, bound);
  DualSolution out;
  if (!r) {
    out.price = DualPrice::zero(m);
    out.objective = dual_objective(prob, out.price);
    return out;
  }
  out.price = DualPrice(r->price);
  out.objective = dual_objective(prob, out.price);
  out.lower_bound = r->value;
  out.converged = true;
  return out;
}

}  // namespace detail

/// Minimizes the dual. Exhausting the iteration budget is not an error: the
/// best iterate is returned with converged = false.
inline DualSolution solve_dual(const DualProblem& prob, const SolverConfig& cfg = {}) {
  prob.validate();
  if (!(cfg.objective_tolerance > 0.0)) throw std::invalid_argument("dual: tolerance must be positive");
  switch (cfg.method) {
    case SolverMethod::ellipsoid:
      return detail::solve_ellipsoid(prob, cfg);
    case SolverMethod::projected_subgradient:
      return detail::solve_subgradient(prob, cfg);
    case SolverMethod::epigraph_simplex:
      return detail::solve_epigraph(prob, cfg);
  }
  throw std::invalid_argument("dual: unknown method");
}

struct OfflineValue {
  double value = 0.0;
  DualPrice price;
  bool converged = false;
};

/// Hindsight LP optimum  max r'x  s.t.  sum_j a_j x_j <= b,  0 <= x <= 1,
/// evaluated as min_p b'p + sum_j (r_j - a_j'p)^+ (strong duality).
inline OfflineValue offline_optimum(const Instance& inst, const SolverConfig& cfg = {}) {
  const DualProblem prob{inst.capacities(), inst.orders().view(), 1.0};
  const DualSolution s = solve_dual(prob, cfg);
  return {s.objective, s.price, s.converged};
}

struct GridMinimum {
  DualPrice price;
  double objective = 0.0;
};

/// Brute-force reference minimum of the dual over the grid pitch * Z^m
/// intersected with { p >= 0, e'p <= R }, for m <= 2. For m = 2 each column
/// p_1 = const is a convex sequence in p_2, so its grid minimum is located by
/// bisection on forward differences.
inline GridMinimum oracle_grid_min(const DualProblem& prob, double pitch, double capacity_floor = 0.05) {
  prob.validate();
  const std::size_t m = prob.resources();
  if (m > 2) throw std::invalid_argument("oracle_grid_min: m must be <= 2");
  if (!(pitch > 0.0)) throw std::invalid_argument("oracle_grid_min: pitch must be positive");
  const double bound = price_bound(prob, capacity_floor);
  const auto steps = static_cast<std::size_t>(std::floor(bound / pitch + 1e-9));
  std::vector<double> p(m, 0.0);
  GridMinimum best{DualPrice::zero(m), dual_objective(prob, p)};
  auto offer = [&](const std::vector<double>& q, double f) {
    if (f < best.objective) {
      best.objective = f;
      best.price = DualPrice(q);
    }
  };
  if (m == 1) {
    for (std::size_t i = 0; i <= steps; ++i) {
      p[0] = static_cast<double>(i) * pitch;
      offer(p, dual_objective(prob, p));
    }
    return best;
  }
  for (std::size_t i = 0; i <= steps; ++i) {
    p[0] = static_cast<double>(i) * pitch;
    auto g = [&](std::size_t j) {
      p[1] = static_cast<double>(j) * pitch;
      return dual_objective(prob, p);
    };
    std::size_t lo = 0, hi = steps - i;  // first j with g(j+1) - g(j) >= 0 lies in [lo, hi]
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (g(mid + 1) - g(mid) >= 0.0)
        hi = mid;
      else
        lo = mid + 1;
    }
    const double f = g(lo);
    offer(p, f);
  }
  return best;
}

}  // namespace olp
