#pragma once

// Domain types shared by the online LP library: orders, instances, shadow
// prices, run results and regret reports, plus instance validation against
// the boundedness / linear-growth assumptions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace olp {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// One arrival: bid price and resource-consumption row.
struct Order {
  double reward = 0.0;
  std::vector<double> consumption;
};

/// Non-owning view of an order stored inside an OrderTable.
struct OrderRef {
  double reward;
  std::span<const double> consumption;
};

/// Non-owning view over a contiguous run of orders (row-major consumption).
class OrderView {
 public:
  OrderView() = default;
  OrderView(std::span<const double> rewards, std::span<const double> rows, std::size_t m)
      : rewards_(rewards), rows_(rows), m_(m) {
    if (rows.size() != rewards.size() * m) throw std::invalid_argument("OrderView: shape mismatch");
  }

  std::size_t size() const { return rewards_.size(); }
  std::size_t resources() const { return m_; }
  bool empty() const { return rewards_.empty(); }

  double reward(std::size_t j) const { return rewards_[j]; }
  std::span<const double> row(std::size_t j) const { return rows_.subspan(j * m_, m_); }
  OrderRef operator[](std::size_t j) const { return {rewards_[j], row(j)}; }

  std::span<const double> rewards() const { return rewards_; }
  std::span<const double> rows() const { return rows_; }

  OrderView subview(std::size_t first, std::size_t count) const {
    return {rewards_.subspan(first, count), rows_.subspan(first * m_, count * m_), m_};
  }
  OrderView prefix(std::size_t count) const { return subview(0, count); }

 private:
  std::span<const double> rewards_;
  std::span<const double> rows_;
  std::size_t m_ = 0;
};

/// Owning, row-major storage for a sequence of orders.
class OrderTable {
 public:
  explicit OrderTable(std::size_t m = 0) : m_(m) {}
  OrderTable(std::size_t m, std::vector<double> rewards, std::vector<double> rows)
      : m_(m), rewards_(std::move(rewards)), rows_(std::move(rows)) {
    if (rows_.size() != rewards_.size() * m_) throw std::invalid_argument("OrderTable: shape mismatch");
  }

  void reserve(std::size_t n) {
    rewards_.reserve(n);
    rows_.reserve(n * m_);
  }

  void push_back(double reward, std::span<const double> row) {
    if (row.size() != m_) throw std::invalid_argument("OrderTable: row length differs from m");
    rewards_.push_back(reward);
    rows_.insert(rows_.end(), row.begin(), row.end());
  }
  void push_back(const Order& o) { push_back(o.reward, o.consumption); }

  std::size_t size() const { return rewards_.size(); }
  std::size_t resources() const { return m_; }

  OrderRef operator[](std::size_t j) const { return view()[j]; }
  OrderView view() const { return {rewards_, rows_, m_}; }
  operator OrderView() const { return view(); }

  std::span<const double> rewards() const { return rewards_; }
  std::span<const double> rows() const { return rows_; }

 private:
  std::size_t m_;
  std::vector<double> rewards_;
  std::vector<double> rows_;
};

/// A full realized sample path of n orders together with capacities b.
/// The per-period capacity is d = b / n.
class Instance {
 public:
  Instance(OrderTable orders, std::vector<double> capacities)
      : orders_(std::move(orders)), capacities_(std::move(capacities)) {
    if (orders_.size() == 0) throw std::invalid_argument("Instance: no orders");
    if (capacities_.size() != orders_.resources())
      throw std::invalid_argument("Instance: capacity vector length differs from m");
    per_period_.resize(capacities_.size());
    const double n = static_cast<double>(orders_.size());
    for (std::size_t i = 0; i < capacities_.size(); ++i) {
      if (!(capacities_[i] >= 0.0)) throw std::invalid_argument("Instance: negative capacity");
      per_period_[i] = capacities_[i] / n;
    }
  }

  /// Builds capacities b = n * d from a per-period capacity vector.
  static Instance from_per_period(OrderTable orders, std::span<const double> d) {
    std::vector<double> b(d.begin(), d.end());
    for (double& v : b) v *= static_cast<double>(orders.size());
    return Instance(std::move(orders), std::move(b));
  }

  std::size_t horizon() const { return orders_.size(); }
  std::size_t resources() const { return orders_.resources(); }
  const OrderTable& orders() const { return orders_; }
  std::span<const double> capacities() const { return capacities_; }
  std::span<const double> per_period_capacity() const { return per_period_; }

 private:
  OrderTable orders_;
  std::vector<double> capacities_;
  std::vector<double> per_period_;
};

/// Nonnegative shadow-price vector.
class DualPrice {
 public:
  DualPrice() = default;
  explicit DualPrice(std::vector<double> values) : values_(std::move(values)) {
    for (double& v : values_) {
      if (std::isnan(v) || v < 0.0) throw std::invalid_argument("DualPrice: entries must be >= 0");
      v = v + 0.0;  // normalize -0.0
    }
  }
  static DualPrice zero(std::size_t m) { return DualPrice(std::vector<double>(m, 0.0)); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

  friend bool operator==(const DualPrice&, const DualPrice&) = default;

 private:
  std::vector<double> values_;
};

/// Membership in { p >= 0, e'p <= bound } up to an absolute slack.
inline bool in_price_set(const DualPrice& p, double bound, double slack = 1e-9) {
  return p.sum() <= bound + slack;
}

inline double squared_distance(const DualPrice& a, const DualPrice& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Dual price in force after a given step (it governs steps step+1, ...).
struct PricePoint {
  std::size_t step = 0;
  DualPrice price;
};

struct RunResult {
  std::vector<std::uint8_t> decisions;
  double revenue = 0.0;
  std::vector<double> leftover;
  std::size_t depletion_time = 0;
  std::vector<PricePoint> dual_trajectory;
  std::vector<double> revenue_curve;
  std::size_t solves = 0;
  std::size_t unconverged_solves = 0;
};

struct RegretReport {
  std::string policy;
  std::vector<std::size_t> horizon_grid;
  std::vector<double> mean_regret;
  std::vector<double> regret_std;
  std::vector<double> mean_depletion_gap;
  std::vector<double> mean_leftover_binding;
  std::vector<std::size_t> solver_flags;
  std::size_t seeds_used = 0;
};

/// Bounds r̄, ā, d̲, d̄ of the boundedness / linear-growth assumption.
struct InstanceBounds {
  double reward_bound = 5.0;
  double row_norm_bound = 1.0;
  double capacity_lower = 0.05;
  double capacity_upper = 1.0;
};

struct Violation {
  std::string clause;
  std::size_t index = 0;
  std::string message;
};

/// Reports every violated clause; an empty result means all clauses hold.
inline std::vector<Violation> validate_instance(const Instance& inst, const InstanceBounds& bounds) {
  std::vector<Violation> out;
  const std::size_t n = inst.horizon();
  const std::size_t m = inst.resources();
  if (n <= m) out.push_back({"growth", 0, "n>m violated: n=" + std::to_string(n) + ", m=" + std::to_string(m)});
  const OrderView orders = inst.orders().view();
  for (std::size_t j = 0; j < n; ++j) {
    if (!(std::abs(orders.reward(j)) <= bounds.reward_bound))
      out.push_back({"reward", j, "reward bound violated at index " + std::to_string(j)});
    if (!(norm2(orders.row(j)) <= bounds.row_norm_bound))
      out.push_back({"consumption", j, "consumption norm bound violated at index " + std::to_string(j)});
  }
  const auto d = inst.per_period_capacity();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(d[i] > bounds.capacity_lower && d[i] < bounds.capacity_upper))
      out.push_back({"capacity", i, "per-period capacity outside (d_lo, d_hi) at resource " + std::to_string(i)});
  }
  return out;
}

inline double max_row_norm(OrderView orders) {
  double a = 0.0;
  for (std::size_t j = 0; j < orders.size(); ++j) a = std::max(a, norm2(orders.row(j)));
  return a;
}

inline double max_abs_reward(OrderView orders) {
  double r = 0.0;
  for (double v : orders.rewards()) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace olp
