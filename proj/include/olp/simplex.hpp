#pragma once

// Dense two-phase bounded-variable simplex with Bland's rule:
//
//   maximize c'x  subject to  A x <= b,  0 <= x <= upper
//
// Upper bounds are handled by bound flipping, so they cost no rows. Rows with
// b_i < 0 get an artificial variable that phase one drives out. Meant for
// a handful of rows and up to a few thousand columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace olp {

struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> upper;  // +inf when unbounded

  LinearProgram(std::size_t r, std::size_t n)
      : rows(r), cols(n), A(r * n, 0.0), b(r, 0.0), c(n, 0.0), upper(n, std::numeric_limits<double>::infinity()) {}
  double& at(std::size_t i, std::size_t j) { return A[i * cols + j]; }
};

enum class LpStatus { optimal, infeasible, unbounded, pivot_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;  // one multiplier per row, >= 0 at optimality
  std::size_t pivots = 0;
};

inline LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9, std::size_t max_pivots = 0) {
  const std::size_t m = lp.rows, n = lp.cols;
  if (lp.A.size() != m * n || lp.b.size() != m || lp.c.size() != n || lp.upper.size() != n)
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  for (double u : lp.upper)
    if (!(u >= 0.0)) throw std::invalid_argument("solve_lp: upper bounds must be >= 0");
  if (max_pivots == 0) max_pivots = 50 * (m + n) + 1000;
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::size_t nart = 0;
  for (double bi : lp.b)
    if (bi < 0.0) ++nart;
  const std::size_t slack0 = n, art0 = n + m, ncol = n + m + nart;
  const std::size_t w = ncol;

  std::vector<double> tab(m * w, 0.0);  // B^{-1} [A I Art]
  std::vector<double> obj(w, 0.0);      // reduced costs
  std::vector<double> beta(m);          // basic values
  std::vector<double> ub(ncol, inf);
  std::vector<char> at_upper(ncol, 0);
  std::vector<std::size_t> basis(m);
  std::vector<double> sign(m, 1.0);
  for (std::size_t j = 0; j < n; ++j) ub[j] = lp.upper[j];

  std::size_t next_art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    sign[i] = lp.b[i] < 0.0 ? -1.0 : 1.0;
    double* row = &tab[i * w];
    for (std::size_t j = 0; j < n; ++j) row[j] = sign[i] * lp.A[i * n + j];
    row[slack0 + i] = sign[i];
    beta[i] = sign[i] * lp.b[i];
    if (sign[i] < 0.0) {
      row[next_art] = 1.0;
      basis[i] = next_art++;
    } else {
      basis[i] = slack0 + i;
    }
  }

  LpSolution sol;
  std::size_t pivots = 0;

  auto pivot = [&](std::size_t r, std::size_t e) {
    double* pr = &tab[r * w];
    const double inv = 1.0 / pr[e];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[e] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      double* pi = &tab[i * w];
      const double f = pi[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) pi[j] -= f * pr[j];
      pi[e] = 0.0;
    }
    const double f = obj[e];
    if (f != 0.0) {
      for (std::size_t j = 0; j < w; ++j) obj[j] -= f * pr[j];
      obj[e] = 0.0;
    }
  };

  auto optimize = [&](const std::vector<double>& cost, std::size_t allowed) -> LpStatus {
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t j = 0; j < ncol; ++j) obj[j] = -cost[j];
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      const double* row = &tab[i * w];
      for (std::size_t j = 0; j < ncol; ++j) obj[j] += cb * row[j];
    }
    for (;;) {
      // Bland: lowest-index improving column; at-upper columns improve by decreasing
      std::size_t enter = ncol;
      double dir = 1.0;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (!at_upper[j] && obj[j] < -tol) {
          enter = j;
          dir = 1.0;
          break;
        }
        if (at_upper[j] && obj[j] > tol) {
          enter = j;
          dir = -1.0;
          break;
        }
      }
      if (enter == ncol) return LpStatus::optimal;

      // x_B moves by -dir * alpha * t as the entering variable moves by t
      double best = ub[enter];
      std::size_t leave = m;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = dir * tab[i * w + enter];
        double ratio;
        bool to_upper;
        if (a > tol) {
          ratio = std::max(beta[i], 0.0) / a;
          to_upper = false;
        } else if (a < -tol && ub[basis[i]] < inf) {
          ratio = std::max(ub[basis[i]] - beta[i], 0.0) / -a;
          to_upper = true;
        } else {
          continue;
        }
        bool take;
        if (leave == m)
          take = ratio < best;  // ties with the bound flip keep the flip
        else
          take = ratio < best - tol || (ratio <= best + tol && basis[i] < basis[leave]);
        if (take) {
          best = std::min(best, ratio);
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (leave == m && best == inf) return LpStatus::unbounded;
      if (++pivots > max_pivots) return LpStatus::pivot_limit;
      const double t = best;
      for (std::size_t i = 0; i < m; ++i) beta[i] -= dir * tab[i * w + enter] * t;
      if (leave == m) {  // bound flip
        at_upper[enter] = !at_upper[enter];
        continue;
      }
      const double entering_value = (at_upper[enter] ? ub[enter] : 0.0) + dir * t;
      const std::size_t out = basis[leave];
      at_upper[out] = leave_to_upper ? 1 : 0;
      at_upper[enter] = 0;
      pivot(leave, enter);
      basis[leave] = enter;
      beta[leave] = entering_value;
    }
  };

  if (nart > 0) {
    std::vector<double> phase1(ncol, 0.0);
    for (std::size_t j = art0; j < ncol; ++j) phase1[j] = -1.0;
    const LpStatus st = optimize(phase1, ncol);
    if (st == LpStatus::pivot_limit) {
      sol.status = st;
      sol.pivots = pivots;
      return sol;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= art0) infeas += beta[i];
    double scale = 1.0;
    for (double bi : lp.b) scale = std::max(scale, std::abs(bi));
    if (infeas > 1e-9 * scale) {
      sol.status = LpStatus::infeasible;
      sol.pivots = pivots;
      return sol;
    }
    // drive zero-level artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < art0) continue;
      for (std::size_t j = 0; j < art0; ++j)
        if (std::abs(tab[i * w + j]) > tol) {
          const double value = at_upper[j] ? ub[j] : 0.0;
          pivot(i, j);
          basis[i] = j;
          beta[i] = value;
          at_upper[j] = 0;
          break;
        }
    }
  }

  std::vector<double> cost(ncol, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.c[j];
  sol.status = optimize(cost, art0);
  sol.pivots = pivots;
  if (sol.status != LpStatus::optimal) return sol;

  std::vector<double> value(ncol, 0.0);
  for (std::size_t j = 0; j < ncol; ++j)
    if (at_upper[j]) value[j] = ub[j];
  for (std::size_t i = 0; i < m; ++i) value[basis[i]] = beta[i];
  sol.x.assign(value.begin(), value.begin() + static_cast<std::ptrdiff_t>(n));
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  sol.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.duals[i] = obj[slack0 + i];  // slack column is sign_i e_i
  return sol;
}

}  // namespace olp
