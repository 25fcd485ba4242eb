#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include "olp/core.hpp"

namespace olp::testing {

struct Row {
  double r;
  std::vector<double> a;
};

inline OrderTable table(std::size_t m, std::initializer_list<Row> rows) {
  OrderTable t(m);
  for (const auto& row : rows) t.push_back(row.r, row.a);
  return t;
}

inline Instance instance(std::vector<double> b, std::initializer_list<Row> rows) {
  const std::size_t m = b.size();
  return Instance(table(m, rows), std::move(b));
}

// Random orders with rewards in [0, 5] and nonnegative rows.
inline OrderTable random_table(std::mt19937_64& g, std::size_t k, std::size_t m) {
  std::uniform_real_distribution<double> r(0.0, 5.0);
  std::normal_distribution<double> a(0.5, 1.0);
  OrderTable t(m);
  std::vector<double> row(m);
  for (std::size_t j = 0; j < k; ++j) {
    for (double& v : row) v = std::abs(a(g));
    t.push_back(r(g), row);
  }
  return t;
}

}  // namespace olp::testing
