#pragma once

// Plain-text instance format:
//
//   n m b_1 ... b_m
//   r_1 a_11 ... a_1m
//   ...
//   r_n a_n1 ... a_nm
//
// Fields are whitespace separated; lines starting with '#' are ignored.
// Numbers are written in shortest round-trip form, so write/read is exact.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "olp/core.hpp"

namespace olp {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline void write_instance(std::ostream& os, const Instance& inst) {
  const std::size_t m = inst.resources();
  os << inst.horizon() << ' ' << m;
  for (double b : inst.capacities()) os << ' ' << format_number(b);
  os << '\n';
  const OrderView orders = inst.orders().view();
  for (std::size_t j = 0; j < orders.size(); ++j) {
    os << format_number(orders.reward(j));
    for (double a : orders.row(j)) os << ' ' << format_number(a);
    os << '\n';
  }
}

inline Instance read_instance(std::istream& is) {
  std::string text;
  {
    std::ostringstream buf;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line[0] == '#') continue;
      buf << line << '\n';
    }
    text = buf.str();
  }
  std::istringstream in(text);
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m) || n == 0 || m == 0) throw std::invalid_argument("instance: bad header");
  auto next = [&in]() {
    std::string tok;
    if (!(in >> tok)) throw std::invalid_argument("instance: truncated input");
    return parse_number(tok);
  };
  std::vector<double> b(m);
  for (double& v : b) v = next();
  OrderTable orders(m);
  orders.reserve(n);
  std::vector<double> row(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = next();
    for (double& v : row) v = next();
    orders.push_back(r, row);
  }
  std::string extra;
  if (in >> extra) throw std::invalid_argument("instance: trailing data '" + extra + "'");
  return Instance(std::move(orders), std::move(b));
}

inline void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_instance(os, inst);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_instance(is);
}

}  // namespace olp
