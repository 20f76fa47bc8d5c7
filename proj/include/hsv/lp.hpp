#pragma once

#include <hsv/rational.hpp>

#include <map>
#include <optional>
#include <vector>

namespace hsv::lp {

/// Feasibility problem A x = b, x >= 0 over exact rationals. Rows are
/// sparse maps from column index to coefficient.
struct Problem {
  std::size_t cols = 0;
  std::vector<std::map<std::size_t, Rational>> rows;
  std::vector<Rational> rhs;

  std::size_t add_row(std::map<std::size_t, Rational> row, Rational b) {
    rows.push_back(std::move(row));
    rhs.push_back(std::move(b));
    return rows.size() - 1;
  }
};

enum class Outcome { Feasible, Infeasible, IterationLimit };

struct Result {
  Outcome outcome = Outcome::Infeasible;
  std::vector<Rational> x;
};

/// Phase-one simplex with Bland's rule (no cycling).
inline Result solve(const Problem& p, std::size_t max_pivots = 20000) {
  const std::size_t m = p.rows.size(), n = p.cols, width = n + m;
  // tableau row i: coefficients over [x | artificials], then rhs
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(width + 1));
  for (std::size_t i = 0; i < m; ++i) {
    bool flip = p.rhs[i] < 0;
    for (const auto& [j, c] : p.rows[i]) t[i][j] = flip ? Rational(-c) : c;
    t[i][n + i] = 1;
    t[i][width] = flip ? Rational(-p.rhs[i]) : p.rhs[i];
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;
  // reduced costs of the phase-one objective (sum of artificials)
  std::vector<Rational> cost(width + 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= width; ++j)
      if (j < n || j == width) cost[j] -= t[i][j];

  for (std::size_t iter = 0;; ++iter) {
    if (iter >= max_pivots) return {Outcome::IterationLimit, {}};
    std::size_t enter = width;
    for (std::size_t j = 0; j < width; ++j)
      if (cost[j] < 0) {
        enter = j;
        break;
      }
    if (enter == width) break;
    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][width] / t[i][enter];
      if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) break;  // unbounded cannot happen in phase one
    Rational piv = t[leave][enter];
    for (auto& x : t[leave])
      if (x != 0) x /= piv;
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= width; ++j)
      if (t[leave][j] != 0) nz.push_back(j);
    auto eliminate = [&](std::vector<Rational>& row) {
      if (row[enter] == 0) return;
      Rational f = row[enter];
      for (auto j : nz) row[j] -= f * t[leave][j];
    };
    for (std::size_t i = 0; i < m; ++i)
      if (i != leave) eliminate(t[i]);
    eliminate(cost);
    basis[leave] = enter;
  }
  if (cost[width] != 0) return {Outcome::Infeasible, {}};
  Result r{Outcome::Feasible, std::vector<Rational>(n)};
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) r.x[basis[i]] = t[i][width];
  return r;
}

}  // namespace hsv::lp
