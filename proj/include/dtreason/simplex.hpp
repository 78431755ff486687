#pragma once

// Dense two-phase primal simplex over exact rationals with Bland's rule.
//
// Solves  min c^T x  s.t.  A_i x <= b_i  or  A_i x = b_i,
// with each variable either free or non-negative.

#include <cstddef>
#include <utility>
#include <vector>

#include "dtreason/rational.hpp"

namespace dtreason::lp {

struct Row {
  std::vector<std::pair<int, Rat>> coeffs;
  bool equality = false;
  Rat rhs;
};

struct Model {
  int num_vars = 0;
  std::vector<bool> nonneg;       // per variable; default free
  std::vector<Row> rows;
  std::vector<Rat> objective;     // per variable; empty means zero objective

  int add_var(bool non_negative = false) {
    nonneg.push_back(non_negative);
    return num_vars++;
  }
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  Rat value;
  std::vector<Rat> x;
};

namespace detail {

class Tableau {
 public:
  // rows_ x (cols_ + 1); the last column is the right-hand side. Row m_ is the
  // reduced-cost row; its rhs entry holds minus the objective value.
  std::vector<std::vector<Rat>> t;
  std::vector<int> basis;
  std::vector<bool> allowed;
  int m = 0;
  int n = 0;

  void pivot(int r, int c) {
    Rat inv = Rat(1) / t[r][c];
    auto& pr = t[r];
    for (int j = 0; j <= n; ++j)
      if (!pr[j].is_zero()) pr[j] *= inv;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      auto& row = t[i];
      if (row[c].is_zero()) continue;
      Rat f = row[c];
      for (int j = 0; j <= n; ++j)
        if (!pr[j].is_zero()) row[j] -= f * pr[j];
    }
    basis[r] = c;
  }

  void set_objective(const std::vector<Rat>& cost) {
    auto& z = t[m];
    for (int j = 0; j <= n; ++j) z[j] = j < static_cast<int>(cost.size()) ? cost[j] : Rat(0);
    for (int i = 0; i < m; ++i) {
      const Rat& cb = basis[i] < static_cast<int>(cost.size()) ? cost[basis[i]] : zero_;
      if (cb.is_zero()) continue;
      for (int j = 0; j <= n; ++j)
        if (!t[i][j].is_zero()) z[j] -= cb * t[i][j];
    }
  }

  // Returns false if unbounded.
  bool optimize() {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        if (allowed[j] && t[m][j].sign() < 0) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Rat best;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter].sign() <= 0) continue;
        Rat ratio = t[i][n] / t[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void drop_row(int r) {
    t.erase(t.begin() + r);
    basis.erase(basis.begin() + r);
    --m;
  }

 private:
  Rat zero_;
};

}  // namespace detail

inline Solution solve(const Model& model) {
  const int nv = model.num_vars;
  // Column layout: structural (one per nonneg var, two per free var), slacks, artificials.
  std::vector<int> pos_col(nv), neg_col(nv, -1);
  int cols = 0;
  for (int v = 0; v < nv; ++v) {
    pos_col[v] = cols++;
    bool nn = v < static_cast<int>(model.nonneg.size()) && model.nonneg[v];
    if (!nn) neg_col[v] = cols++;
  }
  const int m = static_cast<int>(model.rows.size());
  std::vector<int> slack_col(m, -1);
  for (int i = 0; i < m; ++i)
    if (!model.rows[i].equality) slack_col[i] = cols++;

  std::vector<std::vector<Rat>> rows(m);
  std::vector<int> basis(m, -1);
  std::vector<int> artificial_rows;
  for (int i = 0; i < m; ++i) {
    const Row& r = model.rows[i];
    rows[i].assign(cols + 1, Rat(0));
    for (const auto& [v, a] : r.coeffs) {
      rows[i][pos_col[v]] += a;
      if (neg_col[v] >= 0) rows[i][neg_col[v]] -= a;
    }
    if (slack_col[i] >= 0) rows[i][slack_col[i]] = 1;
    rows[i][cols] = r.rhs;
    if (r.rhs.sign() < 0)
      for (auto& e : rows[i]) e = -e;
    if (slack_col[i] >= 0 && rows[i][slack_col[i]].sign() > 0) basis[i] = slack_col[i];
    else artificial_rows.push_back(i);
  }
  const int first_art = cols;
  const int total = cols + static_cast<int>(artificial_rows.size());

  detail::Tableau tab;
  tab.m = m;
  tab.n = total;
  tab.t.resize(m + 1);
  for (int i = 0; i < m; ++i) {
    tab.t[i].assign(total + 1, Rat(0));
    for (int j = 0; j < cols; ++j) tab.t[i][j] = rows[i][j];
    tab.t[i][total] = rows[i][cols];
  }
  tab.t[m].assign(total + 1, Rat(0));
  for (std::size_t k = 0; k < artificial_rows.size(); ++k) {
    int i = artificial_rows[k];
    tab.t[i][first_art + static_cast<int>(k)] = 1;
    basis[i] = first_art + static_cast<int>(k);
  }
  tab.basis = basis;
  tab.allowed.assign(total, true);

  if (!artificial_rows.empty()) {
    std::vector<Rat> phase1(total, Rat(0));
    for (int j = first_art; j < total; ++j) phase1[j] = 1;
    tab.set_objective(phase1);
    tab.optimize();
    if (tab.t[tab.m][total].sign() != 0) return {Status::Infeasible, Rat(0), {}};
    for (int i = 0; i < tab.m; ++i) {
      if (tab.basis[i] < first_art) continue;
      int c = -1;
      for (int j = 0; j < first_art; ++j) {
        if (!tab.t[i][j].is_zero()) {
          c = j;
          break;
        }
      }
      if (c >= 0) {
        tab.pivot(i, c);
      } else {
        tab.drop_row(i);
        --i;
      }
    }
    for (int j = first_art; j < total; ++j) tab.allowed[j] = false;
  }

  std::vector<Rat> cost(total, Rat(0));
  for (int v = 0; v < nv && v < static_cast<int>(model.objective.size()); ++v) {
    cost[pos_col[v]] = model.objective[v];
    if (neg_col[v] >= 0) cost[neg_col[v]] = -model.objective[v];
  }
  tab.set_objective(cost);
  if (!tab.optimize()) return {Status::Unbounded, Rat(0), {}};

  std::vector<Rat> colval(total, Rat(0));
  for (int i = 0; i < tab.m; ++i) colval[tab.basis[i]] = tab.t[i][total];
  Solution sol;
  sol.status = Status::Optimal;
  sol.x.resize(nv);
  for (int v = 0; v < nv; ++v) {
    sol.x[v] = colval[pos_col[v]];
    if (neg_col[v] >= 0) sol.x[v] -= colval[neg_col[v]];
  }
  sol.value = -tab.t[tab.m][total];
  return sol;
}

}  // namespace dtreason::lp
