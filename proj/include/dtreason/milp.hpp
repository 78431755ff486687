#pragma once

// Infimum of a linear objective over a conjunction with integer-typed
// variables, by depth-first branch-and-bound on the exact LP relaxation.

#include <optional>
#include <set>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/polyhedra.hpp"
#include "dtreason/simplex.hpp"

namespace dtreason {

struct MilpResult {
  enum class Status { Optimal, Unbounded, Infeasible };
  Status status = Status::Infeasible;
  std::optional<Rat> value;
  std::optional<Assignment> int_witness;
  // Full LP point at the optimum, integer variables included.
  std::optional<Assignment> point;
  // Set when strict primitives were read as non-strict.
  bool coerced_strict = false;

  bool optimal() const { return status == Status::Optimal; }
};

namespace detail {

struct Bound {
  int var;
  bool upper;  // x <= value when true, x >= value otherwise
  Rat value;
};

class BranchAndBound {
 public:
  BranchAndBound(const Conj& c, const std::set<VarId>& int_vars, const LinTerm& objective) {
    std::vector<Primitive> prims;
    for (const auto& p : c.primitives()) {
      Primitive n = normalize(p);
      if (n.is_tautology()) continue;
      if (n.rel == Relation::LT) {
        bool all_int = true;
        for (const auto& [v, a] : n.lhs.coeffs()) all_int = all_int && int_vars.count(v);
        // normalize() leaves integer coefficients, so t < 0 over integers is t + 1 <= 0
        if (all_int) n.lhs.add_constant(Rat(1));
        else coerced_ = true;
        n.rel = Relation::LE;
        n = normalize(n);
      }
      if (n.is_contradiction()) contradiction_ = true;
      prims.push_back(n);
    }
    std::set<VarId> extra = int_vars;
    for (const auto& [v, a] : objective.coeffs()) extra.insert(v);
    idx_ = VarIndex(prims, extra);
    base_.num_vars = 0;
    for (std::size_t i = 0; i < idx_.vars.size(); ++i) base_.add_var(false);
    for (const auto& p : prims)
      if (!p.is_constant()) base_.rows.push_back(to_row(p, idx_));
    base_.objective.assign(base_.num_vars, Rat(0));
    for (const auto& [v, a] : objective.coeffs()) base_.objective[idx_.index.at(v)] = a;
    constant_ = objective.constant();
    for (const auto& v : int_vars) ints_.push_back(idx_.index.at(v));
  }

  MilpResult run() {
    MilpResult r;
    r.coerced_strict = coerced_;
    if (contradiction_) return r;
    std::vector<Bound> bounds;
    lp::Solution root = solve_with(bounds);
    if (root.status == lp::Status::Infeasible) return r;
    if (root.status == lp::Status::Unbounded) {
      // Unbounded relaxation: unbounded below iff some integer point exists,
      // because the recession direction is rational.
      lp::Model feas = base_;
      feas.objective.clear();
      BranchAndBound probe = *this;
      probe.base_ = feas;
      MilpResult f = probe.run();
      r.status = f.optimal() ? MilpResult::Status::Unbounded : MilpResult::Status::Infeasible;
      return r;
    }
    search(bounds, root);
    if (!best_) return r;
    r.status = MilpResult::Status::Optimal;
    r.value = *best_value_ + constant_;
    Assignment w, pt;
    for (std::size_t i = 0; i < idx_.vars.size(); ++i) pt.emplace(idx_.vars[i], (*best_)[i]);
    for (int k : ints_) w.emplace(idx_.vars[k], (*best_)[k]);
    r.int_witness = std::move(w);
    r.point = std::move(pt);
    return r;
  }

 private:
  lp::Solution solve_with(const std::vector<Bound>& bounds) const {
    lp::Model m = base_;
    for (const auto& b : bounds) {
      if (b.upper) m.rows.push_back(lp::Row{{{b.var, Rat(1)}}, false, b.value});
      else m.rows.push_back(lp::Row{{{b.var, Rat(-1)}}, false, -b.value});
    }
    return lp::solve(m);
  }

  // Most fractional: distance of the fractional part to 1/2 smallest, ties by
  // variable order (ints_ is sorted because VarIndex is).
  int pick(const std::vector<Rat>& x) const {
    int best = -1;
    Rat best_gap;
    const Rat half(1, 2);
    for (int k : ints_) {
      if (x[k].is_integer()) continue;
      Rat gap = (x[k].frac() - half).abs();
      if (best < 0 || gap < best_gap) {
        best = k;
        best_gap = gap;
      }
    }
    return best;
  }

  void search(std::vector<Bound>& bounds, const lp::Solution& sol) {
    if (best_value_ && sol.value >= *best_value_) return;
    int k = pick(sol.x);
    if (k < 0) {
      best_value_ = sol.value;
      best_ = sol.x;
      return;
    }
    const Rat lo = sol.x[k].floor();
    for (int side = 0; side < 2; ++side) {
      bounds.push_back(side == 0 ? Bound{k, true, lo} : Bound{k, false, lo + Rat(1)});
      lp::Solution child = solve_with(bounds);
      // A bounded parent keeps every child bounded.
      if (child.status == lp::Status::Optimal) search(bounds, child);
      bounds.pop_back();
    }
  }

  VarIndex idx_{std::vector<Primitive>{}};
  lp::Model base_;
  Rat constant_;
  std::vector<int> ints_;
  bool coerced_ = false;
  bool contradiction_ = false;
  std::optional<Rat> best_value_;
  std::optional<std::vector<Rat>> best_;
};

}  // namespace detail

inline MilpResult bb_inf(const Conj& c, const std::set<VarId>& int_vars, const LinTerm& objective) {
  return detail::BranchAndBound(c, int_vars, objective).run();
}

// A point satisfying every primitive of `c`, strict ones included, with
// integer values on `int_vars`; none when no such point exists. Strictness
// is handled by maximizing a shared slack d <= 1 on the strict rows.
inline std::optional<Assignment> sat_witness(const Conj& c, const std::set<VarId>& int_vars) {
  std::set<VarId> ints;
  for (const auto& v : c.variables())
    if (int_vars.count(v)) ints.insert(v);
  if (ints.empty()) return feasible(c).witness;
  const VarId d = VarId::aux("sat.d");
  Conj lifted;
  bool strict = false;
  for (const auto& p : c.primitives()) {
    Primitive n = normalize(p);
    if (n.rel == Relation::LT) {
      bool all_int = true;
      for (const auto& [v, a] : n.lhs.coeffs()) all_int = all_int && ints.count(v);
      if (!all_int) {
        strict = true;
        lifted.add(Primitive(n.lhs + LinTerm::var(d), Relation::LE));
        continue;
      }
    }
    lifted.add(n);
  }
  if (!strict) {
    MilpResult r = bb_inf(c, ints, LinTerm());
    if (!r.optimal()) return std::nullopt;
    return r.point;
  }
  lifted.add(Primitive(LinTerm::var(d), Relation::LE, LinTerm(Rat(1))));
  MilpResult r = bb_inf(lifted, ints, -LinTerm::var(d));
  if (!r.optimal() || r.value->sign() >= 0) return std::nullopt;
  Assignment w = *r.point;
  w.erase(d);
  return w;
}

inline bool int_feasible(const Conj& c, const std::set<VarId>& int_vars) {
  return bb_inf(c, int_vars, LinTerm()).optimal();
}

}  // namespace dtreason
