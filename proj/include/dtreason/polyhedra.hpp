#pragma once

// Decision procedures on conjunctions of linear constraints: real
// satisfiability with strict inequalities, Fourier-Motzkin projection,
// redundancy removal and relaxation of strict inequalities.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/simplex.hpp"

namespace dtreason {

struct FeasibilityResult {
  enum class Status { Feasible, Infeasible };
  Status status = Status::Infeasible;
  std::optional<Assignment> witness;

  bool feasible() const { return status == Status::Feasible; }
};

namespace detail {

// Dense index over the variables of a primitive list.
struct VarIndex {
  std::vector<VarId> vars;
  std::map<VarId, int> index;

  explicit VarIndex(const std::vector<Primitive>& prims, const std::set<VarId>& extra = {}) {
    for (const auto& p : prims)
      for (const auto& [v, c] : p.lhs.coeffs())
        if (index.emplace(v, 0).second) vars.push_back(v);
    for (const auto& v : extra)
      if (index.emplace(v, 0).second) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    for (std::size_t i = 0; i < vars.size(); ++i) index[vars[i]] = static_cast<int>(i);
  }
};

inline lp::Row to_row(const Primitive& p, const VarIndex& idx) {
  lp::Row row;
  for (const auto& [v, c] : p.lhs.coeffs()) row.coeffs.emplace_back(idx.index.at(v), c);
  row.rhs = -p.lhs.constant();
  row.equality = p.rel == Relation::EQ;
  return row;
}

// Primitives are assumed normalized (relations LT, LE, EQ only).
inline FeasibilityResult feasible_prims(const std::vector<Primitive>& prims) {
  for (const auto& p : prims)
    if (p.is_contradiction()) return {};
  VarIndex idx(prims);
  lp::Model model;
  for (std::size_t i = 0; i < idx.vars.size(); ++i) model.add_var(false);
  bool any_strict = false;
  int delta = -1;
  for (const auto& p : prims) {
    if (p.is_constant()) continue;
    lp::Row row = to_row(p, idx);
    if (p.rel == Relation::LT) {
      if (delta < 0) delta = model.add_var(true);
      row.coeffs.emplace_back(delta, Rat(1));
      any_strict = true;
    }
    model.rows.push_back(std::move(row));
  }
  if (any_strict) {
    model.rows.push_back(lp::Row{{{delta, Rat(1)}}, false, Rat(1)});
    model.objective.assign(model.num_vars, Rat(0));
    model.objective[delta] = -1;
  }
  lp::Solution sol = lp::solve(model);
  if (sol.status == lp::Status::Infeasible) return {};
  if (any_strict && sol.x[delta].sign() <= 0) return {};
  FeasibilityResult r;
  r.status = FeasibilityResult::Status::Feasible;
  Assignment w;
  for (std::size_t i = 0; i < idx.vars.size(); ++i) w.emplace(idx.vars[i], sol.x[i]);
  r.witness = std::move(w);
  return r;
}

// Negations of a normalized inequality (EQ handled by the caller).
inline Primitive negate_inequality(const Primitive& p) {
  // not (t <= 0)  is  t > 0;   not (t < 0)  is  t >= 0
  return normalize(Primitive(p.lhs, p.rel == Relation::LE ? Relation::GT : Relation::GE));
}

}  // namespace detail

inline FeasibilityResult feasible(const Conj& c) { return detail::feasible_prims(c.primitives()); }

// True iff every real solution of `c` satisfies `p`.
inline bool entails(const Conj& c, const Primitive& raw) {
  Primitive p = normalize(raw);
  if (p.is_tautology()) return true;
  std::vector<Primitive> prims = c.primitives();
  if (p.rel == Relation::EQ) {
    for (Relation r : {Relation::LT, Relation::GT}) {
      auto q = prims;
      q.push_back(normalize(Primitive(p.lhs, r)));
      if (detail::feasible_prims(q).feasible()) return false;
    }
    return true;
  }
  prims.push_back(detail::negate_inequality(p));
  return !detail::feasible_prims(prims).feasible();
}

namespace detail {

// Equalities kept in reduced row-echelon form: pivot variable -> expression
// over non-pivot variables. Pivots are the lowest variable of each reduced row.
class EqualitySystem {
 public:
  // Returns false on contradiction.
  bool add(const LinTerm& raw) {
    LinTerm t = reduce(raw);
    if (t.is_constant()) return t.constant().is_zero();
    const auto& [v, a] = *t.coeffs().begin();
    VarId pivot = v;
    LinTerm expr = t;
    expr.add(pivot, -a);
    expr *= Rat(-1) / a;
    for (auto& [pv, e] : pivots_) e = e.substitute(pivot, expr);
    pivots_.emplace_back(pivot, expr);
    return true;
  }

  LinTerm reduce(const LinTerm& t) const {
    LinTerm out = t;
    for (const auto& [pv, e] : pivots_) out = out.substitute(pv, e);
    return out;
  }

  std::vector<Primitive> primitives() const {
    std::vector<std::pair<VarId, LinTerm>> sorted = pivots_;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Primitive> out;
    for (const auto& [pv, e] : sorted) out.push_back(normalize(Primitive(LinTerm::var(pv) - e, Relation::EQ)));
    return out;
  }

  bool empty() const { return pivots_.empty(); }

 private:
  std::vector<std::pair<VarId, LinTerm>> pivots_;
};

inline void push_unique(std::vector<Primitive>& v, const Primitive& p) {
  if (std::find(v.begin(), v.end(), p) == v.end()) v.push_back(p);
}

// Single pass in list order; each inequality is tested against the
// equalities and the inequalities still present.
inline std::vector<Primitive> remove_redundant(const std::vector<Primitive>& eqs, std::vector<Primitive> ineqs) {
  for (std::size_t i = 0; i < ineqs.size();) {
    std::vector<Primitive> sys = eqs;
    for (std::size_t j = 0; j < ineqs.size(); ++j)
      if (j != i) sys.push_back(ineqs[j]);
    sys.push_back(negate_inequality(ineqs[i]));
    if (!feasible_prims(sys).feasible()) {
      ineqs.erase(ineqs.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return ineqs;
}

}  // namespace detail

// Equivalent conjunction without redundant primitives. Equalities (explicit
// and implied) are brought into reduced row-echelon form and substituted into
// the inequalities; the remaining inequalities are pruned by LP entailment.
inline Conj minimal_form(const Conj& c) {
  std::vector<Primitive> eq_in, ineqs;
  for (const auto& p : c.primitives()) {
    Primitive n = normalize(p);
    if (n.is_tautology()) continue;
    if (n.is_contradiction()) {
      Conj u = Conj::unsatisfiable();
      u.set_provenance(c.provenance());
      return u;
    }
    (n.rel == Relation::EQ ? eq_in : ineqs).push_back(n);
  }
  auto unsat = [&c] {
    Conj u = Conj::unsatisfiable();
    u.set_provenance(c.provenance());
    return u;
  };
  {
    std::vector<Primitive> all = eq_in;
    all.insert(all.end(), ineqs.begin(), ineqs.end());
    if (!detail::feasible_prims(all).feasible()) return unsat();
  }

  detail::EqualitySystem eqs;
  for (const auto& e : eq_in)
    if (!eqs.add(e.lhs)) return unsat();

  for (;;) {
    std::vector<Primitive> reduced;
    for (const auto& p : ineqs) {
      Primitive r = normalize(Primitive(eqs.reduce(p.lhs), p.rel));
      if (r.is_tautology()) continue;
      if (r.is_contradiction()) return unsat();
      detail::push_unique(reduced, r);
    }
    ineqs = std::move(reduced);

    // Implied equalities: a non-strict t <= 0 such that t < 0 is infeasible.
    std::vector<Primitive> base = eqs.primitives();
    base.insert(base.end(), ineqs.begin(), ineqs.end());
    bool found = false;
    for (std::size_t i = 0; i < ineqs.size(); ++i) {
      if (ineqs[i].rel != Relation::LE) continue;
      std::vector<Primitive> sys = base;
      sys.push_back(normalize(Primitive(ineqs[i].lhs, Relation::LT)));
      if (!detail::feasible_prims(sys).feasible()) {
        if (!eqs.add(ineqs[i].lhs)) return unsat();
        found = true;
      }
    }
    if (!found) break;
  }

  std::vector<Primitive> eq_out = eqs.primitives();
  std::vector<Primitive> kept = detail::remove_redundant(eq_out, ineqs);
  Conj out;
  for (const auto& p : eq_out) out.add(p);
  for (const auto& p : kept) out.add(p);
  out.set_provenance(c.provenance());
  return out;
}

// Existential projection onto `keep` (all variables are treated as reals).
inline Conj project(const Conj& c, const std::set<VarId>& keep) {
  auto unsat = [&c] {
    Conj u = Conj::unsatisfiable();
    u.set_provenance(c.provenance());
    return u;
  };
  if (c.has_contradiction() || !feasible(c).feasible()) return unsat();

  std::vector<Primitive> prims;
  for (const auto& p : c.primitives()) {
    Primitive n = normalize(p);
    if (!n.is_tautology()) detail::push_unique(prims, n);
  }
  auto eliminated = [&keep](const VarId& v) { return keep.count(v) == 0; };

  // Gaussian substitution of equalities that mention eliminated variables.
  for (;;) {
    auto it = std::find_if(prims.begin(), prims.end(), [&](const Primitive& p) {
      if (p.rel != Relation::EQ) return false;
      for (const auto& [v, a] : p.lhs.coeffs())
        if (eliminated(v)) return true;
      return false;
    });
    if (it == prims.end()) break;
    Primitive eq = *it;
    prims.erase(it);
    VarId pivot;
    Rat a;
    for (const auto& [v, coef] : eq.lhs.coeffs()) {
      if (eliminated(v)) {
        pivot = v;
        a = coef;
        break;
      }
    }
    LinTerm expr = eq.lhs;
    expr.add(pivot, -a);
    expr *= Rat(-1) / a;
    std::vector<Primitive> next;
    for (const auto& p : prims) {
      Primitive r = normalize(Primitive(p.lhs.substitute(pivot, expr), p.rel));
      if (r.is_tautology()) continue;
      if (r.is_contradiction()) return unsat();
      detail::push_unique(next, r);
    }
    prims = std::move(next);
  }

  // Fourier-Motzkin on the remaining inequalities.
  for (;;) {
    std::map<VarId, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& p : prims) {
      for (const auto& [v, a] : p.lhs.coeffs()) {
        if (!eliminated(v)) continue;
        auto& [up, lo] = counts[v];
        (a.sign() > 0 ? up : lo)++;
      }
    }
    if (counts.empty()) break;
    VarId victim;
    std::size_t best = 0;
    bool first = true;
    for (const auto& [v, ul] : counts) {
      std::size_t product = ul.first * ul.second;
      if (first || product < best) {
        victim = v;
        best = product;
        first = false;
      }
    }
    std::vector<Primitive> upper, lower, next;
    for (const auto& p : prims) {
      Rat a = p.lhs.coeff(victim);
      if (a.is_zero()) next.push_back(p);
      else (a.sign() > 0 ? upper : lower).push_back(p);
    }
    for (const auto& u : upper) {
      Rat a = u.lhs.coeff(victim);
      for (const auto& l : lower) {
        Rat b = l.lhs.coeff(victim);
        LinTerm combo = u.lhs * (-b) + l.lhs * a;
        combo.add(victim, -combo.coeff(victim));
        bool strict = u.rel == Relation::LT || l.rel == Relation::LT;
        Primitive r = normalize(Primitive(combo, strict ? Relation::LT : Relation::LE));
        if (r.is_tautology()) continue;
        if (r.is_contradiction()) return unsat();
        detail::push_unique(next, r);
      }
    }
    prims = std::move(next);
    if (prims.size() > 24) {
      std::vector<Primitive> eqs, ineqs;
      for (const auto& p : prims) (p.rel == Relation::EQ ? eqs : ineqs).push_back(p);
      prims = eqs;
      auto kept = detail::remove_redundant(eqs, ineqs);
      prims.insert(prims.end(), kept.begin(), kept.end());
    }
  }

  Conj out(prims);
  out.set_provenance(c.provenance());
  return minimal_form(out);
}

// Replaces every strict `a*x < b` (leading coefficient scaled to magnitude
// one) by `a*x <= b + eps`.
inline Conj relax(const Conj& c, const Rat& eps) {
  if (eps.sign() < 0) throw std::invalid_argument("relax: negative margin " + eps.str());
  Conj out;
  for (const auto& raw : c.primitives()) {
    Primitive p = normalize(raw);
    if (p.rel == Relation::LT && !p.is_constant()) {
      LinTerm t = p.lhs * (Rat(1) / p.lhs.coeffs().begin()->second.abs());
      t.add_constant(-eps);
      out.add(Primitive(t, Relation::LE));
    } else if (p.rel == Relation::LT) {
      out.add(Primitive(LinTerm(p.lhs.constant() - eps), Relation::LE));
    } else {
      out.add(p);
    }
  }
  out.set_provenance(c.provenance());
  return out;
}

}  // namespace dtreason
