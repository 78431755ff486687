#pragma once

// Expressions over constraint theories and their bottom-up evaluation.
//
//   E ::= inst(I, tree, label, minconf) | user | type | lit(C)
//       | cross(E, ...) | sat(E) | project(E, vars) | relax(E, eps)
//       | inf(E, objective, aux)
//
// A theory is a list of conjunctions read disjunctively; each disjunct
// carries the provenance of the tree paths it was built from.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/errors.hpp"
#include "dtreason/milp.hpp"
#include "dtreason/model.hpp"
#include "dtreason/parser.hpp"
#include "dtreason/polyhedra.hpp"

namespace dtreason {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

namespace expr {
struct Inst {
  std::string instance, tree_id, label;
  Rat minconf;
};
struct User {};
struct Type {};
struct Lit {
  Conj conj;
};
struct Cross {
  std::vector<ExprPtr> args;
};
struct Sat {
  ExprPtr arg;
};
struct Project {
  ExprPtr arg;
  std::set<VarId> keep;
};
struct Relax {
  ExprPtr arg;
  Rat eps;
};
struct Inf {
  ExprPtr arg;
  LinTerm objective;
  std::vector<Primitive> aux;
};
}  // namespace expr

struct Expr {
  std::variant<expr::Inst, expr::User, expr::Type, expr::Lit, expr::Cross, expr::Sat, expr::Project, expr::Relax,
               expr::Inf>
      node;
};

inline ExprPtr make_inst(std::string instance, std::string tree_id, std::string label, Rat minconf = 0) {
  if (minconf.sign() < 0 || minconf > Rat(1)) throw ValidationError("minconf must lie in [0,1], got " + minconf.str());
  return std::make_shared<Expr>(Expr{expr::Inst{std::move(instance), std::move(tree_id), std::move(label), minconf}});
}
inline ExprPtr make_user() { return std::make_shared<Expr>(Expr{expr::User{}}); }
inline ExprPtr make_type() { return std::make_shared<Expr>(Expr{expr::Type{}}); }
inline ExprPtr make_lit(Conj c) { return std::make_shared<Expr>(Expr{expr::Lit{std::move(c)}}); }
inline ExprPtr make_cross(std::vector<ExprPtr> args) { return std::make_shared<Expr>(Expr{expr::Cross{std::move(args)}}); }
inline ExprPtr make_sat(ExprPtr e) { return std::make_shared<Expr>(Expr{expr::Sat{std::move(e)}}); }
inline ExprPtr make_project(ExprPtr e, std::set<VarId> keep) {
  return std::make_shared<Expr>(Expr{expr::Project{std::move(e), std::move(keep)}});
}
inline ExprPtr make_relax(ExprPtr e, Rat eps = 0) {
  if (eps.sign() < 0) throw std::invalid_argument("relax: negative margin " + eps.str());
  return std::make_shared<Expr>(Expr{expr::Relax{std::move(e), std::move(eps)}});
}
inline ExprPtr make_inf(ExprPtr e, LinTerm objective, std::vector<Primitive> aux = {}) {
  return std::make_shared<Expr>(Expr{expr::Inf{std::move(e), std::move(objective), std::move(aux)}});
}

struct EvalContext {
  std::map<std::string, std::vector<PathFact>> trees;
  std::vector<std::string> instances;
  Conj user_constraints;
  Conj implicit_constraints;
  std::set<VarId> integer_vars;

  bool has_instance(const std::string& name) const {
    return std::find(instances.begin(), instances.end(), name) != instances.end();
  }
};

struct Disjunct {
  Conj conj;
  std::optional<Rat> value;  // set by inf
};

struct EvalResult {
  std::vector<Disjunct> disjuncts;
};

namespace detail {

inline std::set<VarId> ints_in(const Conj& c, const std::set<VarId>& ints) {
  std::set<VarId> out;
  for (const auto& v : c.variables())
    if (ints.count(v)) out.insert(v);
  return out;
}

inline Conj unsat_like(const Conj& c) {
  Conj u = Conj::unsatisfiable();
  u.set_provenance(c.provenance());
  return u;
}

class Evaluator {
 public:
  explicit Evaluator(const EvalContext& ctx) : ctx_(ctx) {}

  EvalResult operator()(const ExprPtr& e) const {
    if (!e) throw ValidationError("null expression");
    return std::visit([this](const auto& n) { return eval(n); }, e->node);
  }

 private:
  EvalResult eval(const expr::Inst& n) const {
    if (!ctx_.has_instance(n.instance)) throw NameError("unknown instance '" + n.instance + "'");
    auto it = ctx_.trees.find(n.tree_id);
    if (it == ctx_.trees.end()) throw NameError("unknown tree '" + n.tree_id + "'");
    EvalResult r;
    for (const auto& pf : it->second)
      if (pf.label == n.label && pf.confidence >= n.minconf) r.disjuncts.push_back({instantiate(pf, n.instance), {}});
    return r;
  }
  EvalResult eval(const expr::User&) const { return {{{ctx_.user_constraints, {}}}}; }
  EvalResult eval(const expr::Type&) const { return {{{ctx_.implicit_constraints, {}}}}; }
  EvalResult eval(const expr::Lit& n) const { return {{{n.conj, {}}}}; }

  EvalResult eval(const expr::Cross& n) const {
    EvalResult acc{{{Conj(), {}}}};
    for (const auto& arg : n.args) {
      EvalResult rhs = (*this)(arg);
      EvalResult next;
      for (const auto& a : acc.disjuncts) {
        for (const auto& b : rhs.disjuncts) {
          std::optional<Rat> v = a.value;
          if (b.value) v = v ? *v + *b.value : *b.value;
          next.disjuncts.push_back({conjoin(a.conj, b.conj), v});
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

  EvalResult eval(const expr::Sat& n) const {
    EvalResult in = (*this)(n.arg), out;
    for (auto& d : in.disjuncts)
      if (!d.conj.has_contradiction() && sat_witness(d.conj, ctx_.integer_vars)) out.disjuncts.push_back(std::move(d));
    return out;
  }

  EvalResult eval(const expr::Project& n) const {
    for (const auto& v : n.keep)
      if (!v.is_aux() && !ctx_.has_instance(v.instance))
        throw NameError("projection onto unknown instance '" + v.instance + "'");
    EvalResult r = (*this)(n.arg);
    for (auto& d : r.disjuncts) d.conj = project(d.conj, n.keep);
    return r;
  }

  EvalResult eval(const expr::Relax& n) const {
    EvalResult r = (*this)(n.arg);
    for (auto& d : r.disjuncts) d.conj = relax(d.conj, n.eps);
    return r;
  }

  EvalResult eval(const expr::Inf& n) const {
    EvalResult in = (*this)(n.arg), out;
    for (auto& d : in.disjuncts) {
      if (d.conj.has_contradiction()) continue;
      Conj c = d.conj;
      for (const auto& p : n.aux) c.add(p);
      std::set<VarId> ints = ints_in(c, ctx_.integer_vars);
      MilpResult m = bb_inf(c, ints, n.objective);
      if (m.status == MilpResult::Status::Infeasible) continue;
      if (m.status == MilpResult::Status::Unbounded) {
        out.disjuncts.push_back({unsat_like(c), {}});
        continue;
      }
      c.add(Primitive(n.objective, Relation::EQ, LinTerm(*m.value)));
      for (const auto& [v, x] : *m.int_witness) c.add(Primitive(LinTerm::var(v), Relation::EQ, LinTerm(x)));
      // an infimum approached only through strict constraints is not attained
      if (!feasible(c).feasible()) {
        out.disjuncts.push_back({unsat_like(c), {}});
        continue;
      }
      out.disjuncts.push_back({std::move(c), *m.value});
    }
    return out;
  }

  const EvalContext& ctx_;
};

}  // namespace detail

inline EvalResult solve(const ExprPtr& e, const EvalContext& ctx) { return detail::Evaluator(ctx)(e); }

// ---- prefix text form ----

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline void write_expr(const ExprPtr& e, std::ostream& os) {
  struct V {
    std::ostream& os;
    void operator()(const expr::Inst& n) const {
      os << "(inst " << quote(n.instance) << " " << quote(n.tree_id) << " " << quote(n.label) << " " << n.minconf << ")";
    }
    void operator()(const expr::User&) const { os << "(user)"; }
    void operator()(const expr::Type&) const { os << "(type)"; }
    void operator()(const expr::Lit& n) const { os << "(lit " << quote(render(n.conj.primitives())) << ")"; }
    void operator()(const expr::Cross& n) const {
      os << "(cross";
      for (const auto& a : n.args) {
        os << " ";
        write_expr(a, os);
      }
      os << ")";
    }
    void operator()(const expr::Sat& n) const {
      os << "(sat ";
      write_expr(n.arg, os);
      os << ")";
    }
    void operator()(const expr::Project& n) const {
      os << "(project ";
      write_expr(n.arg, os);
      for (const auto& v : n.keep) os << " " << quote(v.str());
      os << ")";
    }
    void operator()(const expr::Relax& n) const {
      os << "(relax ";
      write_expr(n.arg, os);
      os << " " << n.eps << ")";
    }
    void operator()(const expr::Inf& n) const {
      os << "(inf ";
      write_expr(n.arg, os);
      os << " " << quote(render(n.objective)) << " " << quote(render(n.aux)) << ")";
    }
  };
  std::visit(V{os}, e->node);
}

class ExprReader {
 public:
  explicit ExprReader(std::string_view text) : s_(text) {}

  ExprPtr read() {
    ExprPtr e = expr();
    skip();
    if (i_ < s_.size()) throw ParseError("trailing input", i_);
    return e;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  void open() {
    skip();
    if (i_ >= s_.size() || s_[i_] != '(') throw ParseError("expected '('", i_);
    ++i_;
  }
  bool closing() {
    skip();
    return i_ < s_.size() && s_[i_] == ')';
  }
  void close() {
    if (!closing()) throw ParseError("expected ')'", i_);
    ++i_;
  }
  std::string atom() {
    skip();
    if (i_ >= s_.size()) throw ParseError("unexpected end of expression", i_);
    std::string out;
    if (s_[i_] == '"') {
      ++i_;
      while (i_ < s_.size() && s_[i_] != '"') {
        if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
        out += s_[i_++];
      }
      if (i_ >= s_.size()) throw ParseError("unterminated string", i_);
      ++i_;
      return out;
    }
    std::size_t start = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')') ++i_;
    if (i_ == start) throw ParseError("expected an atom", i_);
    return std::string(s_.substr(start, i_ - start));
  }
  Rat number() {
    std::size_t at = (skip(), i_);
    Rat r;
    if (!Rat::try_parse(atom(), r)) throw ParseError("expected a number", at);
    return r;
  }
  Conj conj_text(const std::string& t, std::size_t at) {
    if (t.empty()) return Conj();
    try {
      NameResolver any;
      any.allow_aux = true;
      return parse_constraints(t, any);
    } catch (const ParseError& e) {
      throw ParseError("in constraint text: " + e.detail(), at);
    }
  }

  ExprPtr expr() {
    open();
    std::size_t at = i_;
    std::string head = atom();
    ExprPtr e;
    if (head == "inst") {
      std::string inst = atom(), tree = atom(), label = atom();
      e = make_inst(inst, tree, label, number());
    } else if (head == "user") {
      e = make_user();
    } else if (head == "type") {
      e = make_type();
    } else if (head == "lit") {
      std::size_t p = (skip(), i_);
      e = make_lit(conj_text(atom(), p));
    } else if (head == "cross") {
      std::vector<ExprPtr> args;
      while (!closing()) args.push_back(expr());
      e = make_cross(std::move(args));
    } else if (head == "sat") {
      e = make_sat(expr());
    } else if (head == "project") {
      ExprPtr arg = expr();
      std::set<VarId> keep;
      while (!closing()) {
        std::size_t p = (skip(), i_);
        std::string v = atom();
        NameResolver any;
        any.allow_aux = true;
        LinTerm t;
        try {
          t = parse_linear_term(v, any);
        } catch (const ParseError&) {
          throw ParseError("expected a variable", p);
        }
        if (t.coeffs().size() != 1 || t.coeffs().begin()->second != Rat(1) || !t.constant().is_zero())
          throw ParseError("expected a variable", p);
        keep.insert(t.coeffs().begin()->first);
      }
      e = make_project(std::move(arg), std::move(keep));
    } else if (head == "relax") {
      ExprPtr arg = expr();
      e = make_relax(std::move(arg), number());
    } else if (head == "inf") {
      ExprPtr arg = expr();
      std::size_t p = (skip(), i_);
      std::string obj = atom();
      NameResolver any;
      any.allow_aux = true;
      LinTerm objective;
      try {
        objective = parse_linear_term(obj, any);
      } catch (const ParseError& err) {
        throw ParseError("in objective: " + err.detail(), p);
      }
      std::size_t q = (skip(), i_);
      Conj aux = conj_text(atom(), q);
      e = make_inf(std::move(arg), std::move(objective), aux.primitives());
    } else {
      throw ParseError("unknown operator '" + head + "'", at);
    }
    close();
    return e;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace detail

inline std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  detail::write_expr(e, os);
  return os.str();
}

inline ExprPtr parse_expr(std::string_view text) { return detail::ExprReader(text).read(); }

}  // namespace dtreason
