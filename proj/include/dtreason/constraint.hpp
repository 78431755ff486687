#pragma once

// Linear constraints over instance-feature variables.
//
// A Primitive is `lhs rel 0`. Normalized primitives only use LT, LE and EQ,
// have integer coefficients with gcd 1, and (for EQ) a positive leading
// coefficient. A Conj is a conjunction of primitives plus provenance tags; a
// Theory is a disjunction of Conjs.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dtreason/errors.hpp"
#include "dtreason/rational.hpp"

namespace dtreason {

// Variable identifier: `instance.feature` or, for one-hot indicator
// components, `instance.feature[value]`. Auxiliary variables created by the
// engine (distance slacks) live in the reserved instance "_".
struct VarId {
  std::string instance;
  std::string feature;
  std::optional<std::string> onehot;

  VarId() = default;
  VarId(std::string inst, std::string feat) : instance(std::move(inst)), feature(std::move(feat)) {}
  VarId(std::string inst, std::string feat, std::string value)
      : instance(std::move(inst)), feature(std::move(feat)), onehot(std::move(value)) {}

  static constexpr const char* kAuxInstance = "_";
  static VarId aux(std::string name) { return VarId(kAuxInstance, std::move(name)); }
  bool is_aux() const { return instance == kAuxInstance; }

  std::string str() const {
    std::string s = instance + "." + feature;
    if (onehot) s += "[" + *onehot + "]";
    return s;
  }

  friend bool operator==(const VarId&, const VarId&) = default;
  friend auto operator<=>(const VarId& a, const VarId& b) {
    return std::tie(a.instance, a.feature, a.onehot) <=> std::tie(b.instance, b.feature, b.onehot);
  }
};

using Assignment = std::map<VarId, Rat>;

class MissingAssignment : public Error {
 public:
  explicit MissingAssignment(const VarId& v) : Error("no value assigned to " + v.str()), var_(v) {}
  const VarId& var() const { return var_; }

 private:
  VarId var_;
};

// Affine expression sum(coeff * var) + constant. Zero coefficients are never stored.
class LinTerm {
 public:
  LinTerm() = default;
  explicit LinTerm(Rat constant) : constant_(std::move(constant)) {}
  static LinTerm var(const VarId& v, Rat coeff = 1) {
    LinTerm t;
    t.add(v, coeff);
    return t;
  }

  const std::map<VarId, Rat>& coeffs() const { return coeffs_; }
  const Rat& constant() const { return constant_; }
  bool is_constant() const { return coeffs_.empty(); }

  Rat coeff(const VarId& v) const {
    auto it = coeffs_.find(v);
    return it == coeffs_.end() ? Rat(0) : it->second;
  }

  LinTerm& add(const VarId& v, const Rat& c) {
    if (c.is_zero()) return *this;
    auto [it, inserted] = coeffs_.try_emplace(v, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) coeffs_.erase(it);
    }
    return *this;
  }
  LinTerm& add_constant(const Rat& c) {
    constant_ += c;
    return *this;
  }
  LinTerm& operator+=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, c);
    constant_ += o.constant_;
    return *this;
  }
  LinTerm& operator-=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, -c);
    constant_ -= o.constant_;
    return *this;
  }
  LinTerm& operator*=(const Rat& k) {
    if (k.is_zero()) {
      coeffs_.clear();
      constant_ = 0;
      return *this;
    }
    for (auto& [v, c] : coeffs_) c *= k;
    constant_ *= k;
    return *this;
  }
  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
  friend LinTerm operator*(LinTerm a, const Rat& k) { return a *= k; }
  LinTerm operator-() const { return *this * Rat(-1); }

  // Replaces `v` by `replacement`.
  LinTerm substitute(const VarId& v, const LinTerm& replacement) const {
    auto it = coeffs_.find(v);
    if (it == coeffs_.end()) return *this;
    Rat c = it->second;
    LinTerm out = *this;
    out.coeffs_.erase(v);
    out += replacement * c;
    return out;
  }

  Rat evaluate(const Assignment& point) const {
    Rat s = constant_;
    for (const auto& [v, c] : coeffs_) {
      auto it = point.find(v);
      if (it == point.end()) throw MissingAssignment(v);
      s += c * it->second;
    }
    return s;
  }

  friend bool operator==(const LinTerm&, const LinTerm&) = default;
  friend bool operator<(const LinTerm& a, const LinTerm& b) {
    if (a.coeffs_ != b.coeffs_) return a.coeffs_ < b.coeffs_;
    return a.constant_ < b.constant_;
  }

 private:
  std::map<VarId, Rat> coeffs_;
  Rat constant_;
};

enum class Relation { LT, LE, EQ, GE, GT };

inline const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::LT: return "<";
    case Relation::LE: return "<=";
    case Relation::EQ: return "=";
    case Relation::GE: return ">=";
    case Relation::GT: return ">";
  }
  return "?";
}

inline Relation flip(Relation r) {
  switch (r) {
    case Relation::LT: return Relation::GT;
    case Relation::LE: return Relation::GE;
    case Relation::GE: return Relation::LE;
    case Relation::GT: return Relation::LT;
    case Relation::EQ: return Relation::EQ;
  }
  return r;
}

inline bool holds(const Rat& value, Relation r) {
  switch (r) {
    case Relation::LT: return value.sign() < 0;
    case Relation::LE: return value.sign() <= 0;
    case Relation::EQ: return value.sign() == 0;
    case Relation::GE: return value.sign() >= 0;
    case Relation::GT: return value.sign() > 0;
  }
  return false;
}

struct Primitive {
  LinTerm lhs;
  Relation rel = Relation::EQ;

  Primitive() = default;
  Primitive(LinTerm l, Relation r) : lhs(std::move(l)), rel(r) {}
  // `lhs rel rhs`
  Primitive(const LinTerm& l, Relation r, const LinTerm& rhs) : lhs(l - rhs), rel(r) {}

  bool is_strict() const { return rel == Relation::LT || rel == Relation::GT; }
  bool is_constant() const { return lhs.is_constant(); }
  bool is_tautology() const { return is_constant() && holds(lhs.constant(), rel); }
  bool is_contradiction() const { return is_constant() && !holds(lhs.constant(), rel); }

  bool evaluate(const Assignment& point) const { return holds(lhs.evaluate(point), rel); }

  static Primitive tautology() { return Primitive(LinTerm(0), Relation::EQ); }
  // Canonical unsatisfiable constraint 0 = 1.
  static Primitive contradiction() { return Primitive(LinTerm(1), Relation::EQ); }

  friend bool operator==(const Primitive&, const Primitive&) = default;
  friend bool operator<(const Primitive& a, const Primitive& b) {
    if (a.lhs == b.lhs) return a.rel < b.rel;
    return a.lhs < b.lhs;
  }
};

namespace detail {

inline mpz_class lcm_z(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}
inline mpz_class gcd_z(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

}  // namespace detail

inline Primitive normalize(const Primitive& p) {
  LinTerm lhs = p.lhs;
  Relation rel = p.rel;
  if (rel == Relation::GE || rel == Relation::GT) {
    lhs = -lhs;
    rel = rel == Relation::GE ? Relation::LE : Relation::LT;
  }
  if (lhs.is_constant()) {
    return holds(lhs.constant(), rel) ? Primitive::tautology() : Primitive::contradiction();
  }
  mpz_class den = 1;
  for (const auto& [v, c] : lhs.coeffs()) den = detail::lcm_z(den, c.denominator());
  den = detail::lcm_z(den, lhs.constant().denominator());
  mpz_class g = 0;
  for (const auto& [v, c] : lhs.coeffs()) g = detail::gcd_z(g, c.numerator() * (den / c.denominator()));
  if (!lhs.constant().is_zero())
    g = detail::gcd_z(g, lhs.constant().numerator() * (den / lhs.constant().denominator()));
  Rat scale(mpq_class(den, g));
  if (rel == Relation::EQ && lhs.coeffs().begin()->second.sign() < 0) scale = -scale;
  lhs *= scale;
  return Primitive(std::move(lhs), rel);
}

struct Provenance {
  enum class Kind { Path, User, Implicit, Distance };
  Kind kind = Kind::User;
  std::string instance;
  std::string tree_id;
  int leaf_id = -1;
  std::string label;
  Rat confidence;
  std::vector<Primitive> path;

  static Provenance user() { return {}; }
  static Provenance implicit() {
    Provenance p;
    p.kind = Kind::Implicit;
    return p;
  }
  static Provenance distance() {
    Provenance p;
    p.kind = Kind::Distance;
    return p;
  }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

class Conj {
 public:
  Conj() = default;
  Conj(std::initializer_list<Primitive> prims) {
    for (const auto& p : prims) add(p);
  }
  explicit Conj(const std::vector<Primitive>& prims, std::vector<Provenance> prov = {}) {
    for (const auto& p : prims) add(p);
    for (auto& t : prov) add_provenance(std::move(t));
  }

  const std::vector<Primitive>& primitives() const { return prims_; }
  const std::vector<Provenance>& provenance() const { return prov_; }
  std::size_t size() const { return prims_.size(); }
  bool empty() const { return prims_.empty(); }

  // Appends the normalized primitive unless an identical one is present.
  Conj& add(const Primitive& p) {
    Primitive n = normalize(p);
    if (std::find(prims_.begin(), prims_.end(), n) == prims_.end()) prims_.push_back(std::move(n));
    return *this;
  }
  Conj& add_provenance(Provenance t) {
    if (std::find(prov_.begin(), prov_.end(), t) == prov_.end()) prov_.push_back(std::move(t));
    return *this;
  }
  void set_provenance(std::vector<Provenance> prov) { prov_ = std::move(prov); }

  bool has_contradiction() const {
    return std::any_of(prims_.begin(), prims_.end(), [](const Primitive& p) { return p.is_contradiction(); });
  }

  // True iff every primitive holds at `point`.
  bool evaluate(const Assignment& point) const {
    for (const auto& p : prims_)
      if (!p.evaluate(point)) return false;
    return true;
  }

  std::set<VarId> variables() const {
    std::set<VarId> vs;
    for (const auto& p : prims_)
      for (const auto& [v, c] : p.lhs.coeffs()) vs.insert(v);
    return vs;
  }

  static Conj unsatisfiable() {
    Conj c;
    c.prims_.push_back(Primitive::contradiction());
    return c;
  }

  friend bool operator==(const Conj& a, const Conj& b) { return a.prims_ == b.prims_ && a.prov_ == b.prov_; }

 private:
  std::vector<Primitive> prims_;
  std::vector<Provenance> prov_;
};

inline Conj conjoin(const Conj& a, const Conj& b) {
  Conj out = a;
  for (const auto& p : b.primitives()) out.add(p);
  for (const auto& t : b.provenance()) out.add_provenance(t);
  return out;
}

inline bool evaluate(const Conj& c, const Assignment& point) { return c.evaluate(point); }

struct Theory {
  std::vector<Conj> disjuncts;
};

// ---- rendering ----

// Renders `p` as `INSTANCE.feature REL value` for single-variable primitives
// and `a*X+b*Y REL value` otherwise, with a positive leading coefficient.
inline std::string render(const Primitive& raw) {
  Primitive p = normalize(raw);
  if (p.is_tautology()) return "0=0";
  if (p.is_contradiction()) return "0=1";
  const auto& coeffs = p.lhs.coeffs();
  if (coeffs.size() == 1) {
    const auto& [v, a] = *coeffs.begin();
    Rat value = -p.lhs.constant() / a;
    Relation rel = a.sign() < 0 ? flip(p.rel) : p.rel;
    return v.str() + relation_symbol(rel) + value.str();
  }
  LinTerm lhs = p.lhs;
  Relation rel = p.rel;
  if (coeffs.begin()->second.sign() < 0) {
    lhs = -lhs;
    rel = flip(rel);
  }
  std::string out;
  bool first = true;
  for (const auto& [v, c] : lhs.coeffs()) {
    Rat mag = c.abs();
    if (c.sign() < 0) out += "-";
    else if (!first) out += "+";
    if (mag != Rat(1)) out += mag.str() + "*";
    out += v.str();
    first = false;
  }
  return out + relation_symbol(rel) + (-lhs.constant()).str();
}

// `2*A.x-B.y+3`; a constant term renders as its value.
inline std::string render(const LinTerm& t) {
  std::string out;
  for (const auto& [v, c] : t.coeffs()) {
    Rat mag = c.abs();
    if (c.sign() < 0) out += "-";
    else if (!out.empty()) out += "+";
    if (mag != Rat(1)) out += mag.str() + "*";
    out += v.str();
  }
  if (out.empty()) return t.constant().str();
  if (t.constant().sign() > 0) out += "+";
  if (!t.constant().is_zero()) out += t.constant().str();
  return out;
}

namespace detail {
inline const VarId* leading_var(const Primitive& p) {
  return p.lhs.coeffs().empty() ? nullptr : &p.lhs.coeffs().begin()->first;
}
}  // namespace detail

// Primitives ordered by (leading variable, then primitive order).
inline std::vector<Primitive> sorted_primitives(const Conj& c) {
  std::vector<Primitive> ps = c.primitives();
  std::stable_sort(ps.begin(), ps.end(), [](const Primitive& a, const Primitive& b) {
    const VarId* va = detail::leading_var(a);
    const VarId* vb = detail::leading_var(b);
    if (!va || !vb) return va == nullptr && vb != nullptr;
    return *va < *vb;
  });
  return ps;
}

inline std::string render(const std::vector<Primitive>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ",";
    out += render(ps[i]);
  }
  return out;
}

// Comma-separated rendering in deterministic variable order.
inline std::string render(const Conj& c) { return render(sorted_primitives(c)); }

}  // namespace dtreason
