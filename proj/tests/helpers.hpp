#pragma once

#include <dtreason/constraint.hpp>

namespace testing_helpers {

using namespace dtreason;

inline LinTerm var(const std::string& inst, const std::string& feat, Rat coeff = 1) {
  return LinTerm::var(VarId(inst, feat), coeff);
}
inline LinTerm cst(Rat c) { return LinTerm(c); }

inline Primitive lt(const LinTerm& a, const LinTerm& b) { return Primitive(a, Relation::LT, b); }
inline Primitive le(const LinTerm& a, const LinTerm& b) { return Primitive(a, Relation::LE, b); }
inline Primitive eq(const LinTerm& a, const LinTerm& b) { return Primitive(a, Relation::EQ, b); }
inline Primitive ge(const LinTerm& a, const LinTerm& b) { return Primitive(a, Relation::GE, b); }
inline Primitive gt(const LinTerm& a, const LinTerm& b) { return Primitive(a, Relation::GT, b); }
inline Primitive lt(const LinTerm& a, Rat b) { return lt(a, cst(b)); }
inline Primitive le(const LinTerm& a, Rat b) { return le(a, cst(b)); }
inline Primitive eq(const LinTerm& a, Rat b) { return eq(a, cst(b)); }
inline Primitive ge(const LinTerm& a, Rat b) { return ge(a, cst(b)); }
inline Primitive gt(const LinTerm& a, Rat b) { return gt(a, cst(b)); }

// Same set of normalized primitives, order ignored.
inline bool same_primitives(const Conj& a, const Conj& b) {
  auto sa = a.primitives(), sb = b.primitives();
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

}  // namespace testing_helpers
