#pragma once

// Text syntax for user constraints:
//
//   constraints := relation ("," relation)*
//   relation    := expr REL expr (REL expr)*        REL in < <= = == >= > !=
//   expr        := ["+"|"-"] term (("+"|"-") term)*
//   term        := factor (("*"|"/") factor)*       at most one non-constant factor
//   factor      := NUMBER | ref | NAME | STRING | "(" expr ")" | "-" factor
//   ref         := NAME "." NAME ["[" value "]"]
//
// Nominal features accept `I.f = v` / `I.f != v` (indicator of v is 1 / 0)
// and `I.f = J.f` (all indicators equal). Names may contain letters,
// digits, '_', '$' and any non-ASCII byte, so `CE.€ = 1.16 * CE.$` parses.

#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/errors.hpp"
#include "dtreason/model.hpp"

namespace dtreason {

struct NameResolver {
  // Empty accepts every instance name.
  std::function<bool(const std::string&)> has_instance;
  // Null accepts every feature as continuous.
  const FeatureSchema* schema = nullptr;
  // Admits engine variables `_.name` (replayed queries).
  bool allow_aux = false;
};

namespace detail {

class ConstraintParser {
 public:
  ConstraintParser(std::string_view text, const NameResolver& names) : src_(text), names_(names) { tokenize(); }

  Conj parse_all() {
    Conj out;
    if (at(Tok::End)) throw ParseError("empty constraint", cur().pos);
    for (;;) {
      for (const auto& p : relation()) out.add(p);
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      if (!at(Tok::End)) throw ParseError("expected ',' or end of input, got '" + cur().text + "'", cur().pos);
      break;
    }
    return out;
  }

  LinTerm parse_term_only() {
    Val v = expr();
    if (!at(Tok::End)) throw ParseError("unexpected '" + cur().text + "'", cur().pos);
    return linear(v);
  }

 private:
  enum class Tok { Name, Number, String, Plus, Minus, Star, Slash, LParen, RParen, LBracket, RBracket, Dot, Comma, Rel, End };

  struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
  };

  struct NominalRef {
    std::string instance;
    const Feature* feature;
  };

  struct Val {
    LinTerm term;
    std::optional<NominalRef> nominal;  // bare reference to a nominal feature
    std::optional<std::string> symbol;  // bare name, string, or number text usable as a nominal value
    bool is_number_literal = false;
    std::size_t pos = 0;
  };

  static bool name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

  void tokenize() {
    std::size_t i = 0;
    while (i < src_.size()) {
      unsigned char c = static_cast<unsigned char>(src_[i]);
      if (std::isspace(c)) {
        ++i;
        continue;
      }
      std::size_t start = i;
      bool prev_name = !toks_.empty() && (toks_.back().kind == Tok::Name || toks_.back().kind == Tok::RBracket);
      if (std::isdigit(c) || (c == '.' && !prev_name && i + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i + 1])))) {
        while (i < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[i])) || src_[i] == '.')) ++i;
        if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
          std::size_t j = i + 1;
          if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
          if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
            i = j;
            while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) ++i;
          }
        }
        // digits running into letters form a name such as "2nd"
        if (i < src_.size() && name_char(static_cast<unsigned char>(src_[i])) && !std::isdigit(static_cast<unsigned char>(src_[i]))) {
          while (i < src_.size() && name_char(static_cast<unsigned char>(src_[i]))) ++i;
          toks_.push_back({Tok::Name, std::string(src_.substr(start, i - start)), start});
          continue;
        }
        std::string t(src_.substr(start, i - start));
        Rat r;
        if (!Rat::try_parse(t, r)) throw ParseError("malformed number '" + t + "'", start);
        toks_.push_back({Tok::Number, t, start});
        continue;
      }
      if (name_char(c)) {
        while (i < src_.size() && name_char(static_cast<unsigned char>(src_[i]))) ++i;
        toks_.push_back({Tok::Name, std::string(src_.substr(start, i - start)), start});
        continue;
      }
      if (c == '\'' || c == '"') {
        std::size_t close = src_.find(static_cast<char>(c), i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated string", start);
        toks_.push_back({Tok::String, std::string(src_.substr(i + 1, close - i - 1)), start});
        i = close + 1;
        continue;
      }
      auto two = src_.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "==" || two == "!=") {
        toks_.push_back({Tok::Rel, std::string(two), start});
        i += 2;
        continue;
      }
      Tok k;
      switch (c) {
        case '<': case '>': case '=': k = Tok::Rel; break;
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '[': k = Tok::LBracket; break;
        case ']': k = Tok::RBracket; break;
        case '.': k = Tok::Dot; break;
        case ',': k = Tok::Comma; break;
        default: throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", start);
      }
      toks_.push_back({k, std::string(1, static_cast<char>(c)), start});
      ++i;
    }
    toks_.push_back({Tok::End, "end of input", src_.size()});
  }

  const Token& cur() const { return toks_[k_]; }
  bool at(Tok t) const { return cur().kind == t; }
  const Token& next() { return toks_[k_++]; }
  const Token& expect(Tok t, const char* what) {
    if (!at(t)) throw ParseError(std::string("expected ") + what + ", got '" + cur().text + "'", cur().pos);
    return next();
  }

  static std::optional<Relation> relation_of(const std::string& op) {
    if (op == "<") return Relation::LT;
    if (op == "<=") return Relation::LE;
    if (op == "=" || op == "==") return Relation::EQ;
    if (op == ">=") return Relation::GE;
    if (op == ">") return Relation::GT;
    return std::nullopt;  // "!="
  }

  std::vector<Primitive> relation() {
    Val lhs = expr();
    if (!at(Tok::Rel)) throw ParseError("expected a relation (<, <=, =, >=, >, !=), got '" + cur().text + "'", cur().pos);
    std::vector<Primitive> out;
    while (at(Tok::Rel)) {
      Token op = next();
      Val rhs = expr();
      for (auto& p : combine(lhs, op, rhs)) out.push_back(std::move(p));
      lhs = std::move(rhs);
    }
    return out;
  }

  std::vector<Primitive> combine(const Val& a, const Token& op, const Val& b) {
    auto rel = relation_of(op.text);
    if (a.nominal || b.nominal) {
      if (op.text != "=" && op.text != "==" && op.text != "!=")
        throw ParseError("nominal features only support '=' and '!='", op.pos);
      const Val& ref = a.nominal ? a : b;
      const Val& other = a.nominal ? b : a;
      const Feature& f = *ref.nominal->feature;
      if (other.nominal) {
        if (op.text == "!=") throw ParseError("'!=' between two nominal features is not linear", op.pos);
        const Feature& g = *other.nominal->feature;
        if (f.values != g.values) throw ParseError("nominal features '" + f.name + "' and '" + g.name + "' have different domains", op.pos);
        std::vector<Primitive> out;
        for (const auto& v : f.values)
          out.emplace_back(LinTerm::var(VarId(ref.nominal->instance, f.name, v)), Relation::EQ,
                           LinTerm::var(VarId(other.nominal->instance, g.name, v)));
        return out;
      }
      if (!other.symbol) throw ParseError("expected a value of nominal feature '" + f.name + "'", other.pos);
      if (!f.has_value(*other.symbol))
        throw ParseError("'" + *other.symbol + "' is not a value of nominal feature '" + f.name + "'", other.pos);
      Rat target(op.text == "!=" ? 0 : 1);
      return {Primitive(LinTerm::var(VarId(ref.nominal->instance, f.name, *other.symbol)), Relation::EQ, LinTerm(target))};
    }
    if (!rel) throw ParseError("'!=' is only allowed on nominal features", op.pos);
    return {Primitive(linear(a), *rel, linear(b))};
  }

  LinTerm linear(const Val& v) const {
    if (v.nominal) throw ParseError("nominal feature '" + v.nominal->feature->name + "' used in arithmetic", v.pos);
    if (v.symbol && !v.is_number_literal) throw ParseError("unexpected name '" + *v.symbol + "'", v.pos);
    return v.term;
  }

  Val expr() {
    std::size_t start = cur().pos;
    Val acc;
    bool first = true;
    for (;;) {
      int sign = 1;
      if (at(Tok::Plus) || at(Tok::Minus)) {
        sign = next().kind == Tok::Minus ? -1 : 1;
      } else if (!first) {
        break;
      }
      Val t = term();
      if (first && sign == 1 && !at(Tok::Plus) && !at(Tok::Minus)) return t;  // keep bare refs and symbols
      LinTerm lt = linear(t);
      if (sign < 0) lt = -lt;
      if (first) acc.term = lt;
      else acc.term += lt;
      first = false;
      if (!at(Tok::Plus) && !at(Tok::Minus)) break;
    }
    acc.pos = start;
    return acc;
  }

  Val term() {
    Val acc = factor();
    while (at(Tok::Star) || at(Tok::Slash)) {
      Token op = next();
      Val rhs = factor();
      LinTerm a = linear(acc), b = linear(rhs);
      Val out;
      out.pos = acc.pos;
      if (op.kind == Tok::Star) {
        if (!a.is_constant() && !b.is_constant()) throw ParseError("product of two variables is not linear", op.pos);
        out.term = a.is_constant() ? b * a.constant() : a * b.constant();
      } else {
        if (!b.is_constant()) throw ParseError("division by a variable is not linear", op.pos);
        if (b.constant().is_zero()) throw ParseError("division by zero", op.pos);
        out.term = a * (Rat(1) / b.constant());
      }
      acc = std::move(out);
    }
    return acc;
  }

  Val factor() {
    const Token& t = cur();
    Val v;
    v.pos = t.pos;
    switch (t.kind) {
      case Tok::Number: {
        next();
        v.term = LinTerm(Rat::parse(t.text));
        v.symbol = t.text;
        v.is_number_literal = true;
        return v;
      }
      case Tok::String:
        next();
        v.symbol = t.text;
        return v;
      case Tok::LParen: {
        next();
        Val inner = expr();
        expect(Tok::RParen, "')'");
        v.term = linear(inner);
        return v;
      }
      case Tok::Minus: {
        next();
        Val inner = factor();
        v.term = -linear(inner);
        return v;
      }
      case Tok::Name: {
        next();
        if (!at(Tok::Dot)) {
          v.symbol = t.text;
          return v;
        }
        next();
        const Token& feat = expect(Tok::Name, "a feature name");
        return reference(t, feat);
      }
      default:
        throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  Val reference(const Token& inst, const Token& feat) {
    Val v;
    v.pos = inst.pos;
    if (inst.text == VarId::kAuxInstance) {
      if (!names_.allow_aux) throw ParseError("reserved instance name '_'", inst.pos);
      v.term = LinTerm::var(VarId::aux(feat.text));
      return v;
    }
    if (names_.has_instance && !names_.has_instance(inst.text))
      throw ParseError("unknown instance '" + inst.text + "'", inst.pos);
    const Feature* f = nullptr;
    if (names_.schema) {
      f = names_.schema->find(feat.text);
      if (!f) throw ParseError("unknown feature '" + feat.text + "'", feat.pos);
    }
    if (at(Tok::LBracket)) {
      std::size_t lb = next().pos;
      std::string value;
      if (at(Tok::Name) || at(Tok::Number) || at(Tok::String)) value = next().text;
      else throw ParseError("expected a nominal value", cur().pos);
      expect(Tok::RBracket, "']'");
      if (f && f->kind != FeatureKind::Nominal) throw ParseError("feature '" + f->name + "' is not nominal", lb);
      if (f && !f->has_value(value)) throw ParseError("'" + value + "' is not a value of nominal feature '" + f->name + "'", lb);
      v.term = LinTerm::var(VarId(inst.text, feat.text, value));
      return v;
    }
    if (f && f->kind == FeatureKind::Nominal) {
      v.nominal = NominalRef{inst.text, f};
      return v;
    }
    v.term = LinTerm::var(VarId(inst.text, feat.text));
    return v;
  }

  std::string_view src_;
  const NameResolver& names_;
  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

}  // namespace detail

inline Conj parse_constraints(std::string_view text, const NameResolver& names = {}) {
  return detail::ConstraintParser(text, names).parse_all();
}

inline LinTerm parse_linear_term(std::string_view text, const NameResolver& names = {}) {
  return detail::ConstraintParser(text, names).parse_term_only();
}

}  // namespace dtreason
