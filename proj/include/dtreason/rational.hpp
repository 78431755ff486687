#pragma once

// Exact rational numbers backed by GMP.

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dtreason {

class Rat {
 public:
  Rat() = default;
  template <std::integral I>
  Rat(I v) : q_(static_cast<long>(v)) {}  // NOLINT(google-explicit-constructor)
  Rat(long num, long den) {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
  }
  explicit Rat(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  // Parses "12", "-3/4", "5119.01", "1e-3", "-.5". Decimal text is read exactly.
  static Rat parse(std::string_view text) {
    Rat r;
    if (!try_parse(text, r)) throw std::invalid_argument("not a rational literal: '" + std::string(text) + "'");
    return r;
  }

  static bool try_parse(std::string_view text, Rat& out) {
    std::string s(text);
    if (s.empty()) return false;
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      mpz_class num, den;
      if (!parse_int(s.substr(0, slash), num) || !parse_int(s.substr(slash + 1), den) || den == 0) return false;
      mpq_class q(num, den);
      q.canonicalize();
      out = Rat(q);
      return true;
    }
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
      neg = s[i] == '-';
      ++i;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c >= '0' && c <= '9') {
        digits.push_back(c);
        seen_digit = true;
        if (seen_dot) ++frac_digits;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else {
        break;
      }
    }
    if (!seen_digit) return false;
    long exponent = 0;
    if (i < s.size()) {
      if (s[i] != 'e' && s[i] != 'E') return false;
      ++i;
      std::string e = s.substr(i);
      if (e.empty()) return false;
      std::size_t used = 0;
      try {
        exponent = std::stol(e, &used);
      } catch (...) {
        return false;
      }
      if (used != e.size()) return false;
    }
    mpz_class num(digits, 10);
    long shift = exponent - frac_digits;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    mpq_class q = shift < 0 ? mpq_class(num, scale) : mpq_class(num * scale);
    q.canonicalize();
    if (neg) q = -q;
    out = Rat(q);
    return true;
  }

  const mpq_class& raw() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return q_.get_den() == 1; }
  double to_double() const { return q_.get_d(); }

  Rat floor() const {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return Rat(mpq_class(f));
  }
  Rat ceil() const {
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return Rat(mpq_class(c));
  }
  Rat abs() const { return Rat(mpq_class(::abs(q_))); }
  Rat frac() const { return *this - floor(); }

  // Shortest exact decimal when the denominator is 2^a 5^b, otherwise "p/q".
  std::string str() const {
    mpz_class den = q_.get_den();
    unsigned long twos = 0, fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
      den /= 2;
      ++twos;
    }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
      den /= 5;
      ++fives;
    }
    if (den != 1) return q_.get_str();
    unsigned long places = twos > fives ? twos : fives;
    if (places == 0) return q_.get_num().get_str();
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
    mpz_class scaled = q_.get_num() * scale / q_.get_den();
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string d = scaled.get_str();
    if (d.size() <= places) d.insert(0, places - d.size() + 1, '0');
    d.insert(d.size() - places, ".");
    return (neg ? "-" : "") + d;
  }

  // Truncated (toward zero) decimal with a fixed number of places.
  std::string truncated(unsigned places) const {
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
    mpz_class scaled;
    mpz_class n = q_.get_num() * scale;
    mpz_tdiv_q(scaled.get_mpz_t(), n.get_mpz_t(), q_.get_den_mpz_t());
    bool neg = sign() < 0;
    if (scaled < 0) scaled = -scaled;
    std::string d = scaled.get_str();
    if (places == 0) return (neg && scaled != 0 ? "-" : "") + d;
    if (d.size() <= places) d.insert(0, places - d.size() + 1, '0');
    d.insert(d.size() - places, ".");
    return (neg ? "-" : "") + d;
  }

  Rat operator-() const { return Rat(mpq_class(-q_)); }
  Rat& operator+=(const Rat& o) {
    q_ += o.q_;
    return *this;
  }
  Rat& operator-=(const Rat& o) {
    q_ -= o.q_;
    return *this;
  }
  Rat& operator*=(const Rat& o) {
    q_ *= o.q_;
    return *this;
  }
  Rat& operator/=(const Rat& o) {
    if (o.is_zero()) throw std::domain_error("Rat: division by zero");
    q_ /= o.q_;
    return *this;
  }
  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

  std::size_t hash() const {
    return std::hash<std::string>{}(q_.get_str());
  }

 private:
  static bool parse_int(const std::string& s, mpz_class& out) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t j = i; j < s.size(); ++j)
      if (s[j] < '0' || s[j] > '9') return false;
    out = mpz_class(s.substr(i), 10);
    if (s[0] == '-') out = -out;
    return true;
  }

  mpq_class q_;
};

inline Rat min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }

}  // namespace dtreason

template <>
struct std::hash<dtreason::Rat> {
  std::size_t operator()(const dtreason::Rat& r) const { return r.hash(); }
};
