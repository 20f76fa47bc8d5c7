#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hsv {

/// Exact rational numbers. All symbolic reasoning is carried out over these.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact conversion from a finite binary64 value.
inline Rational from_double(double d) {
  if (!std::isfinite(d)) throw std::domain_error("non-finite value has no rational form");
  Rational q(d);
  q.canonicalize();
  return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Parses "12", "-3/4" or a decimal literal such as "0.125" exactly.
inline std::optional<Rational> parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    pos = 1;
  }
  std::string body = s.substr(pos);
  if (body.empty()) return std::nullopt;
  Rational result;
  auto slash = body.find('/');
  auto dot = body.find('.');
  auto all_digits = [](const std::string& str) {
    if (str.empty()) return false;
    for (char c : str)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (slash != std::string::npos) {
    std::string n = body.substr(0, slash), d = body.substr(slash + 1);
    if (!all_digits(n) || !all_digits(d)) return std::nullopt;
    mpz_class den(d);
    if (den == 0) return std::nullopt;
    result = Rational(mpz_class(n), den);
  } else if (dot != std::string::npos) {
    std::string i = body.substr(0, dot), f = body.substr(dot + 1);
    if (i.empty()) i = "0";
    if (!all_digits(i) || (!f.empty() && !all_digits(f))) return std::nullopt;
    mpz_class scale = 1;
    for (std::size_t k = 0; k < f.size(); ++k) scale *= 10;
    result = Rational(mpz_class(i + f), scale);
  } else {
    if (!all_digits(body)) return std::nullopt;
    result = Rational(mpz_class(body));
  }
  result.canonicalize();
  if (negative) result = -result;
  return result;
}

/// Canonical text: "n" or "n/d" (denominator positive).
inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Exact integer power with natural exponent.
inline Rational pow_nat(const Rational& base, unsigned exponent) {
  Rational r = 1;
  for (unsigned i = 0; i < exponent; ++i) r *= base;
  return r;
}

/// Exact square root if the argument is the square of a rational.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  mpz_class n = q.get_num(), d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

}  // namespace hsv
