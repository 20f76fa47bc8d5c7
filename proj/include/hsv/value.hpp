#pragma once

#include <hsv/error.hpp>
#include <hsv/rational.hpp>

#include <compare>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace hsv {

/// Kind of a store variable or expression.
struct Kind {
  enum class Tag { Real, Bool, Vec };
  Tag tag = Tag::Real;
  unsigned dim = 0;  // only for Vec

  static Kind real() { return {Tag::Real, 0}; }
  static Kind boolean() { return {Tag::Bool, 0}; }
  static Kind vec(unsigned n) { return {Tag::Vec, n}; }

  bool is_real() const { return tag == Tag::Real; }
  bool is_bool() const { return tag == Tag::Bool; }
  bool is_vec() const { return tag == Tag::Vec; }
  bool is_numeric() const { return tag != Tag::Bool; }

  friend bool operator==(const Kind&, const Kind&) = default;

  std::string str() const {
    switch (tag) {
      case Tag::Real: return "real";
      case Tag::Bool: return "bool";
      case Tag::Vec: return "vec[" + std::to_string(dim) + "]";
    }
    return "?";
  }
};

namespace detail {
inline std::string scalar_str(const Rational& q) { return to_string(q); }
inline std::string scalar_str(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}
inline Rational scalar_from_rational(const Rational& q, Rational*) { return q; }
inline double scalar_from_rational(const Rational& q, double*) { return to_double(q); }
}  // namespace detail

/// Converts an exact rational into the scalar type S.
template <class S>
S scalar_cast(const Rational& q) {
  return detail::scalar_from_rational(q, static_cast<S*>(nullptr));
}

/// A store value over scalar type S: real, boolean, real vector, or a tuple
/// (the value type of a lens sum).
template <class S>
class BasicValue {
 public:
  using Vec = std::vector<S>;
  using Tuple = std::vector<BasicValue>;

  BasicValue() : v_(S(0)) {}
  BasicValue(S x) : v_(std::move(x)) {}  // NOLINT(google-explicit-constructor)
  BasicValue(bool b) : v_(b) {}          // NOLINT(google-explicit-constructor)
  BasicValue(int x) : v_(S(x)) {}        // NOLINT(google-explicit-constructor)
  explicit BasicValue(Vec v) : v_(std::move(v)) {}
  static BasicValue tuple(Tuple parts) {
    BasicValue r;
    r.v_ = std::move(parts);
    return r;
  }
  static BasicValue zero(const Kind& k) {
    switch (k.tag) {
      case Kind::Tag::Real: return BasicValue(S(0));
      case Kind::Tag::Bool: return BasicValue(false);
      case Kind::Tag::Vec: return BasicValue(Vec(k.dim, S(0)));
    }
    return {};
  }

  bool is_real() const { return std::holds_alternative<S>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_vec() const { return std::holds_alternative<Vec>(v_); }
  bool is_tuple() const { return std::holds_alternative<Tuple>(v_); }

  const S& real() const {
    if (!is_real()) fail(ErrorCode::KindMismatch, "value is not real: " + str());
    return std::get<S>(v_);
  }
  bool boolean() const {
    if (!is_bool()) fail(ErrorCode::KindMismatch, "value is not boolean: " + str());
    return std::get<bool>(v_);
  }
  const Vec& vec() const {
    if (!is_vec()) fail(ErrorCode::KindMismatch, "value is not a vector: " + str());
    return std::get<Vec>(v_);
  }
  const Tuple& tuple() const {
    if (!is_tuple()) fail(ErrorCode::KindMismatch, "value is not a tuple: " + str());
    return std::get<Tuple>(v_);
  }

  /// True if this value inhabits kind k.
  bool has_kind(const Kind& k) const {
    switch (k.tag) {
      case Kind::Tag::Real: return is_real();
      case Kind::Tag::Bool: return is_bool();
      case Kind::Tag::Vec: return is_vec() && vec().size() == k.dim;
    }
    return false;
  }

  friend bool operator==(const BasicValue& a, const BasicValue& b) { return a.v_ == b.v_; }

  std::string str() const {
    if (is_real()) return detail::scalar_str(std::get<S>(v_));
    if (is_bool()) return std::get<bool>(v_) ? "true" : "false";
    std::string out = is_vec() ? "[" : "(";
    if (is_vec()) {
      const auto& xs = std::get<Vec>(v_);
      for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + detail::scalar_str(xs[i]);
      return out + "]";
    }
    const auto& ts = std::get<Tuple>(v_);
    for (std::size_t i = 0; i < ts.size(); ++i) out += (i ? ", " : "") + ts[i].str();
    return out + ")";
  }

 private:
  std::variant<S, bool, Vec, Tuple> v_;
};

template <class S>
std::ostream& operator<<(std::ostream& os, const BasicValue<S>& v) {
  return os << v.str();
}

using Value = BasicValue<Rational>;
using NumValue = BasicValue<double>;

inline NumValue to_num(const Value& v) {
  if (v.is_real()) return NumValue(to_double(v.real()));
  if (v.is_bool()) return NumValue(v.boolean());
  if (v.is_vec()) {
    std::vector<double> xs;
    for (const auto& q : v.vec()) xs.push_back(to_double(q));
    return NumValue(std::move(xs));
  }
  NumValue::Tuple parts;
  for (const auto& p : v.tuple()) parts.push_back(to_num(p));
  return NumValue::tuple(std::move(parts));
}

inline Value to_exact(const NumValue& v) {
  if (v.is_real()) return Value(from_double(v.real()));
  if (v.is_bool()) return Value(v.boolean());
  if (v.is_vec()) {
    std::vector<Rational> xs;
    for (double d : v.vec()) xs.push_back(from_double(d));
    return Value(std::move(xs));
  }
  Value::Tuple parts;
  for (const auto& p : v.tuple()) parts.push_back(to_exact(p));
  return Value::tuple(std::move(parts));
}

}  // namespace hsv
