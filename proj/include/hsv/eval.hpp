#pragma once

#include <hsv/expr.hpp>
#include <hsv/store.hpp>

#include <cmath>
#include <map>

namespace hsv {

template <class S>
using BasicEnv = std::map<std::string, BasicValue<S>>;
using Env = BasicEnv<Rational>;
using NumEnv = BasicEnv<double>;

inline NumEnv to_num(const Env& env) {
  NumEnv out;
  for (const auto& [k, v] : env) out.emplace(k, to_num(v));
  return out;
}
inline Env to_exact(const NumEnv& env) {
  Env out;
  for (const auto& [k, v] : env) out.emplace(k, to_exact(v));
  return out;
}

/// Evaluation settings. A positive tolerance relaxes real comparisons
/// (scaled by magnitude); only the numeric oracle paths use it.
struct EvalOptions {
  double tolerance = 0.0;
};

namespace detail {

inline Rational transcendental(Op op, const Rational& x) {
  switch (op) {
    case Op::Exp:
      if (x == 0) return 1;
      break;
    case Op::Ln:
      if (x == 1) return 0;
      break;
    case Op::Sin:
      if (x == 0) return 0;
      break;
    case Op::Cos:
      if (x == 0) return 1;
      break;
    case Op::Sqrt:
      if (auto r = exact_sqrt(x)) return *r;
      break;
    default:
      break;
  }
  fail(ErrorCode::Inexact, "no exact rational value");
}

inline double transcendental(Op op, double x) {
  switch (op) {
    case Op::Exp: return std::exp(x);
    case Op::Ln: return std::log(x);
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Sqrt: return std::sqrt(x);
    default: return 0;
  }
}

inline double magnitude(const Rational& q) { return std::fabs(to_double(q)); }
inline double magnitude(double d) { return std::fabs(d); }

template <class S>
class Evaluator {
 public:
  using Val = BasicValue<S>;
  using Vec = typename Val::Vec;

  Evaluator(const BasicStore<S>& s, const BasicEnv<S>& env, EvalOptions opt) : s_(s), env_(env), opt_(opt) {}

  Val eval(const Expr& e) const {
    switch (e.op()) {
      case Op::Rat: return Val(scalar_cast<S>(e.num()));
      case Op::Bool: return Val(e.flag());
      case Op::Var: return lens_get(e.lens(), s_);
      case Op::Logical: {
        auto it = env_.find(e.name());
        if (it == env_.end()) fail(ErrorCode::UnboundLogicalVar, e.name());
        if (!it->second.has_kind(e.kind()))
          fail(ErrorCode::KindMismatch, e.name() + " bound to " + it->second.str());
        return it->second;
      }
      case Op::Neg: {
        Val a = eval(e.arg(0));
        if (a.is_vec()) return Val(map(a.vec(), [](const S& x) { return S(-x); }));
        return Val(S(-a.real()));
      }
      case Op::Add:
      case Op::Sub: {
        Val a = eval(e.arg(0)), b = eval(e.arg(1));
        S sign = e.is(Op::Add) ? S(1) : S(-1);
        if (a.is_vec()) {
          Vec out = a.vec();
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * b.vec()[i];
          return Val(std::move(out));
        }
        return Val(S(a.real() + sign * b.real()));
      }
      case Op::Mul: return Val(S(real(e.arg(0)) * real(e.arg(1))));
      case Op::Div: {
        S a = real(e.arg(0)), b = real(e.arg(1));
        if (b == 0) fail(ErrorCode::DivisionByZero, to_string(e));
        return Val(S(a / b));
      }
      case Op::Pow: {
        S b = real(e.arg(0)), r = 1;
        for (unsigned i = 0; i < e.n(); ++i) r *= b;
        return Val(r);
      }
      case Op::Ln: {
        S a = real(e.arg(0));
        if (a <= 0) fail(ErrorCode::LnNonPositive, to_string(e));
        return Val(transcendental(Op::Ln, a));
      }
      case Op::Sqrt: {
        S a = real(e.arg(0));
        if (a < 0) fail(ErrorCode::SqrtNegative, to_string(e));
        return Val(transcendental(Op::Sqrt, a));
      }
      case Op::Exp:
      case Op::Sin:
      case Op::Cos: return Val(transcendental(e.op(), real(e.arg(0))));
      case Op::Norm: {
        Val v = eval(e.arg(0));
        S acc = 0;
        for (const auto& x : v.vec()) acc += x * x;
        return Val(transcendental(Op::Sqrt, acc));
      }
      case Op::Inner: {
        Val a = eval(e.arg(0)), b = eval(e.arg(1));
        S acc = 0;
        for (std::size_t i = 0; i < a.vec().size(); ++i) acc += a.vec()[i] * b.vec()[i];
        return Val(acc);
      }
      case Op::ScalarMul: {
        S k = real(e.arg(0));
        return Val(map(eval(e.arg(1)).vec(), [&](const S& x) { return S(k * x); }));
      }
      case Op::VecLit: {
        Vec out;
        for (const auto& a : e.args()) out.push_back(real(a));
        return Val(std::move(out));
      }
      case Op::Nth: return Val(eval(e.arg(0)).vec().at(e.n() - 1));
      case Op::Eq:
      case Op::Neq: {
        Val a = eval(e.arg(0)), b = eval(e.arg(1));
        bool same = equal(a, b);
        return Val(e.is(Op::Eq) ? same : !same);
      }
      case Op::Le: return Val(less(real(e.arg(0)), real(e.arg(1)), true));
      case Op::Lt: return Val(less(real(e.arg(0)), real(e.arg(1)), false));
      case Op::Ge: return Val(less(real(e.arg(1)), real(e.arg(0)), true));
      case Op::Gt: return Val(less(real(e.arg(1)), real(e.arg(0)), false));
      case Op::And: return Val(boolean(e.arg(0)) && boolean(e.arg(1)));
      case Op::Or: return Val(boolean(e.arg(0)) || boolean(e.arg(1)));
      case Op::Not: return Val(!boolean(e.arg(0)));
      case Op::Implies: return Val(!boolean(e.arg(0)) || boolean(e.arg(1)));
      case Op::Iff: return Val(boolean(e.arg(0)) == boolean(e.arg(1)));
      case Op::Ite: return boolean(e.arg(0)) ? eval(e.arg(1)) : eval(e.arg(2));
      case Op::Exists:
      case Op::Forall: fail(ErrorCode::QuantifiedEval, to_string(e));
    }
    return {};
  }

 private:
  S real(const Expr& e) const { return eval(e).real(); }
  bool boolean(const Expr& e) const { return eval(e).boolean(); }

  template <class F>
  static Vec map(const Vec& xs, F f) {
    Vec out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(f(x));
    return out;
  }

  double slack(const S& a, const S& b) const {
    return opt_.tolerance * (1.0 + std::max(magnitude(a), magnitude(b)));
  }
  bool close(const S& a, const S& b) const {
    if (opt_.tolerance <= 0) return a == b;
    return magnitude(S(a - b)) <= slack(a, b);
  }
  bool less(const S& a, const S& b, bool or_equal) const {
    if (opt_.tolerance <= 0) return or_equal ? a <= b : a < b;
    double d = to_d(S(b - a)), sl = slack(a, b);
    return or_equal ? d >= -sl : d > -sl;
  }
  static double to_d(const Rational& q) { return to_double(q); }
  static double to_d(double d) { return d; }

  bool equal(const Val& a, const Val& b) const {
    if (a.is_real()) return close(a.real(), b.real());
    if (a.is_vec()) {
      for (std::size_t i = 0; i < a.vec().size(); ++i)
        if (!close(a.vec()[i], b.vec()[i])) return false;
      return true;
    }
    return a == b;
  }

  const BasicStore<S>& s_;
  const BasicEnv<S>& env_;
  EvalOptions opt_;
};

}  // namespace detail

/// Value of e at store s with logical variables bound by env.
template <class S>
BasicValue<S> eval(const Expr& e, const BasicStore<S>& s, const BasicEnv<S>& env = {}, EvalOptions opt = {}) {
  return detail::Evaluator<S>(s, env, opt).eval(e);
}

template <class S>
bool holds(const Expr& e, const BasicStore<S>& s, const BasicEnv<S>& env = {}, EvalOptions opt = {}) {
  return eval(e, s, env, opt).boolean();
}

}  // namespace hsv
