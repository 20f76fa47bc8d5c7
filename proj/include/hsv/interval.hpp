#pragma once

#include <hsv/eval.hpp>
#include <hsv/expr.hpp>

#include <functional>

namespace hsv {

/// Three-valued truth for conservative evaluation.
enum class Tri { False, True, Unknown };

inline Tri tri(bool b) { return b ? Tri::True : Tri::False; }
inline Tri tri_not(Tri a) { return a == Tri::Unknown ? a : tri(a == Tri::False); }
inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  return a == Tri::True && b == Tri::True ? Tri::True : Tri::Unknown;
}
inline Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }

/// Closed rational interval [lo, hi].
struct Interval {
  Rational lo = 0, hi = 0;

  Interval() = default;
  Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}
  static Interval point(const Rational& q) { return {q, q}; }

  bool is_point() const { return lo == hi; }
  bool contains(const Rational& q) const { return lo <= q && q <= hi; }
  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }

  friend Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
  friend Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
  friend Interval operator*(const Interval& a, const Interval& b) {
    Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    Interval r(p[0], p[0]);
    for (const auto& x : p) {
      if (x < r.lo) r.lo = x;
      if (x > r.hi) r.hi = x;
    }
    return r;
  }
  friend Interval hull(const Interval& a, const Interval& b) {
    return {a.lo < b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
  }
  std::string str() const { return "[" + to_string(lo) + ", " + to_string(hi) + "]"; }
};

namespace detail {

/// Raised when a subterm may be undefined on the interval.
struct Undetermined {};

constexpr int kIntervalBits = 96;

inline Rational round_down(const Rational& q) {
  if (mpz_sizeinbase(q.get_den().get_mpz_t(), 2) <= static_cast<std::size_t>(kIntervalBits)) return q;
  mpz_class scale = mpz_class(1) << kIntervalBits;
  mpz_class n = q.get_num() * scale;
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), n.get_mpz_t(), q.get_den().get_mpz_t());
  Rational r(f, scale);
  r.canonicalize();
  return r;
}
inline Rational round_up(const Rational& q) { return -round_down(-q); }
inline Interval outward(const Interval& i) { return {round_down(i.lo), round_up(i.hi)}; }

inline Interval pi_enclosure() {
  static const Interval pi = [] {
    Rational mid = *parse_rational("3.14159265358979323846264338327950288419716939937510");
    Rational eps = *parse_rational("0.00000000000000000000000000000000000000000000000001");
    return Interval(mid - eps, mid + eps);
  }();
  return pi;
}

inline Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

constexpr int kSeriesBits = 160;

/// Dyadic r with |q - r| <= 2^-kSeriesBits.
inline Rational round_near(const Rational& q) {
  if (mpz_sizeinbase(q.get_den().get_mpz_t(), 2) <= static_cast<std::size_t>(kSeriesBits)) return q;
  mpz_class scale = mpz_class(1) << kSeriesBits;
  mpz_class n = q.get_num() * scale, f;
  mpz_fdiv_q(f.get_mpz_t(), n.get_mpz_t(), q.get_den().get_mpz_t());
  Rational r(f, scale);
  r.canonicalize();
  return r;
}

inline const Rational& series_ulp() {
  static const Rational u(mpz_class(1), mpz_class(1) << kSeriesBits);
  return u;
}

/// Sums terms t_0 = first, t_{k+1} = t_k * ratio(k) for n steps. Terms are
/// rounded as they go; the returned error bounds the rounding and the
/// supplied tail bound is added by the caller.
template <class Ratio>
inline std::pair<Rational, Rational> rounded_series(const Rational& first, int n, Ratio ratio, Rational& last) {
  Rational sum = 0, term = round_near(first), err = first == term ? Rational(0) : series_ulp(), total_err = err;
  for (int k = 0; k < n; ++k) {
    sum += term;
    Rational r = ratio(k);
    Rational next = round_near(term * r);
    err = -round_near(-(err * abs_q(r))) + series_ulp();
    total_err += err;
    term = next;
  }
  last = term;
  return {sum, total_err + err};
}

/// exp(x) for |x| <= 1/2 by Taylor series with remainder.
inline Interval exp_small(const Rational& x) {
  constexpr int n = 40;
  Rational last;
  auto [sum, err] = rounded_series(Rational(1), n + 1, [&](int k) { return Rational(x / (k + 1)); }, last);
  Rational rem = abs_q(last) * 2 + err;
  return outward({sum - rem, sum + rem});
}

inline Interval exp_point(const Rational& q) {
  if (q == 0) return Interval::point(1);
  int m = 0;
  Rational x = q;
  while (abs_q(x) > Rational(1, 2)) {
    x /= 2;
    ++m;
  }
  Interval r = exp_small(x);
  for (int i = 0; i < m; ++i) r = outward(r * r);
  return r;
}

/// ln(r) for r in [1, 2] via 2 atanh((r-1)/(r+1)).
inline Interval ln_reduced(const Rational& r) {
  Rational z = round_near((r - 1) / (r + 1));
  // z was rounded: widen by the derivative bound of 2 atanh on [0, 1/3]
  Rational zerr = abs_q(z - (r - 1) / (r + 1)) * 3;
  Rational z2 = round_near(z * z), acc = 0, pw = z, err = 0;
  constexpr int n = 60;
  for (int k = 0; k < n; ++k) {
    acc += round_near(pw / (2 * k + 1));
    err += series_ulp() * 2;
    pw = round_near(pw * z2);
  }
  Rational rem = abs_q(pw) * 2 / (1 - z2) + err * 4 + zerr;
  return outward({2 * acc - rem, 2 * acc + rem});
}

inline Interval ln_point(const Rational& q) {
  if (q == 1) return Interval::point(0);
  static const Interval ln2 = ln_reduced(2);
  long k = 0;
  Rational r = q;
  while (r >= 2) {
    r /= 2;
    ++k;
  }
  while (r < 1) {
    r *= 2;
    --k;
  }
  return outward(ln_reduced(r) + Interval::point(k) * ln2);
}

inline Interval sqrt_point(const Rational& q) {
  if (auto r = exact_sqrt(q)) return Interval::point(*r);
  mpz_class nd = q.get_num() * q.get_den();
  nd <<= 2 * kIntervalBits;
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), nd.get_mpz_t());
  mpz_class den = q.get_den() << kIntervalBits;
  Rational lo(s, den), hi(s + 1, den);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

/// sin(x) for a rational x with |x| <= 8.
inline Interval sin_taylor(const Rational& x) {
  if (x == 0) return Interval::point(0);
  Rational x2 = x * x, last;
  constexpr int n = 60;
  auto [sum, err] = rounded_series(x, n, [&](int k) { return Rational(-x2 / ((2 * k + 2) * (2 * k + 3))); }, last);
  Rational rem = abs_q(last) + err;
  return outward({sum - rem, sum + rem});
}

inline Interval clamp_unit(Interval r) {
  if (r.lo < -1) r.lo = -1;
  if (r.hi > 1) r.hi = 1;
  return r;
}

inline Interval sin_interval(const Interval& i) {
  if (i.is_point() && i.lo == 0) return Interval::point(0);
  if (i.width() >= 7) return {-1, 1};
  Interval pi = pi_enclosure(), two_pi = Interval::point(2) * pi;
  long k = std::lround(to_double(i.mid()) / (2 * M_PI));
  Interval j = outward(i - Interval::point(k) * two_pi);
  if (abs_q(j.lo) > 8 || abs_q(j.hi) > 8) return {-1, 1};
  Interval r = hull(sin_taylor(j.lo), sin_taylor(j.hi));
  if (!j.is_point()) {
    for (long m = -2; m <= 2; ++m) {
      Interval top = pi * Interval::point(Rational(1, 2)) + Interval::point(m) * two_pi;
      Interval bot = top - pi;
      if (top.hi >= j.lo && top.lo <= j.hi) r.hi = 1;
      if (bot.hi >= j.lo && bot.lo <= j.hi) r.lo = -1;
    }
  }
  return clamp_unit(r);
}

inline Interval cos_interval(const Interval& i) {
  if (i.is_point() && i.lo == 0) return Interval::point(1);
  return sin_interval(outward(i + pi_enclosure() * Interval::point(Rational(1, 2))));
}

}  // namespace detail

/// Conservative enclosure of a transcendental over an interval. Throws
/// detail::Undetermined where the function may be undefined.
inline Interval enclose(Op op, const Interval& i) {
  switch (op) {
    case Op::Exp: return hull(detail::exp_point(i.lo), detail::exp_point(i.hi));
    case Op::Ln:
      if (i.lo <= 0) throw detail::Undetermined{};
      return hull(detail::ln_point(i.lo), detail::ln_point(i.hi));
    case Op::Sqrt:
      if (i.lo < 0) throw detail::Undetermined{};
      return hull(detail::sqrt_point(i.lo), detail::sqrt_point(i.hi));
    case Op::Sin: return detail::sin_interval(i);
    case Op::Cos: return detail::cos_interval(i);
    default: throw detail::Undetermined{};
  }
}

/// Interval value of an expression: a truth value, a real interval, or one
/// interval per vector coordinate.
struct IVal {
  enum class Tag { Bool, Real, Vec } tag = Tag::Real;
  Tri b = Tri::Unknown;
  Interval r;
  std::vector<Interval> v;

  static IVal boolean(Tri t) { return {Tag::Bool, t, {}, {}}; }
  static IVal real(Interval i) { return {Tag::Real, Tri::Unknown, std::move(i), {}}; }
  static IVal vec(std::vector<Interval> xs) { return {Tag::Vec, Tri::Unknown, {}, std::move(xs)}; }
};

/// Bindings for interval evaluation. Reads resolve through the lookup
/// callbacks; unresolved names are errors.
struct IEnv {
  std::function<IVal(const LensRef&, const Kind&)> read;
  std::map<std::string, IVal> logicals;
  /// Bisection depth spent on a bounded quantifier before giving up.
  int quantifier_depth = 6;
};

inline IEnv point_env(const Store& s, const Env& env) {
  IEnv out;
  out.read = [s](const LensRef& l, const Kind&) -> IVal {
    Value v = lens_get(l, s);
    if (v.is_bool()) return IVal::boolean(tri(v.boolean()));
    if (v.is_real()) return IVal::real(Interval::point(v.real()));
    std::vector<Interval> xs;
    for (const auto& q : v.vec()) xs.push_back(Interval::point(q));
    return IVal::vec(std::move(xs));
  };
  for (const auto& [k, v] : env) {
    if (v.is_bool()) out.logicals[k] = IVal::boolean(tri(v.boolean()));
    else if (v.is_real()) out.logicals[k] = IVal::real(Interval::point(v.real()));
    else {
      std::vector<Interval> xs;
      for (const auto& q : v.vec()) xs.push_back(Interval::point(q));
      out.logicals[k] = IVal::vec(std::move(xs));
    }
  }
  return out;
}

namespace detail {

class IntervalEvaluator {
 public:
  explicit IntervalEvaluator(IEnv env) : env_(std::move(env)) {}

  IVal eval(const Expr& e) {
    switch (e.op()) {
      case Op::Rat: return IVal::real(Interval::point(e.num()));
      case Op::Bool: return IVal::boolean(tri(e.flag()));
      case Op::Var: return env_.read(e.lens(), e.kind());
      case Op::Logical: {
        auto it = env_.logicals.find(e.name());
        if (it == env_.logicals.end()) fail(ErrorCode::UnboundLogicalVar, e.name());
        return it->second;
      }
      case Op::Neg: {
        IVal a = eval(e.arg(0));
        if (a.tag == IVal::Tag::Vec) {
          for (auto& x : a.v) x = -x;
          return a;
        }
        return IVal::real(-a.r);
      }
      case Op::Add:
      case Op::Sub: {
        IVal a = eval(e.arg(0)), b = eval(e.arg(1));
        if (a.tag == IVal::Tag::Vec) {
          for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] = e.is(Op::Add) ? a.v[i] + b.v[i] : a.v[i] - b.v[i];
          return a;
        }
        return IVal::real(e.is(Op::Add) ? a.r + b.r : a.r - b.r);
      }
      case Op::Mul: return IVal::real(outward(real(e.arg(0)) * real(e.arg(1))));
      case Op::Div: {
        Interval a = real(e.arg(0)), b = real(e.arg(1));
        if (b.contains(0)) throw Undetermined{};
        Interval inv(1 / b.hi, 1 / b.lo);
        return IVal::real(outward(a * inv));
      }
      case Op::Pow: {
        Interval b = real(e.arg(0));
        Interval r = Interval::point(1);
        for (unsigned i = 0; i < e.n(); ++i) r = outward(r * b);
        if (e.n() % 2 == 0 && r.lo < 0) r.lo = 0;  // even powers are nonnegative
        return IVal::real(r);
      }
      case Op::Ln:
      case Op::Exp:
      case Op::Sin:
      case Op::Cos:
      case Op::Sqrt: return IVal::real(enclose(e.op(), real(e.arg(0))));
      case Op::Norm: {
        IVal v = eval(e.arg(0));
        Interval acc = Interval::point(0);
        for (const auto& x : v.v) acc = acc + square(x);
        return IVal::real(enclose(Op::Sqrt, outward(acc)));
      }
      case Op::Inner: {
        IVal a = eval(e.arg(0)), b = eval(e.arg(1));
        Interval acc = Interval::point(0);
        for (std::size_t i = 0; i < a.v.size(); ++i) acc = acc + a.v[i] * b.v[i];
        return IVal::real(outward(acc));
      }
      case Op::ScalarMul: {
        Interval k = real(e.arg(0));
        IVal v = eval(e.arg(1));
        for (auto& x : v.v) x = outward(k * x);
        return v;
      }
      case Op::VecLit: {
        std::vector<Interval> xs;
        for (const auto& a : e.args()) xs.push_back(real(a));
        return IVal::vec(std::move(xs));
      }
      case Op::Nth: return IVal::real(eval(e.arg(0)).v.at(e.n() - 1));
      case Op::Eq:
      case Op::Neq: {
        Tri t = equal(e.arg(0), e.arg(1));
        return IVal::boolean(e.is(Op::Eq) ? t : tri_not(t));
      }
      case Op::Le:
      case Op::Lt:
      case Op::Ge:
      case Op::Gt: return IVal::boolean(compare_atom(e));
      case Op::And: {
        Tri a = boolean(e.arg(0));
        if (a == Tri::False) return IVal::boolean(a);
        return IVal::boolean(tri_and(a, boolean(e.arg(1))));
      }
      case Op::Or: {
        Tri a = boolean(e.arg(0));
        if (a == Tri::True) return IVal::boolean(a);
        return IVal::boolean(tri_or(a, boolean(e.arg(1))));
      }
      case Op::Not: return IVal::boolean(tri_not(boolean(e.arg(0))));
      case Op::Implies: {
        Tri a = boolean(e.arg(0));
        if (a == Tri::False) return IVal::boolean(Tri::True);
        return IVal::boolean(tri_or(tri_not(a), boolean(e.arg(1))));
      }
      case Op::Iff: {
        Tri a = boolean(e.arg(0)), b = boolean(e.arg(1));
        if (a == Tri::Unknown || b == Tri::Unknown) return IVal::boolean(Tri::Unknown);
        return IVal::boolean(tri(a == b));
      }
      case Op::Ite: {
        Tri c = boolean(e.arg(0));
        if (c == Tri::True) return eval(e.arg(1));
        if (c == Tri::False) return eval(e.arg(2));
        IVal a = eval(e.arg(1)), b = eval(e.arg(2));
        if (a.tag == IVal::Tag::Bool) return IVal::boolean(a.b == b.b ? a.b : Tri::Unknown);
        if (a.tag == IVal::Tag::Real) return IVal::real(hull(a.r, b.r));
        for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] = hull(a.v[i], b.v[i]);
        return a;
      }
      case Op::Forall: return IVal::boolean(forall(e));
      case Op::Exists: return IVal::boolean(tri_not(forall_negated(e)));
    }
    return {};
  }

  Tri boolean(const Expr& e) { return eval(e).b; }

 private:
  static Interval square(const Interval& x) {
    Interval r = outward(x * x);
    if (r.lo < 0) r.lo = 0;
    return r;
  }

  Interval real(const Expr& e) { return eval(e).r; }

  Tri compare_atom(const Expr& e) {
    try {
      Interval a = real(e.arg(0)), b = real(e.arg(1));
      if (e.is(Op::Ge) || e.is(Op::Gt)) std::swap(a, b);
      bool strict = e.is(Op::Lt) || e.is(Op::Gt);
      if (strict ? a.hi < b.lo : a.hi <= b.lo) return Tri::True;
      if (strict ? a.lo >= b.hi : a.lo > b.hi) return Tri::False;
      return Tri::Unknown;
    } catch (const Undetermined&) {
      return Tri::Unknown;
    }
  }

  static Tri equal_interval(const Interval& a, const Interval& b) {
    if (a.is_point() && b.is_point()) return tri(a.lo == b.lo);
    if (a.hi < b.lo || b.hi < a.lo) return Tri::False;
    return Tri::Unknown;
  }

  Tri equal(const Expr& x, const Expr& y) {
    try {
      IVal a = eval(x), b = eval(y);
      switch (a.tag) {
        case IVal::Tag::Bool:
          if (a.b == Tri::Unknown || b.b == Tri::Unknown) return Tri::Unknown;
          return tri(a.b == b.b);
        case IVal::Tag::Real: return equal_interval(a.r, b.r);
        case IVal::Tag::Vec: {
          Tri t = Tri::True;
          for (std::size_t i = 0; i < a.v.size(); ++i) t = tri_and(t, equal_interval(a.v[i], b.v[i]));
          return t;
        }
      }
    } catch (const Undetermined&) {
    }
    return Tri::Unknown;
  }

  /// Range of a real binder read off `lo <= x & x <= hi` style antecedents.
  std::optional<Interval> binder_range(const Expr& q, Expr& body) {
    if (!q.arg(0).is(Op::Implies) || !q.bound_kind().is_real()) return std::nullopt;
    std::vector<Expr> hyps;
    collect_conjuncts(q.arg(0).arg(0), hyps);
    std::optional<Rational> lo, hi;
    Expr x = logical(q.name());
    for (const auto& h : hyps) {
      if (!(h.is(Op::Le) || h.is(Op::Lt) || h.is(Op::Ge) || h.is(Op::Gt))) continue;
      Expr a = h.arg(0), b = h.arg(1);
      if (h.is(Op::Ge) || h.is(Op::Gt)) std::swap(a, b);
      try {
        if (same(b, x)) {
          Interval v = real(a);
          if (!lo || v.lo < *lo) lo = v.lo;
        } else if (same(a, x)) {
          Interval v = real(b);
          if (!hi || v.hi > *hi) hi = v.hi;
        }
      } catch (const Undetermined&) {
      }
    }
    if (!lo || !hi) return std::nullopt;
    body = q.arg(0);
    return Interval(*lo, *hi);
  }

  Tri with_binding(const std::string& name, IVal v, const Expr& body) {
    auto saved = env_.logicals.find(name) == env_.logicals.end() ? std::nullopt
                                                                 : std::optional<IVal>(env_.logicals[name]);
    env_.logicals[name] = std::move(v);
    Tri t = boolean(body);
    if (saved) env_.logicals[name] = *saved;
    else env_.logicals.erase(name);
    return t;
  }

  Tri forall_over(const std::string& name, const Interval& range, const Expr& body, int depth) {
    Tri t = with_binding(name, IVal::real(range), body);
    if (t != Tri::Unknown || depth <= 0 || range.is_point()) return t;
    Rational m = range.mid();
    Tri a = forall_over(name, {range.lo, m}, body, depth - 1);
    if (a == Tri::False) return a;
    return tri_and(a, forall_over(name, {m, range.hi}, body, depth - 1));
  }

  Tri forall(const Expr& q) {
    Expr body;
    auto range = binder_range(q, body);
    if (!range) return Tri::Unknown;
    if (range->hi < range->lo) return Tri::True;
    // a point where the body fails refutes the quantifier outright
    for (const Rational& p : {range->lo, range->hi, range->mid()})
      if (with_binding(q.name(), IVal::real(Interval::point(p)), body) == Tri::False) return Tri::False;
    Tri t = forall_over(q.name(), *range, body, env_.quantifier_depth);
    return t == Tri::True ? t : Tri::Unknown;
  }

  Tri forall_negated(const Expr& q) {
    Expr neg = hsv::forall(q.name(), not_(q.arg(0)), q.bound_kind());
    return forall(neg);
  }

  IEnv env_;
};

}  // namespace detail

/// Conservative interval evaluation of a boolean expression.
inline Tri eval_tri(const Expr& e, const IEnv& env) {
  try {
    return detail::IntervalEvaluator(env).boolean(e);
  } catch (const detail::Undetermined&) {
    return Tri::Unknown;
  }
}

/// Conservative enclosure of a real expression; nullopt where it may be
/// undefined.
inline std::optional<Interval> eval_interval(const Expr& e, const IEnv& env) {
  try {
    return detail::IntervalEvaluator(env).eval(e).r;
  } catch (const detail::Undetermined&) {
    return std::nullopt;
  }
}

}  // namespace hsv
