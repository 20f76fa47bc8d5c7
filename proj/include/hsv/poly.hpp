#pragma once

#include <hsv/expr.hpp>
#include <hsv/simplify.hpp>

#include <map>

namespace hsv {

/// Product of atoms with positive exponents, sorted by atom.
using Monomial = std::vector<std::pair<Expr, unsigned>>;

inline unsigned degree(const Monomial& m) {
  unsigned d = 0;
  for (const auto& [a, n] : m) d += n;
  return d;
}

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    unsigned da = degree(a), db = degree(b);
    if (da != db) return da > db;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      if (int c = compare(a[i].first, b[i].first); c != 0) return c < 0;
      if (a[i].second != b[i].second) return a[i].second > b[i].second;
    }
    return a.size() < b.size();
  }
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && compare(a[i].first, b[j].first) < 0)) out.push_back(a[i++]);
    else if (i == a.size() || compare(b[j].first, a[i].first) < 0) out.push_back(b[j++]);
    else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

/// Polynomial with rational coefficients over opaque real atoms (variable
/// reads, logical variables, and transcendental or non-polynomial subterms).
class Poly {
 public:
  using Terms = std::map<Monomial, Rational, MonomialLess>;

  Poly() = default;
  static Poly constant(const Rational& q) {
    Poly p;
    if (q != 0) p.terms_[{}] = q;
    return p;
  }
  static Poly atom(const Expr& e) {
    Poly p;
    p.terms_[{{e, 1}}] = 1;
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  Rational constant_term() const {
    auto it = terms_.find({});
    return it == terms_.end() ? Rational(0) : it->second;
  }
  unsigned total_degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
    return d;
  }

  /// Atoms occurring in the polynomial, in structural order.
  std::vector<Expr> atoms() const {
    std::set<Expr, ExprLess> s;
    for (const auto& [m, c] : terms_)
      for (const auto& [a, n] : m) s.insert(a);
    return {s.begin(), s.end()};
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }
  friend Poly operator-(const Poly& a) {
    Poly r;
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(mono_mul(ma, mb), ca * cb);
    return r;
  }
  Poly scaled(const Rational& q) const {
    if (q == 0) return {};
    Poly r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * q);
    return r;
  }
  Poly pow(unsigned n) const {
    Poly r = constant(1);
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (auto ia = a.terms_.begin(), ib = b.terms_.begin(); ia != a.terms_.end(); ++ia, ++ib) {
      if (ia->second != ib->second || ia->first.size() != ib->first.size()) return false;
      for (std::size_t k = 0; k < ia->first.size(); ++k)
        if (ia->first[k].second != ib->first[k].second || !same(ia->first[k].first, ib->first[k].first)) return false;
    }
    return true;
  }

  Expr to_expr() const {
    if (terms_.empty()) return lit(0);
    Expr acc;
    for (const auto& [m, c] : terms_) {
      std::map<Expr, unsigned, ExprLess> f(m.begin(), m.end());
      if (!acc.valid()) acc = detail::term_expr(c, f);
      else if (c < 0) acc = acc - detail::term_expr(-c, f);
      else acc = acc + detail::term_expr(c, f);
    }
    return acc;
  }

 private:
  Terms terms_;
};

namespace detail {

Poly to_poly_impl(const Expr& e);
std::vector<Poly> components(const Expr& v);

inline Expr canonical(const Expr& e) { return to_poly_impl(e).to_expr(); }

/// Rewrites sqrt(u)^2 to u and cos(u)^2 to 1 - sin(u)^2 inside monomials.
inline Poly reduce_identities(const Poly& p) {
  Poly out;
  bool changed = false;
  for (const auto& [m, c] : p.terms()) {
    Monomial rest;
    Poly factor = Poly::constant(c);
    bool hit = false;
    for (const auto& [a, n] : m) {
      if (n >= 2 && (a.is(Op::Sqrt) || a.is(Op::Cos))) {
        hit = true;
        Poly sq = a.is(Op::Sqrt) ? to_poly_impl(a.arg(0))
                                 : Poly::constant(1) - Poly::atom(sin(a.arg(0))).pow(2);
        factor = factor * sq.pow(n / 2);
        if (n % 2) rest.emplace_back(a, 1);
      } else {
        rest.emplace_back(a, n);
      }
    }
    if (!hit) {
      out.add_term(m, c);
      continue;
    }
    changed = true;
    Poly r;
    r.add_term(rest, 1);
    out = out + factor * r;
  }
  return changed ? reduce_identities(out) : out;
}

inline Expr unary_atom(Op op, const Expr& arg) {
  Expr a = canonical(arg);
  Expr e;
  switch (op) {
    case Op::Ln: e = ln(a); break;
    case Op::Exp: e = exp(a); break;
    case Op::Sin: e = sin(a); break;
    case Op::Cos: e = cos(a); break;
    default: e = sqrt(a); break;
  }
  return simplify_node(e);
}

inline Poly to_poly_impl(const Expr& e) {
  switch (e.op()) {
    case Op::Rat: return Poly::constant(e.num());
    case Op::Var:
    case Op::Logical: return Poly::atom(e);
    case Op::Neg: return -to_poly_impl(e.arg(0));
    case Op::Add: return to_poly_impl(e.arg(0)) + to_poly_impl(e.arg(1));
    case Op::Sub: return to_poly_impl(e.arg(0)) - to_poly_impl(e.arg(1));
    case Op::Mul: return reduce_identities(to_poly_impl(e.arg(0)) * to_poly_impl(e.arg(1)));
    case Op::Pow: return reduce_identities(to_poly_impl(e.arg(0)).pow(e.n()));
    case Op::Div: {
      Poly num = to_poly_impl(e.arg(0)), den = to_poly_impl(e.arg(1));
      if (den.is_constant() && !den.is_zero()) return num.scaled(1 / den.constant_term());
      if (num.is_zero()) return {};
      return Poly::atom(num.to_expr() / den.to_expr());
    }
    case Op::Ln:
    case Op::Exp:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: {
      Expr a = unary_atom(e.op(), e.arg(0));
      if (a.is_rat()) return Poly::constant(a.num());
      return Poly::atom(a);
    }
    case Op::Norm: {
      Poly acc;
      for (const auto& c : components(e.arg(0))) acc = acc + c * c;
      acc = reduce_identities(acc);
      if (acc.is_zero()) return {};
      return Poly::atom(sqrt(acc.to_expr()));
    }
    case Op::Inner: {
      auto a = components(e.arg(0)), b = components(e.arg(1));
      Poly acc;
      for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
      return reduce_identities(acc);
    }
    case Op::Nth: return components(e.arg(0)).at(e.n() - 1);
    case Op::Ite: {
      Expr c = simplify(e.arg(0));
      if (c.is(Op::Bool)) return to_poly_impl(c.flag() ? e.arg(1) : e.arg(2));
      Expr a = canonical(e.arg(1)), b = canonical(e.arg(2));
      if (same(a, b)) return to_poly_impl(a);
      return Poly::atom(ite(c, a, b));
    }
    default: detail::kind_error("not a real arithmetic term: " + to_string(e));
  }
}

inline std::vector<Poly> components(const Expr& v) {
  unsigned n = v.kind().dim;
  std::vector<Poly> out;
  switch (v.op()) {
    case Op::Var:
      for (unsigned i = 1; i <= n; ++i) out.push_back(Poly::atom(var(LensRef::coord(v.lens().name, i), Kind::real())));
      return out;
    case Op::VecLit:
      for (const auto& a : v.args()) out.push_back(to_poly_impl(a));
      return out;
    case Op::Neg:
      for (auto& c : components(v.arg(0))) out.push_back(-c);
      return out;
    case Op::Add:
    case Op::Sub: {
      auto a = components(v.arg(0)), b = components(v.arg(1));
      for (unsigned i = 0; i < n; ++i) out.push_back(v.is(Op::Add) ? a[i] + b[i] : a[i] - b[i]);
      return out;
    }
    case Op::ScalarMul: {
      Poly k = to_poly_impl(v.arg(0));
      for (auto& c : components(v.arg(1))) out.push_back(reduce_identities(k * c));
      return out;
    }
    case Op::Ite: {
      auto a = components(v.arg(1)), b = components(v.arg(2));
      Expr c = simplify(v.arg(0));
      for (unsigned i = 0; i < n; ++i) {
        if (c.is(Op::Bool)) out.push_back(c.flag() ? a[i] : b[i]);
        else if (a[i] == b[i]) out.push_back(a[i]);
        else out.push_back(Poly::atom(ite(c, a[i].to_expr(), b[i].to_expr())));
      }
      return out;
    }
    default:
      for (unsigned i = 1; i <= n; ++i) out.push_back(Poly::atom(nth(v, i)));
      return out;
  }
}

}  // namespace detail

/// Polynomial view of a real-kinded expression.
inline Poly to_poly(const Expr& e) { return detail::to_poly_impl(e); }

/// Coordinates of a vector-kinded expression as polynomials.
inline std::vector<Poly> vec_components(const Expr& v) { return detail::components(v); }

/// Canonical sum of monomials with rational coefficients.
inline Expr poly_normalize(const Expr& e) { return to_poly(e).to_expr(); }

/// True if a and b are equal as polynomials over their atoms.
inline bool poly_equal(const Expr& a, const Expr& b) {
  if (a.kind().is_vec()) {
    auto x = vec_components(a), y = vec_components(b);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] == y[i])) return false;
    return true;
  }
  return (to_poly(a) - to_poly(b)).is_zero();
}

}  // namespace hsv
