#pragma once

#include <hsv/eval.hpp>
#include <hsv/expr.hpp>
#include <hsv/subst.hpp>

#include <map>

namespace hsv {

namespace detail {

// A product c * b1^n1 * ... with the bases kept in structural order.
struct Term {
  Rational coef;
  std::map<Expr, unsigned, ExprLess> factors;
};

inline void split_product(const Expr& e, Rational& k, std::map<Expr, unsigned, ExprLess>& factors) {
  switch (e.op()) {
    case Op::Rat: k *= e.num(); return;
    case Op::Neg: k = -k; split_product(e.arg(0), k, factors); return;
    case Op::Mul:
      split_product(e.arg(0), k, factors);
      split_product(e.arg(1), k, factors);
      return;
    case Op::Div:
      if (e.arg(1).is_rat() && e.arg(1).num() != 0) {
        k /= e.arg(1).num();
        split_product(e.arg(0), k, factors);
        return;
      }
      break;
    case Op::Pow:
      if (e.n() == 0) return;
      if (e.arg(0).is_rat()) {
        k *= pow_nat(e.arg(0).num(), e.n());
        return;
      }
      factors[e.arg(0)] += e.n();
      return;
    default: break;
  }
  factors[e] += 1;
}

inline void collect_sum(const Expr& e, const Rational& c, std::vector<Term>& out) {
  switch (e.op()) {
    case Op::Add:
      collect_sum(e.arg(0), c, out);
      collect_sum(e.arg(1), c, out);
      return;
    case Op::Sub:
      collect_sum(e.arg(0), c, out);
      collect_sum(e.arg(1), -c, out);
      return;
    case Op::Neg: collect_sum(e.arg(0), -c, out); return;
    default: break;
  }
  Term t;
  t.coef = c;
  split_product(e, t.coef, t.factors);
  if (t.factors.size() == 1 && t.factors.begin()->second == 1) {
    const Expr& b = t.factors.begin()->first;
    if (b.is(Op::Add) || b.is(Op::Sub) || b.is(Op::Neg)) {
      collect_sum(b, t.coef, out);  // c * (p + q) spreads over the sum
      return;
    }
  }
  out.push_back(std::move(t));
}

inline int compare_factors(const std::map<Expr, unsigned, ExprLess>& a, const std::map<Expr, unsigned, ExprLess>& b) {
  auto ia = a.begin(), ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first); c != 0) return c;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
  }
  if (ia == a.end() && ib == b.end()) return 0;
  return ia == a.end() ? 1 : -1;  // constants sort last
}

inline Expr monomial(const std::map<Expr, unsigned, ExprLess>& factors) {
  Expr acc;
  for (const auto& [b, n] : factors) {
    Expr f = n == 1 ? b : pow(b, n);
    acc = acc.valid() ? acc * f : f;
  }
  return acc;
}

inline Expr term_expr(const Rational& c, const std::map<Expr, unsigned, ExprLess>& factors) {
  if (factors.empty()) return lit(c);
  if (c == 1) return monomial(factors);
  if (c == -1) return -monomial(factors);
  Expr acc = lit(c);
  for (const auto& [b, n] : factors) acc = acc * (n == 1 ? b : pow(b, n));
  return acc;
}

/// Canonical sum of products for a real-kinded arithmetic node.
inline Expr normalize_sum(const Expr& e) {
  std::vector<Term> raw;
  collect_sum(e, Rational(1), raw);
  std::vector<Term> terms;
  for (auto& t : raw) {
    if (t.coef == 0) continue;
    auto it = std::find_if(terms.begin(), terms.end(),
                           [&](const Term& u) { return compare_factors(u.factors, t.factors) == 0; });
    if (it == terms.end()) terms.push_back(std::move(t));
    else it->coef += t.coef;
  }
  std::erase_if(terms, [](const Term& t) { return t.coef == 0; });
  if (terms.empty()) return lit(0);
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return compare_factors(a.factors, b.factors) < 0; });
  Expr acc = term_expr(terms[0].coef, terms[0].factors);
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (t.coef < 0) acc = acc - term_expr(-t.coef, t.factors);
    else acc = acc + term_expr(t.coef, t.factors);
  }
  return acc;
}

inline bool is_zero_vec(const Expr& e) {
  if (!e.is(Op::VecLit)) return false;
  for (const auto& a : e.args())
    if (!a.is_rat(0)) return false;
  return true;
}

inline std::optional<Rational> exact_fn(Op op, const Rational& x) {
  try {
    return transcendental(op, x);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Expr simplify_node(const Expr& e);

inline Expr simp(const Expr& e) { return simplify_node(e); }

inline Expr simplify_node(const Expr& e) {
  const auto& a = e.args();
  switch (e.op()) {
    case Op::Neg:
      if (a[0].is(Op::VecLit)) {
        std::vector<Expr> xs;
        for (const auto& x : a[0].args()) xs.push_back(simp(-x));
        return veclit(std::move(xs));
      }
      if (a[0].is(Op::Neg)) return a[0].arg(0);
      return e.kind().is_real() ? normalize_sum(e) : e;
    case Op::Add:
    case Op::Sub:
      if (e.kind().is_real()) return normalize_sum(e);
      if (is_zero_vec(a[1])) return a[0];
      if (is_zero_vec(a[0])) return e.is(Op::Add) ? a[1] : simp(-a[1]);
      if (a[0].is(Op::VecLit) && a[1].is(Op::VecLit)) {
        std::vector<Expr> xs;
        for (std::size_t i = 0; i < a[0].args().size(); ++i)
          xs.push_back(simp(e.is(Op::Add) ? a[0].arg(i) + a[1].arg(i) : a[0].arg(i) - a[1].arg(i)));
        return veclit(std::move(xs));
      }
      return e;
    case Op::Mul: return normalize_sum(e);
    case Op::Div:
      if (a[1].is_rat() && a[1].num() != 0) return normalize_sum(e);
      if (a[0].is_rat() && a[1].is_rat() && a[1].num() != 0) return lit(a[0].num() / a[1].num());
      return e;
    case Op::Pow:
      if (e.n() == 0) return lit(1);
      if (e.n() == 1) return a[0];
      return normalize_sum(e);
    case Op::Ln:
    case Op::Exp:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      if (a[0].is_rat()) {
        if (e.is(Op::Ln) && a[0].num() <= 0) return e;
        if (auto r = exact_fn(e.op(), a[0].num())) return lit(*r);
      }
      return e;
    case Op::Inner:
      if (is_zero_vec(a[0]) || is_zero_vec(a[1])) return lit(0);
      if (a[0].is(Op::VecLit) && a[1].is(Op::VecLit)) {
        Expr acc = a[0].arg(0) * a[1].arg(0);
        for (std::size_t i = 1; i < a[0].args().size(); ++i) acc = acc + a[0].arg(i) * a[1].arg(i);
        return normalize_sum(acc);
      }
      return e;
    case Op::ScalarMul:
      if (a[0].is_rat(1)) return a[1];
      if (a[0].is_rat(0) || is_zero_vec(a[1])) return zero_of(e.kind());
      if (a[1].is(Op::VecLit)) {
        std::vector<Expr> xs;
        for (const auto& x : a[1].args()) xs.push_back(simp(a[0] * x));
        return veclit(std::move(xs));
      }
      return e;
    case Op::Nth:
      if (a[0].is(Op::VecLit)) return a[0].arg(e.n() - 1);
      if (a[0].is(Op::Var) && a[0].lens().tag == LensRef::Tag::Var)
        return var(LensRef::coord(a[0].lens().name, e.n()), Kind::real());
      if (a[0].is(Op::ScalarMul)) return simp(a[0].arg(0) * simp(nth(a[0].arg(1), e.n())));
      return e;
    case Op::Eq:
    case Op::Neq:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: {
      if (same(a[0], a[1])) return lit_bool(e.is(Op::Eq) || e.is(Op::Le) || e.is(Op::Ge));
      if (a[0].is_rat() && a[1].is_rat()) {
        const Rational &x = a[0].num(), &y = a[1].num();
        switch (e.op()) {
          case Op::Eq: return lit_bool(x == y);
          case Op::Neq: return lit_bool(x != y);
          case Op::Le: return lit_bool(x <= y);
          case Op::Lt: return lit_bool(x < y);
          case Op::Ge: return lit_bool(x >= y);
          default: return lit_bool(x > y);
        }
      }
      if (a[0].is(Op::Bool) && a[1].is(Op::Bool))
        return lit_bool((a[0].flag() == a[1].flag()) == e.is(Op::Eq));
      if ((e.is(Op::Eq) || e.is(Op::Neq)) && a[0].is(Op::VecLit) && a[1].is(Op::VecLit)) {
        std::vector<Expr> parts;
        for (std::size_t i = 0; i < a[0].args().size(); ++i) parts.push_back(simp(eq(a[0].arg(i), a[1].arg(i))));
        Expr c = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) c = simp(and_(c, parts[i]));
        return e.is(Op::Eq) ? c : simp(not_(c));
      }
      return e;
    }
    case Op::And:
      if (a[0].is_false() || a[1].is_false()) return ff();
      if (a[0].is_true()) return a[1];
      if (a[1].is_true() || same(a[0], a[1])) return a[0];
      return e;
    case Op::Or:
      if (a[0].is_true() || a[1].is_true()) return tt();
      if (a[0].is_false()) return a[1];
      if (a[1].is_false() || same(a[0], a[1])) return a[0];
      return e;
    case Op::Not:
      if (a[0].is(Op::Bool)) return lit_bool(!a[0].flag());
      if (a[0].is(Op::Not)) return a[0].arg(0);
      return e;
    case Op::Implies:
      if (a[0].is_false() || a[1].is_true() || same(a[0], a[1])) return tt();
      if (a[0].is_true()) return a[1];
      if (a[1].is_false()) return simp(not_(a[0]));
      return e;
    case Op::Iff:
      if (same(a[0], a[1])) return tt();
      if (a[0].is_true()) return a[1];
      if (a[1].is_true()) return a[0];
      if (a[0].is_false()) return simp(not_(a[1]));
      if (a[1].is_false()) return simp(not_(a[0]));
      return e;
    case Op::Ite:
      if (a[0].is(Op::Bool)) return a[0].flag() ? a[1] : a[2];
      if (same(a[1], a[2])) return a[1];
      return e;
    case Op::Exists:
    case Op::Forall: {
      if (a[0].is(Op::Bool)) return a[0];
      for (const auto& [n, k] : free_logicals(a[0]))
        if (n == e.name()) return e;
      return a[0];
    }
    default: return e;
  }
}

}  // namespace detail

/// Evaluation-preserving normalisation: constant folding, unit laws,
/// flattening of sums and products with like terms combined.
inline Expr simplify(const Expr& e) { return transform(e, detail::simplify_node); }

}  // namespace hsv
