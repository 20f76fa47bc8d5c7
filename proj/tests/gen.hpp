#pragma once
// Random generators shared by the property suites.

#include <hsv/expr.hpp>
#include <hsv/program.hpp>
#include <hsv/simplify.hpp>
#include <hsv/store.hpp>

#include <random>

namespace hsv::gen {

inline DataspacePtr sample_dataspace() {
  auto ds = std::make_shared<Dataspace>("sample");
  ds->declare("x", Kind::real());
  ds->declare("y", Kind::real());
  ds->declare("z", Kind::real());
  ds->declare("b", Kind::boolean());
  ds->declare("v", Kind::vec(3));
  ds->declare("w", Kind::vec(2));
  return ds;
}

inline Rational random_rational(std::mt19937_64& rng, int range = 20, int den = 8) {
  std::uniform_int_distribution<int> n(-range * den, range * den), d(1, den);
  return make_rational(n(rng), d(rng));
}

inline Value random_value(std::mt19937_64& rng, const Kind& k) {
  switch (k.tag) {
    case Kind::Tag::Real: return Value(random_rational(rng));
    case Kind::Tag::Bool: return Value(std::bernoulli_distribution(0.5)(rng));
    case Kind::Tag::Vec: {
      std::vector<Rational> xs;
      for (unsigned i = 0; i < k.dim; ++i) xs.push_back(random_rational(rng));
      return Value(std::move(xs));
    }
  }
  return {};
}

inline Store random_store(std::mt19937_64& rng, const DataspacePtr& ds) {
  Store s(ds);
  for (const auto& d : ds->decls()) s.set(d.name, random_value(rng, d.kind));
  return s;
}

inline LensRef random_primitive(std::mt19937_64& rng, const Dataspace& ds) {
  const auto& decls = ds.decls();
  const auto& d = decls[std::uniform_int_distribution<std::size_t>(0, decls.size() - 1)(rng)];
  if (d.kind.is_vec() && std::bernoulli_distribution(0.6)(rng))
    return LensRef::coord(d.name, std::uniform_int_distribution<unsigned>(1, d.kind.dim)(rng));
  return LensRef::var(d.name);
}

/// A primitive, or a sum of up to three independent primitives.
inline LensRef random_lens(std::mt19937_64& rng, const Dataspace& ds) {
  if (std::bernoulli_distribution(0.6)(rng)) return random_primitive(rng, ds);
  std::vector<LensRef> parts;
  int want = std::uniform_int_distribution<int>(2, 3)(rng);
  for (int tries = 0; tries < 20 && static_cast<int>(parts.size()) < want; ++tries) {
    auto p = random_primitive(rng, ds);
    bool ok = true;
    for (const auto& q : parts) ok = ok && lens_indep(p, q);
    if (ok) parts.push_back(p);
  }
  if (parts.size() == 1) return parts.front();
  return LensRef::sum(std::move(parts));
}

inline Value random_lens_value(std::mt19937_64& rng, const LensRef& l, const Dataspace& ds) {
  if (l.is_primitive()) return random_value(rng, lens_kind(l, ds));
  Value::Tuple parts;
  for (const auto& p : l.parts) parts.push_back(random_lens_value(rng, p, ds));
  return Value::tuple(std::move(parts));
}

/// Random real-kinded expression over x, y, z and coordinates of v.
/// Transcendental nodes are only generated when asked for.
inline Expr random_real_expr(std::mt19937_64& rng, int depth, bool transcendental = false) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(5)) {
      case 0: return lit(make_rational(pick(9) - 4, 1 + pick(3)));
      case 1: return var("x");
      case 2: return var("y");
      case 3: return var("z");
      default: return var(LensRef::coord("v", 1 + pick(3)), Kind::real());
    }
  }
  auto sub = [&] { return random_real_expr(rng, depth - 1, transcendental); };
  int choices = transcendental ? 9 : 6;
  switch (pick(choices)) {
    case 0: return sub() + sub();
    case 1: return sub() - sub();
    case 2: return sub() * sub();
    case 3: return -sub();
    case 4: return pow(sub(), 1 + pick(3));
    case 5: return sub() / lit(1 + pick(4));
    case 6: return sin(sub());
    case 7: return cos(sub());
    default: return exp(sub() / lit(8));
  }
}

/// Random dyadic rational: exactly representable as a double, so exact
/// and floating evaluation agree on small polynomial expressions.
inline Rational random_dyadic(std::mt19937_64& rng, int range = 8) {
  std::uniform_int_distribution<int> n(-range * 4, range * 4), e(0, 2);
  return make_rational(n(rng), 1 << e(rng));
}

/// Dyadic polynomial over x, y, z (no division except by powers of two).
inline Expr random_dyadic_expr(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth <= 0 || pick(3) == 0) {
    switch (pick(4)) {
      case 0: return lit(random_dyadic(rng, 3));
      case 1: return var("x");
      case 2: return var("y");
      default: return var("z");
    }
  }
  auto sub = [&] { return random_dyadic_expr(rng, depth - 1); };
  switch (pick(5)) {
    case 0: return sub() + sub();
    case 1: return sub() - sub();
    case 2: return sub() * sub();
    case 3: return -sub();
    default: return sub() / lit(2);
  }
}

inline Expr random_comparison(std::mt19937_64& rng) {
  Expr a = random_dyadic_expr(rng, 1), b = random_dyadic_expr(rng, 1);
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return le(a, b);
    case 1: return lt(a, b);
    case 2: return eq(a, b);
    default: return var("b", Kind::boolean());
  }
}

inline Expr random_predicate(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth <= 0 || pick(2) == 0) return random_comparison(rng);
  auto sub = [&] { return random_predicate(rng, depth - 1); };
  switch (pick(4)) {
    case 0: return and_(sub(), sub());
    case 1: return or_(sub(), sub());
    case 2: return not_(sub());
    default: return implies(sub(), sub());
  }
}

/// Loop-free, ODE-free program over x, y, z, b.
inline Program random_discrete_program(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto leaf = [&]() -> Program {
    switch (pick(8)) {
      case 0: return Program::skip();
      case 1: return Program::abort();
      case 2: return Program::test(random_comparison(rng));
      case 3: return Program::assign(Subst{{LensRef::var("b"), random_comparison(rng)}});
      case 4: {
        // simultaneous update of two reals
        return Program::assign(Subst{{LensRef::var("x"), random_dyadic_expr(rng, 2)},
                                     {LensRef::var("y"), random_dyadic_expr(rng, 2)}});
      }
      default: {
        const char* names[] = {"x", "y", "z"};
        return Program::assign(Subst{{LensRef::var(names[pick(3)]), random_dyadic_expr(rng, 2)}});
      }
    }
  };
  if (depth <= 0 || pick(3) == 0) return leaf();
  auto sub = [&] { return random_discrete_program(rng, depth - 1); };
  switch (pick(3)) {
    case 0: return Program::seq(sub(), sub());
    case 1: return Program::choice(sub(), sub());
    default: return Program::if_(random_comparison(rng), sub(), sub());
  }
}

}  // namespace hsv::gen
