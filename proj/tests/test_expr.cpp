#include "gen.hpp"

#include <hsv/eval.hpp>
#include <hsv/poly.hpp>
#include <hsv/simplify.hpp>
#include <hsv/subst.hpp>

#include <gtest/gtest.h>

using namespace hsv;

namespace {

DataspacePtr xyz() { return gen::sample_dataspace(); }

Store store_xy(const Rational& x, const Rational& y) {
  Store s(xyz());
  s.set("x", Value(x));
  s.set("y", Value(y));
  return s;
}

Expr X() { return var("x"); }
Expr Y() { return var("y"); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::UnknownName;
}

}  // namespace

TEST(Eval, Examples) {
  Env env{{"z", Value(3)}, {"r", Value(5)}};
  auto z = logical("z");
  EXPECT_EQ(eval(pow(X() + Y(), 2) / z, store_xy(1, 2), env), Value(3));
  auto r = logical("r");
  EXPECT_EQ(eval(eq(pow(r, 2), pow(X(), 2) + pow(Y(), 2)), store_xy(3, 4), env), Value(true));
  EXPECT_EQ(code_of([&] { eval(lit(1) / X(), store_xy(0, 0)); }), ErrorCode::DivisionByZero);
  EXPECT_EQ(code_of([&] { eval(ln(X()), store_xy(0, 0)); }), ErrorCode::LnNonPositive);
  EXPECT_EQ(code_of([&] { eval(sqrt(X()), store_xy(-1, 0)); }), ErrorCode::SqrtNegative);
  EXPECT_EQ(code_of([&] { eval(logical("q"), store_xy(0, 0)); }), ErrorCode::UnboundLogicalVar);
}

TEST(Eval, VectorsAndExactSpecialCases) {
  Store s = store_xy(0, 4);
  s.set("w", Value(std::vector<Rational>{3, 4}));
  auto w = var("w", Kind::vec(2));
  EXPECT_EQ(eval(norm(w), s), Value(5));
  EXPECT_EQ(eval(inner(w, w), s), Value(25));
  EXPECT_EQ(eval(nth(smul(lit(2), w), 2), s), Value(8));
  EXPECT_EQ(eval(exp(X()), s), Value(1));
  EXPECT_EQ(eval(sqrt(Y()), s), Value(2));
  EXPECT_EQ(code_of([&] { eval(exp(Y()), s); }), ErrorCode::Inexact);
  EXPECT_NEAR(eval(exp(Y()), to_num(s)).real(), std::exp(4.0), 1e-12);
}

TEST(Expr, KindChecks) {
  EXPECT_THROW(X() + tt(), Error);
  EXPECT_THROW(and_(X(), tt()), Error);
  EXPECT_THROW(inner(var("v", Kind::vec(3)), var("w", Kind::vec(2))), Error);
  EXPECT_THROW(nth(var("w", Kind::vec(2)), 3), Error);
}

TEST(Subst, SimultaneousRead) {
  Subst swap{{LensRef::var("x"), Y()}, {LensRef::var("y"), X()}};
  Store out = subst_apply(swap, store_xy(1, 2));
  EXPECT_EQ(out.get("x"), Value(2));
  EXPECT_EQ(out.get("y"), Value(1));
  Store s = store_xy(7, 8);
  EXPECT_EQ(subst_apply(Subst{}, s), s);
}

TEST(Subst, TankReset) {
  auto ds = std::make_shared<Dataspace>("tank");
  ds->declare("t", Kind::real());
  ds->declare("h", Kind::real());
  ds->declare("hm", Kind::real());
  Store s(ds);
  s.set("t", Value(5));
  s.set("h", Value(2));
  s.set("hm", Value(9));
  Subst reset{{LensRef::var("t"), lit(0)}, {LensRef::var("hm"), var("h")}};
  Store out = subst_apply(reset, s);
  EXPECT_EQ(out.get("t"), Value(0));
  EXPECT_EQ(out.get("hm"), Value(2));
  EXPECT_EQ(out.get("h"), Value(2));
}

TEST(Subst, Lookup) {
  Expr e1 = X() + lit(1), e2 = Y() * Y();
  Subst s{{LensRef::var("x"), e1}, {LensRef::var("y"), e2}};
  EXPECT_TRUE(same(subst_lookup(s, LensRef::var("x")), e1));
  EXPECT_TRUE(same(subst_lookup(Subst{{LensRef::var("x"), e1}}, LensRef::var("y")), Y()));
  Subst vs{{LensRef::var("w"), veclit({X(), Y()})}};
  EXPECT_TRUE(same(subst_lookup(vs, LensRef::coord("w", 2)), Y()));
}

// Lookup of a coordinate agrees with evaluating the whole update, also when
// the update is not a literal.
TEST(Subst, LookupAgreesWithEval) {
  std::mt19937_64 rng(5);
  auto ds = xyz();
  auto w = var("w", Kind::vec(2));
  Subst vs{{LensRef::var("w"), smul(X(), w) + veclit({Y(), lit(1)})}};
  for (int i = 0; i < 100; ++i) {
    Store s = gen::random_store(rng, ds);
    for (unsigned k = 1; k <= 2; ++k) {
      Value direct = eval(subst_lookup(vs, LensRef::coord("w", k)), s);
      Value via = lens_get(LensRef::coord("w", k), subst_apply(vs, s));
      ASSERT_EQ(direct, via);
    }
  }
}

TEST(Subst, UnrestExamples) {
  EXPECT_TRUE(unrest(Frame{LensRef::var("x")}, lit(5)));
  EXPECT_FALSE(unrest(Frame{LensRef::var("x")}, X() + Y()));
  EXPECT_TRUE(unrest(Frame{LensRef::coord("v", 1)}, var(LensRef::coord("v", 2), Kind::real())));
  EXPECT_FALSE(unrest(Frame{LensRef::var("v")}, var(LensRef::coord("v", 2), Kind::real())));
}

TEST(Subst, UnrestCoordinateSound) {
  std::mt19937_64 rng(8);
  auto ds = xyz();
  Expr e = var(LensRef::coord("v", 2), Kind::real());
  for (int i = 0; i < 100; ++i) {
    Store s = gen::random_store(rng, ds);
    Store t = lens_put(LensRef::coord("v", 1), Value(gen::random_rational(rng)), s);
    ASSERT_EQ(eval(e, s), eval(e, t));
  }
}

TEST(Subst, ComposedAssignmentSimplification) {
  Expr c = logical("c");
  Expr e = pow(X() + Y(), 2) / c;
  Expr r = simplify(subst_apply_expr(e, Subst{{LensRef::var("y"), lit(2) * X()}}));
  EXPECT_EQ(to_string(r), "(3 * x)^2 / c");
  EXPECT_TRUE(same(r, pow(lit(3) * X(), 2) / c));
}

TEST(Subst, TankInitiation) {
  Expr inv = eq(var("h"), (logical("ci") - logical("co")) * var("t") + var("hm"));
  Subst reset{{LensRef::var("t"), lit(0)}, {LensRef::var("hm"), var("h")}};
  EXPECT_TRUE(simplify(subst_apply_expr(inv, reset)).is_true());
}

TEST(Subst, AvoidsCaptureOfLogicals) {
  Expr body = forall("tau", le(X(), logical("tau")));
  Expr r = subst_apply_expr(body, Subst{{LensRef::var("x"), logical("tau") + lit(1)}});
  ASSERT_TRUE(r.is(Op::Forall));
  EXPECT_NE(r.name(), "tau");
  EXPECT_EQ(free_logicals(r).size(), 1u);
}

TEST(Simplify, WorkedExamples) {
  EXPECT_TRUE(same(simplify(lit(2) * lit(1) * X()), lit(2) * X()));
  EXPECT_TRUE(simplify(lit(2) * lit(0) * X()).is_rat(0));
  Expr e = -X() * pow(Y(), 2) + X() * pow(Y(), 2);
  EXPECT_TRUE(simplify(e).is_rat(0));
  EXPECT_TRUE(simplify(lit(2) * Y() * X() + lit(2) * (-X()) * Y()).is_rat(0));
}

TEST(Simplify, Idempotent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    Expr e = gen::random_real_expr(rng, 4);
    Expr s = simplify(e);
    ASSERT_TRUE(same(simplify(s), s)) << to_string(e);
  }
}

class ExprProperties : public ::testing::Test {
 protected:
  DataspacePtr ds = xyz();
  std::mt19937_64 rng{77};

  std::optional<Value> try_eval(const Expr& e, const Store& s) {
    try {
      return eval(e, s);
    } catch (const Error& err) {
      if (!err.is_eval_error()) throw;
      return std::nullopt;
    }
  }
};

TEST_F(ExprProperties, SubstitutionCoherence) {
  for (int i = 0; i < 500; ++i) {
    Expr e = gen::random_real_expr(rng, 4);
    Subst sigma;
    sigma.set(LensRef::var("x"), gen::random_real_expr(rng, 2));
    if (i % 2) sigma.set(LensRef::coord("v", 2), gen::random_real_expr(rng, 2));
    if (i % 3 == 0) sigma.set(LensRef::var("y"), var("x"));
    Store s = gen::random_store(rng, ds);
    auto lhs = try_eval(subst_apply_expr(e, sigma), s);
    std::optional<Value> rhs;
    try {
      rhs = try_eval(e, subst_apply(sigma, s));
    } catch (const Error& err) {
      if (!err.is_eval_error()) throw;
    }
    ASSERT_EQ(lhs.has_value(), rhs.has_value());
    if (lhs) ASSERT_EQ(*lhs, *rhs) << to_string(e) << " with " << sigma.str();
  }
}

TEST_F(ExprProperties, UnrestSound) {
  Frame a{LensRef::var("y"), LensRef::coord("v", 1)};
  int checked = 0;
  for (int i = 0; i < 2000 && checked < 300; ++i) {
    Expr e = gen::random_real_expr(rng, 3);
    if (!unrest(a, e)) continue;
    ++checked;
    Store s = gen::random_store(rng, ds);
    Value part = gen::random_lens_value(rng, a.as_lens(), *ds);
    ASSERT_EQ(try_eval(e, s), try_eval(e, lens_put(a.as_lens(), part, s))) << to_string(e);
  }
  EXPECT_GT(checked, 50);
}

TEST_F(ExprProperties, SimplifyPreservesValue) {
  for (int i = 0; i < 1000; ++i) {
    Expr e = gen::random_real_expr(rng, 4);
    Store s = gen::random_store(rng, ds);
    auto before = try_eval(e, s);
    if (!before) continue;
    ASSERT_EQ(try_eval(simplify(e), s), before) << to_string(e) << " ~> " << to_string(simplify(e));
  }
}

TEST_F(ExprProperties, LookupOfUntouchedIsRead) {
  for (int i = 0; i < 200; ++i) {
    Subst sigma{{LensRef::var("x"), gen::random_real_expr(rng, 2)},
                {LensRef::coord("v", 1), gen::random_real_expr(rng, 2)}};
    for (const auto& l : {LensRef::var("y"), LensRef::coord("v", 3), LensRef::var("z")})
      ASSERT_TRUE(same(subst_lookup(sigma, l), var(l, Kind::real())));
  }
}

TEST(Poly, Examples) {
  EXPECT_TRUE(poly_normalize(lit(2) * Y() * X() - lit(2) * X() * Y()).is_rat(0));
  EXPECT_EQ(to_string(poly_normalize(pow(X() + Y(), 2))), "x^2 + 2 * x * y + y^2");
  EXPECT_TRUE(poly_normalize(-X() * pow(Y(), 2) + X() * pow(Y(), 2)).is_rat(0));
}

TEST(Poly, TrigAndRootIdentities) {
  Expr t = logical("t");
  EXPECT_TRUE(poly_equal(pow(sin(t), 2) + pow(cos(t), 2), lit(1)));
  EXPECT_TRUE(poly_equal(pow(sqrt(X()), 2), X()));
  auto w = var("w", Kind::vec(2));
  EXPECT_TRUE(poly_equal(pow(norm(w), 2), inner(w, w)));
}

TEST_F(ExprProperties, PolyNormalizeIdempotentAndSound) {
  for (int i = 0; i < 500; ++i) {
    Expr e = gen::random_real_expr(rng, 4);
    Expr n = poly_normalize(e);
    ASSERT_TRUE(same(poly_normalize(n), n)) << to_string(e);
    Store s = gen::random_store(rng, ds);
    auto before = try_eval(e, s);
    if (!before) continue;
    ASSERT_EQ(try_eval(n, s), before) << to_string(e);
  }
}

// Valid poly identities survive 10^4 random points.
TEST_F(ExprProperties, PolyZeroHasNoCounterexample) {
  Expr e = pow(X() + Y(), 3) - (pow(X(), 3) + lit(3) * pow(X(), 2) * Y() + lit(3) * X() * pow(Y(), 2) + pow(Y(), 3));
  ASSERT_TRUE(poly_normalize(e).is_rat(0));
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(eval(e, gen::random_store(rng, ds)), Value(0));
}
