#include "gen.hpp"

#include <hsv/arith.hpp>

#include <gtest/gtest.h>

using namespace hsv;

namespace {

Expr X() { return var("x"); }
Expr Y() { return var("y"); }

VC vc_of(Expr f) { return VC{"vc1", std::move(f), "wp", {}}; }

DataspacePtr xy_space() {
  auto ds = std::make_shared<Dataspace>("xy");
  ds->declare("x", Kind::real());
  ds->declare("y", Kind::real());
  return ds;
}

ArithCtx ctx_for(DataspacePtr ds, std::vector<Expr> facts = {}) {
  ArithCtx c;
  c.ds = std::move(ds);
  c.assumptions = std::move(facts);
  c.box = Box::from_assumptions(c.assumptions);
  return c;
}

// 0 = 2*y*x + 2*(-x)*y, the pendulum invariant's derivative condition
Expr pendulum_vc() { return eq(lit(0), lit(2) * Y() * X() + lit(2) * (-X()) * Y()); }

// x >= 1 -> forall tau >= 0. x * exp(-tau) >= 1
Expr decay_vc() {
  return implies(ge(X(), lit(1)), forall("tau", implies(le(lit(0), tau()), ge(X() * exp(-tau()), lit(1)))));
}

}  // namespace

TEST(Lp, FeasibleAndInfeasible) {
  // x + y = 1, x - y = 0 -> x = y = 1/2
  lp::Problem p;
  p.cols = 2;
  p.add_row({{0, 1}, {1, 1}}, 1);
  p.add_row({{0, 1}, {1, -1}}, 0);
  auto r = lp::solve(p);
  ASSERT_EQ(r.outcome, lp::Outcome::Feasible);
  EXPECT_EQ(r.x[0], make_rational(1, 2));
  EXPECT_EQ(r.x[1], make_rational(1, 2));
  // x + y = -1 has no nonnegative solution
  lp::Problem q;
  q.cols = 2;
  q.add_row({{0, 1}, {1, 1}}, -1);
  EXPECT_EQ(lp::solve(q).outcome, lp::Outcome::Infeasible);
}

TEST(Lp, RandomSolutionsSatisfyRows) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    lp::Problem p;
    p.cols = 4;
    std::vector<Rational> x0;
    for (int j = 0; j < 4; ++j) x0.push_back(make_rational(rng() % 5, 1 + rng() % 3));
    for (int i = 0; i < 3; ++i) {
      std::map<std::size_t, Rational> row;
      Rational b;
      for (std::size_t j = 0; j < 4; ++j) {
        Rational c = make_rational(static_cast<long>(rng() % 7) - 3);
        row[j] = c;
        b += c * x0[j];
      }
      p.add_row(row, b);
    }
    auto r = lp::solve(p);
    ASSERT_EQ(r.outcome, lp::Outcome::Feasible);  // x0 witnesses feasibility
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      Rational lhs;
      for (const auto& [j, c] : p.rows[i]) lhs += c * r.x[j];
      EXPECT_EQ(lhs, p.rhs[i]);
    }
    for (const auto& v : r.x) EXPECT_GE(v, 0);
  }
}

TEST(Arith, PolyNormalizeExamples) {
  EXPECT_TRUE(poly_normalize(lit(2) * Y() * X() - lit(2) * X() * Y()).is_rat());
  EXPECT_EQ(to_string(poly_normalize(lit(2) * Y() * X() - lit(2) * X() * Y())), "0");
  EXPECT_TRUE(poly_equal(pow(X() + Y(), 2), X() * X() + lit(2) * X() * Y() + Y() * Y()));
}

TEST(Arith, PendulumVcIsValidByPoly) {
  auto v = prove_vc(vc_of(pendulum_vc()), ctx_for(xy_space()));
  ASSERT_TRUE(v.is_valid()) << v.detail;
}

TEST(Arith, TankInductionVc) {
  auto ds = std::make_shared<Dataspace>("tank");
  ds->declare("ci", Kind::real(), Role::Constant);
  ds->declare("co", Kind::real(), Role::Constant);
  Expr ci = var("ci"), co = var("co");
  Expr f = implies(lt(co, ci), eq(ci - co, (ci - co) * lit(1) + lit(0)));
  auto v = prove_vc(vc_of(f), ctx_for(ds));
  ASSERT_TRUE(v.is_valid());
}

TEST(Arith, PositiveTimesExponential) {
  Expr f = implies(gt(X(), lit(0)), forall("tau", implies(le(lit(0), tau()), gt(X() * exp(-tau()), lit(0)))));
  auto v = prove_vc(vc_of(f), ctx_for(xy_space()));
  ASSERT_TRUE(v.is_valid()) << v.detail;
  EXPECT_NE(v.detail.find("sign"), std::string::npos) << v.detail;
}

TEST(Arith, GhostEquivalence) {
  Expr vv = logical("v");
  Expr f = iff(lt(lit(0), X()), exists("v", eq(X() * pow(vv, 2), lit(1))));
  auto v = prove_vc(vc_of(f), ctx_for(xy_space()));
  ASSERT_TRUE(v.is_valid()) << v.detail;
  EXPECT_NE(v.detail.find("witness"), std::string::npos) << v.detail;
}

TEST(Arith, SmallLemmas) {
  auto ctx = ctx_for(xy_space());
  auto valid = [&](const Expr& f) { return prove_vc(vc_of(f), ctx).is_valid(); };
  EXPECT_TRUE(valid(implies(and_(le(X(), Y()), le(Y(), X())), eq(X(), Y()))));
  EXPECT_TRUE(valid(ge(X() * X(), lit(0))));
  EXPECT_TRUE(valid(implies(gt(X(), lit(1)), gt(X() * X(), X()))));
  EXPECT_TRUE(valid(implies(and_(ge(X(), lit(0)), le(X(), lit(1))), le(X() * X(), lit(1)))));
  EXPECT_TRUE(valid(le(sin(X()), lit(1))));
  EXPECT_TRUE(valid(eq(pow(sin(X()), 2) + pow(cos(X()), 2), lit(1))));
  EXPECT_TRUE(valid(implies(gt(X(), lit(0)), gt(sqrt(X()) * sqrt(X()), lit(0)))));
  EXPECT_TRUE(valid(ge(ite(gt(X(), lit(0)), X(), -X()), lit(0))));
  // not valid, and no false Valid
  EXPECT_FALSE(valid(gt(X(), lit(0))));
  EXPECT_FALSE(valid(implies(gt(X(), lit(0)), gt(X(), lit(1)))));
}

TEST(Arith, FalsifyDecayStep) {
  auto ctx = ctx_for(xy_space());
  VC vc = vc_of(decay_vc());
  Verdict v = falsify(vc, ctx, 1000, 1);
  ASSERT_TRUE(v.is_invalid());
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_TRUE(witness_refutes(vc, ctx, *v.witness, v.env));
  // closed form: x * exp(-tau) < 1 exactly when tau > ln x
  double x = to_double(v.witness->get("x").real()), t = to_double(v.env.at("tau").real());
  EXPECT_GE(x, 1.0);
  EXPECT_GT(t, std::log(x));
  // the pipeline reports it too
  EXPECT_TRUE(prove_vc(vc, ctx).is_invalid());
}

TEST(Arith, FalsifyNeverRefutesTrueOrValid) {
  auto ctx = ctx_for(xy_space());
  EXPECT_EQ(falsify(vc_of(tt()), ctx, 1000, 1).status, Verdict::Status::Unknown);
  EXPECT_EQ(falsify(vc_of(pendulum_vc()), ctx, 10000, 2).status, Verdict::Status::Unknown);
}

TEST(Arith, WitnessesRecheckExactly) {
  auto ds = gen::sample_dataspace();
  auto ctx = ctx_for(ds);
  std::mt19937_64 rng(5);
  int found = 0;
  for (int i = 0; i < 200; ++i) {
    VC vc = vc_of(implies(gen::random_comparison(rng), gen::random_comparison(rng)));
    Verdict v = falsify(vc, ctx, 200, rng());
    if (!v.is_invalid()) continue;
    ++found;
    EXPECT_FALSE(holds(vc.formula, *v.witness, v.env)) << to_string(vc.formula);
  }
  EXPECT_GT(found, 50);
}

TEST(Arith, ValidIsSoundOnRandomPoints) {
  auto ds = gen::sample_dataspace();
  std::mt19937_64 rng(13);
  ArithConfig cfg;
  int proved = 0, points = 0;
  for (int i = 0; i < 600; ++i) {
    Expr f = implies(and_(gen::random_comparison(rng), gen::random_comparison(rng)), gen::random_comparison(rng));
    if (!prove_formula(f, {}, cfg)) continue;
    ++proved;
    for (int k = 0; k < 10000 / 50 && points < 10000; ++k, ++points) {
      Store s = gen::random_store(rng, ds);
      for (const char* n : {"x", "y", "z"}) s.set(n, Value(gen::random_dyadic(rng)));
      ASSERT_TRUE(holds(f, s)) << to_string(f) << " at " << s.str();
    }
  }
  EXPECT_GT(proved, 20);
  EXPECT_GE(points, 5000);
}

TEST(Arith, BoxFromAssumptions) {
  Box b = Box::from_assumptions({and_(lt(lit(0), X()), le(X(), lit(5))), ge(var("h"), lit(2))});
  EXPECT_EQ(b.of("x").lo, make_rational(1, 64));
  EXPECT_EQ(b.of("x").hi, 5);
  EXPECT_EQ(b.of("h").lo, 2);
  EXPECT_EQ(b.of("y").lo, -100);
}

TEST(Smt, PendulumGolden) {
  std::string s = emit_smtlib(vc_of(pendulum_vc()), {});
  EXPECT_EQ(s,
            "; vc1 (wp)\n"
            "(set-logic QF_NRA)\n"
            "(declare-const x Real)\n"
            "(declare-const y Real)\n"
            "(assert (not (= 0 (+ (* 2 y x) (* 2 (- x) y)))))\n"
            "(check-sat)\n");
  EXPECT_EQ(s, emit_smtlib(vc_of(pendulum_vc()), {}));
}

TEST(Smt, TrueAndTranscendentals) {
  std::string s = emit_smtlib(vc_of(tt()), {});
  EXPECT_NE(s.find("(assert false)"), std::string::npos);
  std::string d = emit_smtlib(vc_of(decay_vc()), {gt(X(), lit(0))}, true);
  EXPECT_NE(d.find("(set-logic UFNRA)"), std::string::npos);
  EXPECT_NE(d.find("(declare-fun exp (Real) Real)"), std::string::npos);
  EXPECT_NE(d.find("(forall ((lg_tau Real))"), std::string::npos);
  EXPECT_NE(d.find("(assert (> x 0))"), std::string::npos);
}

TEST(Smt, VectorsExpandAndNormRejected) {
  auto ds = gen::sample_dataspace();
  Expr w = var("w", Kind::vec(2));
  std::string s = emit_smtlib(vc_of(ge(inner(w, w), lit(0))), {});
  EXPECT_NE(s.find("(+ (* w_1 w_1) (* w_2 w_2))"), std::string::npos) << s;
  try {
    emit_smtlib(vc_of(ge(norm(w), lit(0))), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedConstruct);
  }
}
