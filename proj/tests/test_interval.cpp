#include "gen.hpp"

#include <hsv/interval.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace hsv;

namespace {

// The reference is computed from a rounded argument, so allow error
// proportional to both the argument and the value.
bool encloses(const Interval& i, double arg, double x) {
  double slack = 4e-16 * (1 + std::fabs(arg)) * (1 + std::fabs(x));
  return to_double(i.lo) - slack <= x && x <= to_double(i.hi) + slack;
}

}  // namespace

TEST(Interval, TranscendentalEnclosures) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    Rational q = gen::random_rational(rng, 30, 16);
    double x = to_double(q);
    EXPECT_TRUE(encloses(enclose(Op::Exp, Interval::point(q)), x, std::exp(x))) << q;
    EXPECT_TRUE(encloses(enclose(Op::Sin, Interval::point(q)), x, std::sin(x))) << q;
    EXPECT_TRUE(encloses(enclose(Op::Cos, Interval::point(q)), x, std::cos(x))) << q;
    if (q > 0) {
      EXPECT_TRUE(encloses(enclose(Op::Ln, Interval::point(q)), x, std::log(x))) << q;
      EXPECT_TRUE(encloses(enclose(Op::Sqrt, Interval::point(q)), x, std::sqrt(x))) << q;
      EXPECT_LT(to_double(enclose(Op::Ln, Interval::point(q)).width()), 1e-20);
    }
    EXPECT_LT(to_double(enclose(Op::Sin, Interval::point(q)).width()), 1e-20);
  }
}

TEST(Interval, ExactAtSpecialPoints) {
  EXPECT_TRUE(enclose(Op::Exp, Interval::point(0)).is_point());
  EXPECT_EQ(enclose(Op::Sqrt, Interval::point(Rational(9, 4))).lo, Rational(3, 2));
  EXPECT_EQ(enclose(Op::Sin, Interval::point(0)).hi, 0);
  EXPECT_EQ(enclose(Op::Cos, Interval::point(0)).lo, 1);
}

TEST(Interval, SinOverWideRangeHitsExtremes) {
  Interval r = enclose(Op::Sin, {0, 2});
  EXPECT_EQ(r.hi, 1);
  EXPECT_GT(r.lo, -Rational(1, 100));
}

TEST(Interval, ConservativeOnBoxes) {
  // any point of a box evaluates inside the box enclosure
  auto ds = gen::sample_dataspace();
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    Expr e = gen::random_real_expr(rng, 3, true);
    Rational lo = gen::random_rational(rng, 5, 4);
    Interval box(lo, lo + Rational(1, 2));
    IEnv env;
    env.read = [&](const LensRef&, const Kind& kd) {
      if (kd.is_real()) return IVal::real(box);
      return IVal::vec(std::vector<Interval>(kd.dim, box));
    };
    auto enc = eval_interval(e, env);
    if (!enc) continue;
    for (int j = 0; j < 5; ++j) {
      Store s(ds);
      Rational p = lo + Rational(j, 8);
      for (const char* n : {"x", "y", "z"}) s.set(n, Value(p));
      s.set("v", Value(std::vector<Rational>{p, p, p}));
      NumStore ns = to_num(s);
      double x = eval(e, ns).real();
      if (!std::isfinite(x)) continue;
      double slack = 1e-9 * (1 + std::fabs(x));
      EXPECT_LE(to_double(enc->lo) - slack, x) << to_string(e);
      EXPECT_GE(to_double(enc->hi) + slack, x) << to_string(e);
    }
  }
}

TEST(Interval, BoundedQuantifier) {
  auto ds = gen::sample_dataspace();
  Store s(ds);
  s.set("x", Value(Rational(1)));
  IEnv env = point_env(s, {{"tau", Value(Rational(2))}});
  Expr sig = logical("sigma");
  Expr down = forall("sigma", implies(and_(le(lit(0), sig), le(sig, logical("tau"))), le(sig + var("x"), lit(3))));
  EXPECT_EQ(eval_tri(down, env), Tri::True);
  Expr bad = forall("sigma", implies(and_(le(lit(0), sig), le(sig, logical("tau"))), le(sig + var("x"), lit(2))));
  EXPECT_EQ(eval_tri(bad, env), Tri::False);
}
