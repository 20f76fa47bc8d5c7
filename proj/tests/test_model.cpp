#include "gen.hpp"

#include <hsv/model.hpp>

#include <gtest/gtest.h>

using namespace hsv;

namespace {

std::string models_dir() { return HSV_MODELS_DIR; }

template <class F>
std::pair<ErrorCode, std::string> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  ADD_FAILURE() << "no error raised";
  return {ErrorCode::SyntaxError, ""};
}

DataspacePtr vec_space() {
  auto ds = std::make_shared<Dataspace>("v");
  ds->declare("x", Kind::real());
  ds->declare("b", Kind::boolean());
  ds->declare("v", Kind::vec(2));
  ds->declare("a", Kind::vec(2));
  return ds;
}

// Formulas over the sample dataspace touching every printed construct.
Expr random_formula(std::mt19937_64& rng, int depth = 3) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto real = [&]() -> Expr {
    Expr r = gen::random_real_expr(rng, 2, true);
    switch (pick(8)) {
      case 0: return r + norm(var("w", Kind::vec(2)));
      case 1: return inner(var("w", Kind::vec(2)), veclit({r, lit(1)}));
      case 2: return nth(veclit({r, -lit(2)}), 2);
      case 3: return ite(var("b", Kind::boolean()), r, logical("c"));
      case 4: return sqrt(r * r) - ln(exp(r));
      default: return r;
    }
  };
  if (depth <= 0 || pick(3) == 0) {
    switch (pick(7)) {
      case 0: return eq(var("w", Kind::vec(2)), smul(real(), logical("W", Kind::vec(2))));
      case 1: return iff(var("b", Kind::boolean()), logical("F", Kind::boolean()));
      case 2: return pick(2) ? tt() : ff();
      case 3: return neq(real(), real());
      default: return compare(std::vector<Op>{Op::Le, Op::Lt, Op::Ge, Op::Gt}[pick(4)], real(), real());
    }
  }
  auto sub = [&] { return random_formula(rng, depth - 1); };
  switch (pick(7)) {
    case 0: return and_(sub(), sub());
    case 1: return or_(sub(), sub());
    case 2: return not_(sub());
    case 3: return implies(sub(), sub());
    case 4: return iff(sub(), sub());
    case 5: return forall("q", or_(sub(), le(logical("q"), real())));
    default: return exists("u", eq(logical("u", Kind::vec(2)), var("w", Kind::vec(2))), Kind::vec(2));
  }
}

}  // namespace

TEST(Model, TankParses) {
  ModelFile m = load_model(models_dir() + "/tank.hsv");
  ASSERT_TRUE(m.dataspace_name);
  EXPECT_EQ(*m.dataspace_name, "water_tank");
  EXPECT_EQ(m.ds->size(), 8u);
  EXPECT_EQ(m.ds->decl("ci").role, Role::Constant);
  EXPECT_EQ(m.ds->decl("flw").kind, Kind::boolean());
  const ProgramDef* dyn = m.program("dyn");
  ASSERT_NE(dyn, nullptr);
  EXPECT_EQ(modset(dyn->body), (Frame{LensRef::var("h"), LensRef::var("t")}));
  EXPECT_EQ(m.goals.size(), 3u);
  EXPECT_EQ(m.goal("tank_correct")->method.tag, MethodTag::DProve);
  EXPECT_EQ(m.goal("tank_correct")->facts, (std::vector<std::string>{"co_pos", "inflow"}));
  EXPECT_EQ(to_string(m.assumption("inflow")->expr), "co < ci");
  EXPECT_EQ(to_string(m.program("drain")->body), "{h' = -co, t' = 1 | t <= (Hl - hm) / -co}");
}

TEST(Model, EmptyDataspaceAndTrivialGoal) {
  ModelFile m = parse_model("dataspace empty { }\nprogram p = skip\ngoal g : {true} p {true} by wp\n");
  EXPECT_EQ(m.ds->size(), 0u);
  ASSERT_EQ(m.goals.size(), 1u);
  EXPECT_TRUE(m.goals[0].pre.is_true());
  // no dataspace at all
  ModelFile n = parse_model("program p = skip goal g : {true} p {true} by wp");
  EXPECT_FALSE(n.dataspace_name);
}

TEST(Model, DuplicateVariableAtSecondDeclaration) {
  auto [code, what] = error_of([] { parse_model("dataspace d {\n  variables x : real;\n  variables y, x : real;\n}"); });
  EXPECT_EQ(code, ErrorCode::DuplicateName);
  EXPECT_NE(what.find("3:16"), std::string::npos) << what;
}

TEST(Model, SyntaxErrorsCarryLineAndColumn) {
  auto [code, what] = error_of([] { parse_model("dataspace d { variables x : real; }\nprogram p = x := ;"); });
  EXPECT_EQ(code, ErrorCode::SyntaxError);
  EXPECT_NE(what.find("2:18"), std::string::npos) << what;
  EXPECT_EQ(error_of([] { parse_model("program p = q"); }).first, ErrorCode::UnknownName);
  EXPECT_EQ(error_of([] { parse_model("program p = skip\nprogram p = abort"); }).first, ErrorCode::DuplicateName);
  EXPECT_EQ(error_of([] { parse_model("program p = skip goal g : {true} p {true} by magic"); }).first,
            ErrorCode::SyntaxError);
  EXPECT_EQ(error_of([] { parse_model("program p = skip goal g : {true} p {true} by wp using nope"); }).first,
            ErrorCode::UnknownName);
}

TEST(Model, KindErrorsPointAtTheSubexpression) {
  const char* text = "dataspace d { variables x : real; b : bool; }\nprogram p = ?x + b > 0";
  auto [code, what] = error_of([&] { parse_model(text); });
  EXPECT_EQ(code, ErrorCode::KindError);
  EXPECT_NE(what.find("2:16"), std::string::npos) << what;
}

TEST(Model, ExpressionElaboration) {
  auto ds = vec_space();
  // free logicals take their kind from the other side
  Expr e = parse_expr("v = V & b = F", *ds);
  EXPECT_EQ(e.arg(0).arg(1).kind(), Kind::vec(2));
  EXPECT_EQ(e.arg(1).arg(1).kind(), Kind::boolean());
  // coordinates, scalar products, inner products
  EXPECT_EQ(to_string(parse_expr("v[1] + (a . v) * x", *ds, Kind::real())), "v[1] + a . v * x");
  EXPECT_TRUE(parse_expr("2 * v", *ds, std::nullopt).is(Op::ScalarMul));
  EXPECT_TRUE(parse_expr("[1, 2][2]", *ds, Kind::real()).is(Op::Nth));
  // bound variables shadow nothing declared here
  Expr q = parse_expr("forall y. exists w : vec[2]. w . w >= y", *ds);
  EXPECT_EQ(q.arg(0).bound_kind(), Kind::vec(2));
  // numerals
  EXPECT_TRUE(parse_expr("(-1)", *ds, Kind::real()).is_rat(-1));
  EXPECT_TRUE(parse_expr("(1/2)", *ds, Kind::real()).is_rat(make_rational(1, 2)));
  EXPECT_TRUE(parse_expr("(-3/4)", *ds, Kind::real()).is_rat(make_rational(-3, 4)));
  EXPECT_TRUE(parse_expr("2.5", *ds, Kind::real()).is_rat(make_rational(5, 2)));
  // unicode aliases
  EXPECT_TRUE(same(parse_expr("x ≥ 0 ∧ ¬b", *ds), parse_expr("x >= 0 & !b", *ds)));
  EXPECT_TRUE(same(parse_expr("∀ y. y·y ≥ 0", *ds), parse_expr("forall y. y * y >= 0", *ds)));
}

TEST(Model, ProgramForms) {
  auto ds = vec_space();
  Program p = parse_program("x := 1; (v[1], b) := (x, true) | {x' = -x | x >= 0 on [0, 5]}", *ds);
  ASSERT_TRUE(p.is(Program::Tag::Choice));
  EXPECT_TRUE(p.kid(0).is(Program::Tag::Seq));
  const Ode& o = p.kid(1).ode();
  EXPECT_EQ(o.dur, Duration::interval(0, Rational(5)));
  Program e = parse_program("{evol x = x * exp(-tau) on tau <= 1}", *ds);
  ASSERT_TRUE(e.is(Program::Tag::Evol));
  EXPECT_EQ(e.evol().dur.tag, Duration::Tag::Bound);
  Program l = parse_program("loop (x := x + 1; ?x > 0) inv x >= 0", *ds);
  EXPECT_TRUE(l.is(Program::Tag::Loop));
  EXPECT_EQ(to_string(l), "loop (x := x + 1; ?x > 0) inv x >= 0");
  EXPECT_EQ(to_string(parse_program("{v' = a, x' = 1 on [1, inf)}", *ds)), "{v' = a, x' = 1 on [1, inf)}");
}

// parse -> print -> parse gives the same model, and printing is then stable
TEST(Model, RoundTripFiles) {
  for (const char* f : {"tank.hsv", "pendulum.hsv", "decay.hsv", "broken.hsv", "boat.hsv"}) {
    ModelFile a = load_model(models_dir() + "/" + f);
    std::string text = print_model(a);
    ModelFile b = parse_model(text);
    EXPECT_TRUE(same_model(a, b)) << f << "\n" << text;
    EXPECT_EQ(print_model(b), text);
  }
}

TEST(Model, RoundTripRandomExpressions) {
  auto ds = gen::sample_dataspace();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    Expr e = random_formula(rng);
    Expr back = parse_expr(to_string(e), *ds);
    ASSERT_TRUE(same(e, back)) << to_string(e) << "\n" << to_string(back);
  }
}

TEST(Model, RoundTripRandomPrograms) {
  auto ds = gen::sample_dataspace();
  std::mt19937_64 rng(22);
  for (int i = 0; i < 500; ++i) {
    Program p = gen::random_discrete_program(rng, 4);
    if (i % 3 == 0) p = Program::loop(p, random_formula(rng, 1));
    Program back = parse_program(to_string(p), *ds);
    ASSERT_TRUE(same(p, back)) << to_string(p) << "\n" << to_string(back);
  }
}
