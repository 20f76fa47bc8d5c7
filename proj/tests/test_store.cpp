#include "gen.hpp"

#include <gtest/gtest.h>

using namespace hsv;
using hsv::gen::random_lens;
using hsv::gen::random_lens_value;
using hsv::gen::random_store;

namespace {

DataspacePtr two() {
  auto ds = std::make_shared<Dataspace>("two");
  ds->declare("x", Kind::real());
  ds->declare("y", Kind::real());
  ds->declare("v", Kind::vec(2));
  return ds;
}

}  // namespace

TEST(Store, UndeclaredLookupFails) {
  Store s(two());
  try {
    (void)s.get("q");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndeclaredVariable);
  }
}

TEST(Store, UpdatesPreserveKind) {
  Store s(two());
  EXPECT_THROW(s.set("x", Value(true)), Error);
  EXPECT_THROW(s.set("v", Value(std::vector<Rational>{1, 2, 3})), Error);
  s.set("v", Value(std::vector<Rational>{1, 2}));
  EXPECT_EQ(s.get("v").vec()[1], 2);
}

TEST(Store, DuplicateDeclarationRejected) {
  Dataspace ds;
  ds.declare("x", Kind::real());
  EXPECT_THROW(ds.declare("x", Kind::boolean()), Error);
}

TEST(Lens, GetAndPutExamples) {
  auto ds = two();
  Store s(ds);
  s.set("x", Value(3));
  s.set("y", Value(4));
  s.set("v", Value(std::vector<Rational>{5, 7}));
  EXPECT_EQ(lens_get(LensRef::var("x"), s), Value(3));
  EXPECT_EQ(lens_get(LensRef::coord("v", 1), s), Value(5));
  Store t = lens_put(LensRef::var("x"), Value(9), s);
  EXPECT_EQ(t.get("x"), Value(9));
  EXPECT_EQ(t.get("y"), Value(4));
  EXPECT_THROW(lens_get(LensRef::coord("v", 3), s), Error);
  EXPECT_THROW(lens_put(LensRef::var("x"), Value(true), s), Error);
}

TEST(Lens, Independence) {
  EXPECT_TRUE(lens_indep(LensRef::var("x"), LensRef::var("y")));
  EXPECT_TRUE(lens_indep(LensRef::coord("v", 1), LensRef::coord("v", 2)));
  EXPECT_FALSE(lens_indep(LensRef::var("v"), LensRef::coord("v", 1)));
}

// Brute force over a 2-vector store: puts to v and v[1] do not commute.
TEST(Lens, VarAndCoordPutsDiffer) {
  Store s(two());
  auto v = LensRef::var("v");
  auto v1 = LensRef::coord("v", 1);
  Value whole(std::vector<Rational>{1, 1});
  Value part(Rational(2));
  Store a = lens_put(v, whole, lens_put(v1, part, s));
  Store b = lens_put(v1, part, lens_put(v, whole, s));
  EXPECT_FALSE(a == b);
}

TEST(Lens, SumRejectsOverlap) {
  try {
    (void)LensRef::sum({LensRef::var("v"), LensRef::coord("v", 2)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotIndependent);
  }
  EXPECT_NO_THROW((void)LensRef::sum({LensRef::coord("v", 1), LensRef::coord("v", 2)}));
}

TEST(Lens, PartOf) {
  EXPECT_TRUE(lens_le(LensRef::coord("v", 1), LensRef::var("v")));
  EXPECT_TRUE(lens_le(LensRef::var("p"), LensRef::sum({LensRef::var("p"), LensRef::var("v")})));
  EXPECT_FALSE(lens_le(LensRef::var("x"), LensRef::var("y")));
  EXPECT_FALSE(lens_le(LensRef::var("v"), LensRef::coord("v", 1)));
}

TEST(Lens, Quotient) {
  EXPECT_EQ(lens_quot(LensRef::coord("v", 1), Frame{LensRef::var("v")}).str(), "\xCE\xA0(1)");
  EXPECT_TRUE(lens_quot(LensRef::var("x"), Frame{LensRef::var("x")}).is_identity());
  try {
    (void)lens_quot(LensRef::var("x"), Frame{LensRef::var("y")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPartOf);
  }
}

TEST(Lens, QuotientComposesBack) {
  auto ds = gen::sample_dataspace();
  std::mt19937_64 rng(11);
  Frame a{LensRef::var("x"), LensRef::var("v"), LensRef::coord("w", 2)};
  for (int i = 0; i < 200; ++i) {
    Store s = random_store(rng, ds);
    Value local = lens_get(a.as_lens(), s);
    for (const auto& l : {LensRef::var("x"), LensRef::coord("v", 3), LensRef::var("v"), LensRef::coord("w", 2)})
      EXPECT_EQ(lens_quot(l, a).get(local), lens_get(l, s));
  }
}

TEST(Frame, CanonicalAbsorption) {
  Frame f{LensRef::coord("v", 1), LensRef::var("x")};
  f.insert(LensRef::var("v"));
  f.insert(LensRef::coord("v", 2));
  EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(f, (Frame{LensRef::var("x"), LensRef::var("v")}));
  EXPECT_TRUE(f.covers(LensRef::coord("v", 2)));
}

class LensLaws : public ::testing::Test {
 protected:
  DataspacePtr ds = gen::sample_dataspace();
  std::mt19937_64 rng{2024};
};

TEST_F(LensLaws, PutThenGet) {
  for (int i = 0; i < 1000; ++i) {
    auto l = random_lens(rng, *ds);
    auto s = random_store(rng, ds);
    auto v = random_lens_value(rng, l, *ds);
    ASSERT_EQ(lens_get(l, lens_put(l, v, s)), v) << l.str();
  }
}

TEST_F(LensLaws, GetThenPut) {
  for (int i = 0; i < 1000; ++i) {
    auto l = random_lens(rng, *ds);
    auto s = random_store(rng, ds);
    ASSERT_EQ(lens_put(l, lens_get(l, s), s), s) << l.str();
  }
}

TEST_F(LensLaws, PutPut) {
  for (int i = 0; i < 1000; ++i) {
    auto l = random_lens(rng, *ds);
    auto s = random_store(rng, ds);
    auto v = random_lens_value(rng, l, *ds);
    auto w = random_lens_value(rng, l, *ds);
    ASSERT_EQ(lens_put(l, v, lens_put(l, w, s)), lens_put(l, v, s)) << l.str();
  }
}

TEST_F(LensLaws, IndependentPutsCommute) {
  int checked = 0;
  while (checked < 1000) {
    auto a = random_lens(rng, *ds);
    auto b = random_lens(rng, *ds);
    if (!lens_indep(a, b)) continue;
    auto s = random_store(rng, ds);
    auto u = random_lens_value(rng, a, *ds);
    auto v = random_lens_value(rng, b, *ds);
    ASSERT_EQ(lens_put(a, u, lens_put(b, v, s)), lens_put(b, v, lens_put(a, u, s))) << a.str() << " " << b.str();
    ++checked;
  }
}

TEST_F(LensLaws, PartOfIsPreorder) {
  for (int i = 0; i < 1000; ++i) {
    auto a = random_lens(rng, *ds);
    auto b = random_lens(rng, *ds);
    auto c = random_lens(rng, *ds);
    ASSERT_TRUE(lens_le(a, a));
    if (lens_le(a, b) && lens_le(b, c)) ASSERT_TRUE(lens_le(a, c));
  }
}
