#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace testing_helpers;

namespace {
LinTerm X() { return var("I", "x"); }
LinTerm Y() { return var("I", "y"); }
}  // namespace

TEST(Normalize, FlipsAndScales) {
  // 2x - 2y >= 4  ->  -x + y + 2 <= 0
  Primitive p = normalize(ge(X() * Rat(2) - Y() * Rat(2), 4));
  EXPECT_EQ(p.rel, Relation::LE);
  EXPECT_EQ(p.lhs, X() * Rat(-1) + Y() + cst(2));
  EXPECT_EQ(render(p), "I.x-I.y>=2");
}

TEST(Normalize, ConstantPrimitives) {
  EXPECT_EQ(normalize(Primitive(LinTerm(), Relation::EQ)), Primitive::tautology());
  EXPECT_EQ(normalize(le(cst(0), 0)), Primitive::tautology());
  EXPECT_EQ(normalize(lt(cst(1), 0)), Primitive::contradiction());
  EXPECT_TRUE(Primitive::contradiction().is_contradiction());
}

TEST(Normalize, FixedPoint) {
  Primitive p = normalize(lt(X(), 5));
  EXPECT_EQ(normalize(p), p);
  EXPECT_EQ(p, lt(X(), 5));
}

TEST(Normalize, EqualityLeadingCoefficientPositive) {
  Primitive p = normalize(eq(X() * Rat(-3, 2), Y() * Rat(3)));
  EXPECT_EQ(p.lhs, X() + Y() * Rat(2));
  EXPECT_EQ(render(p), "I.x+2*I.y=0");
}

TEST(Normalize, IdempotentOnRandomPrimitives) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(-6, 6);
  for (int i = 0; i < 500; ++i) {
    LinTerm t = X() * Rat(d(rng), 1 + (d(rng) + 6) % 4) + Y() * Rat(d(rng)) + cst(Rat(d(rng), 3));
    Primitive p(t, static_cast<Relation>((d(rng) + 6) % 5));
    Primitive n = normalize(p);
    EXPECT_EQ(normalize(n), n);
    EXPECT_NE(n.rel, Relation::GE);
    EXPECT_NE(n.rel, Relation::GT);
    // scaling by a positive constant leaves truth unchanged
    Assignment pt{{VarId("I", "x"), Rat(d(rng), 2)}, {VarId("I", "y"), Rat(d(rng))}};
    EXPECT_EQ(p.evaluate(pt), n.evaluate(pt));
    Primitive scaled(p.lhs * Rat(5, 7), p.rel);
    EXPECT_EQ(p.evaluate(pt), scaled.evaluate(pt));
  }
}

TEST(Conjoin, ConcatenatesAndDeduplicates) {
  Conj a{lt(X(), 5)}, b{eq(Y(), 2)};
  Conj ab = conjoin(a, b);
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_EQ(render(ab), "I.x<5,I.y=2");
  EXPECT_EQ(conjoin(a, a).size(), 1u);

  Conj e1 = conjoin(Conj{lt(var("I1", "x1") + var("I1", "x2"), 5)},
                    Conj{eq(var("I1", "x1"), 2), eq(var("I1", "x2"), 2)});
  EXPECT_EQ(e1.size(), 3u);
}

TEST(Conjoin, EvaluateDistributes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(-4, 4);
  for (int i = 0; i < 300; ++i) {
    Conj a{le(X() * Rat(d(rng)) + Y(), d(rng))}, b{lt(Y() * Rat(d(rng)), X() + cst(d(rng)))};
    Assignment pt{{VarId("I", "x"), Rat(d(rng))}, {VarId("I", "y"), Rat(d(rng))}};
    EXPECT_EQ(conjoin(a, b).evaluate(pt), a.evaluate(pt) && b.evaluate(pt));
  }
}

TEST(Evaluate, StrictnessAndBoundaries) {
  LinTerm x1 = var("I1", "x1"), x2 = var("I1", "x2");
  Conj c{lt(x1 + x2, 5)};
  Assignment p1{{VarId("I1", "x1"), Rat(2)}, {VarId("I1", "x2"), Rat(2)}};
  Assignment p2{{VarId("I1", "x1"), Rat(2)}, {VarId("I1", "x2"), Rat(3)}};
  EXPECT_TRUE(evaluate(c, p1));
  EXPECT_FALSE(evaluate(c, p2));
  EXPECT_TRUE(evaluate(Conj{ge(X(), 3)}, {{VarId("I", "x"), Rat(3)}}));
}

TEST(Evaluate, MissingAssignmentNamesVariable) {
  Conj c{lt(X() + Y(), 5)};
  try {
    evaluate(c, {{VarId("I", "x"), Rat(1)}});
    FAIL();
  } catch (const MissingAssignment& e) {
    EXPECT_EQ(e.var(), VarId("I", "y"));
    EXPECT_NE(std::string(e.what()).find("I.y"), std::string::npos);
  }
}

TEST(Render, SingleAndMultiVariable) {
  EXPECT_EQ(render(ge(var("CE", "feature1"), Rat::parse("1004.5"))), "CE.feature1>=1004.5");
  EXPECT_EQ(render(lt(X() * Rat(-1), -3)), "I.x>3");
  EXPECT_EQ(render(eq(var("CE", "eur") * Rat(25), var("CE", "usd") * Rat(29))), "25*CE.eur-29*CE.usd=0");
  EXPECT_EQ(render(lt(cst(1), 0)), "0=1");
  VarId oh("I", "sex", "Female");
  EXPECT_EQ(render(eq(LinTerm::var(oh), 1)), "I.sex[Female]=1");
}

TEST(Render, DeterministicOrder) {
  Conj c{eq(var("I2", "x2"), 3), ge(var("I1", "x1"), 0), lt(var("I1", "x2"), 3)};
  EXPECT_EQ(render(c), "I1.x1>=0,I1.x2<3,I2.x2=3");
}
