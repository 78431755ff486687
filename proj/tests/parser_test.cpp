#include <gtest/gtest.h>

#include <dtreason/parser.hpp>

#include "helpers.hpp"

using namespace dtreason;
using namespace testing_helpers;

namespace {

FeatureSchema mixed_schema() {
  Feature age{"age", FeatureKind::Continuous, {}, {}, {}, Rat(0), Rat(100)};
  Feature edu{"edu", FeatureKind::Ordinal, Rat(1), Rat(16), {}, Rat(1), Rat(16)};
  Feature sex{"sex", FeatureKind::Nominal, {}, {}, {"Female", "Male"}, {}, {}};
  return FeatureSchema({age, edu, sex});
}

std::size_t error_position(const std::string& text, const NameResolver& names = {}) {
  try {
    parse_constraints(text, names);
  } catch (const ParseError& e) {
    return e.position();
  }
  return std::string::npos;
}

}  // namespace

TEST(Parser, SimpleRelations) {
  Conj c = parse_constraints("I1.x1 = 2, I1.x2 < 3");
  EXPECT_TRUE(same_primitives(c, Conj{eq(var("I1", "x1"), 2), lt(var("I1", "x2"), 3)}));
}

TEST(Parser, LinearArithmetic) {
  Conj c = parse_constraints("2*(A.x - 1) + A.y/4 >= -A.x + .5");
  // 2x - 2 + y/4 >= -x + 1/2  ->  3x + y/4 - 5/2 >= 0
  LinTerm lhs = var("A", "x", 3) + var("A", "y", Rat(1, 4)) - cst(Rat(5, 2));
  EXPECT_TRUE(same_primitives(c, Conj{ge(lhs, 0)}));
}

TEST(Parser, DecimalAndFractionLiterals) {
  Conj c = parse_constraints("F.feature2 > -55.5, F.feature1 <= 1004.0, F.z = 1e2");
  EXPECT_TRUE(same_primitives(
      c, Conj{gt(var("F", "feature2"), Rat(-111, 2)), le(var("F", "feature1"), 1004), eq(var("F", "z"), 100)}));
}

TEST(Parser, CurrencyNames) {
  Conj c = parse_constraints("CE.€ = 1.16*CE.$");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(render(c), "29*CE.$-25*CE.€=0");
  EXPECT_TRUE(same_primitives(c, Conj{eq(var("CE", "€", 25), var("CE", "$", 29))}));
}

TEST(Parser, ChainedRelation) {
  Conj c = parse_constraints("0 <= A.x < 1");
  EXPECT_TRUE(same_primitives(c, Conj{ge(var("A", "x"), 0), lt(var("A", "x"), 1)}));
}

TEST(Parser, NominalSugar) {
  FeatureSchema s = mixed_schema();
  NameResolver names{nullptr, &s};
  Conj c = parse_constraints("CE.sex = Female, CE.sex != 'Male'", names);
  Conj expected{eq(LinTerm::var(VarId("CE", "sex", "Female")), 1), eq(LinTerm::var(VarId("CE", "sex", "Male")), 0)};
  EXPECT_TRUE(same_primitives(c, expected));
  Conj idx = parse_constraints("CE.sex[Male] = 0", names);
  EXPECT_TRUE(same_primitives(idx, Conj{eq(LinTerm::var(VarId("CE", "sex", "Male")), 0)}));
}

TEST(Parser, NominalFeatureEquality) {
  FeatureSchema s = mixed_schema();
  NameResolver names{nullptr, &s};
  Conj c = parse_constraints("CE.sex = F.sex", names);
  Conj expected{eq(LinTerm::var(VarId("CE", "sex", "Female")), LinTerm::var(VarId("F", "sex", "Female"))),
                eq(LinTerm::var(VarId("CE", "sex", "Male")), LinTerm::var(VarId("F", "sex", "Male")))};
  EXPECT_TRUE(same_primitives(c, expected));
}

TEST(Parser, NominalMisuse) {
  FeatureSchema s = mixed_schema();
  NameResolver names{nullptr, &s};
  EXPECT_THROW(parse_constraints("CE.sex < Female", names), ParseError);
  EXPECT_THROW(parse_constraints("CE.sex = Other", names), ParseError);
  EXPECT_THROW(parse_constraints("CE.sex + 1 = 2", names), ParseError);
  EXPECT_THROW(parse_constraints("CE.age[x] = 1", names), ParseError);
  EXPECT_THROW(parse_constraints("CE.sex != F.sex", names), ParseError);
}

TEST(Parser, NameResolution) {
  FeatureSchema s = mixed_schema();
  NameResolver names{[](const std::string& i) { return i == "F" || i == "CE"; }, &s};
  EXPECT_NO_THROW(parse_constraints("CE.age >= F.age + 2", names));
  EXPECT_EQ(error_position("G.age > 1", names), 0u);
  EXPECT_EQ(error_position("CE.height > 1", names), 3u);
}

TEST(Parser, ErrorPositions) {
  EXPECT_EQ(error_position("A.x < "), 6u);
  EXPECT_EQ(error_position("A.x ? 1"), 4u);
  EXPECT_EQ(error_position("A.x * A.y < 1"), 4u);
  EXPECT_EQ(error_position("A.x / 0 < 1"), 4u);
  EXPECT_EQ(error_position("A.x != 1"), 4u);
  EXPECT_EQ(error_position("A.x < 1 A.y"), 8u);
  EXPECT_EQ(error_position("(A.x < 1"), 5u);
  EXPECT_EQ(error_position(""), 0u);
  EXPECT_EQ(error_position("x < 1"), 0u);
  EXPECT_EQ(error_position("_.t < 1"), 0u);
}

TEST(Parser, ConstantRelationsStay) {
  Conj c = parse_constraints("1 < 0");
  EXPECT_TRUE(c.has_contradiction());
}

TEST(Parser, Term) {
  LinTerm t = parse_linear_term("A.x - 2*B.y + 3");
  EXPECT_EQ(t, var("A", "x") - var("B", "y", 2) + cst(3));
  EXPECT_THROW(parse_linear_term("A.x <"), ParseError);
}
