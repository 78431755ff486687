#include <gtest/gtest.h>

#include <dtreason/learner.hpp>

#include <cmath>
#include <random>

using namespace dtreason;

namespace {
LabeledData one_dim(const std::vector<std::pair<int, std::string>>& pts) {
  LabeledData d;
  for (const auto& [x, l] : pts) {
    d.rows.push_back(Row{{"x", Rat(x)}});
    d.labels.push_back(l);
  }
  return d;
}

// Two Gaussian blobs, exact decimals with three places.
LabeledData two_gaussians(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  LabeledData d;
  for (int i = 0; i < n; ++i) {
    bool pos = i % 2 == 1;
    double cx = pos ? 3.0 : 0.0, cy = pos ? 3.0 : 0.0;
    auto q = [](double v) { return Rat(static_cast<long>(std::llround(v * 1000)), 1000); };
    d.rows.push_back(Row{{"a", q(cx + g(rng))}, {"b", q(cy + g(rng))}});
    d.labels.push_back(pos ? "1" : "0");
  }
  return d;
}
}  // namespace

TEST(Learner, SeparableMidpoint) {
  FeatureSchema s = FeatureSchema::continuous({"x"});
  DecisionTree t = learn_tree(one_dim({{1, "a"}, {2, "a"}, {4, "a"}, {6, "b"}, {9, "b"}}), s, 3);
  ASSERT_EQ(t.leaf_count(), 2u);
  const TreeNode& root = t.node(t.root());
  ASSERT_FALSE(root.is_leaf());
  EXPECT_EQ(render(*root.split), ".x<=5");
}

TEST(Learner, PureDataIsOneLeaf) {
  FeatureSchema s = FeatureSchema::continuous({"x"});
  DecisionTree t = learn_tree(one_dim({{1, "a"}, {2, "a"}, {3, "a"}}), s, 4);
  ASSERT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.extract_paths()[0].confidence, Rat(1));
}

TEST(Learner, DepthZeroAndErrors) {
  FeatureSchema s = FeatureSchema::continuous({"x"});
  DecisionTree t = learn_tree(one_dim({{1, "a"}, {2, "b"}, {3, "b"}}), s, 0);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.extract_paths()[0].label, "b");
  EXPECT_EQ(t.extract_paths()[0].confidence, Rat(2, 3));
  EXPECT_THROW(learn_tree(LabeledData{}, s, 2), ValidationError);
}

TEST(Learner, TieBreakLowestFeatureThenThreshold) {
  FeatureSchema s = FeatureSchema::continuous({"p", "q"});
  LabeledData d;
  // both features separate perfectly
  for (int i = 0; i < 4; ++i) {
    d.rows.push_back(Row{{"p", Rat(i)}, {"q", Rat(i)}});
    d.labels.push_back(i < 2 ? "a" : "b");
  }
  DecisionTree t = learn_tree(d, s, 1);
  EXPECT_EQ(render(*t.node(t.root()).split), ".p<=1.5");
}

TEST(Learner, NominalSplits) {
  FeatureSchema s = FeatureSchema::parse(R"({"features": [{"name": "c", "kind": "nominal", "values": ["r", "g", "b"]}]})");
  LabeledData d;
  for (const char* v : {"r", "g", "b", "g", "g"}) {
    d.rows.push_back(Row{{"c", std::string(v)}});
    d.labels.push_back(std::string(v) == "g" ? "yes" : "no");
  }
  DecisionTree t = learn_tree(d, s, 2);
  EXPECT_EQ(render(*t.node(t.root()).split), ".c[g]=1");
  EXPECT_EQ(training_accuracy(t, s, d), 1.0);
}

TEST(Learner, TwoGaussiansAccuracyAndCounts) {
  FeatureSchema s = FeatureSchema::continuous({"a", "b"});
  LabeledData d = two_gaussians(200, 17);
  DecisionTree t = learn_tree(d, s, 4);
  // independent count of correct predictions by walking the tree by hand
  int correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const TreeNode* n = &t.node(t.root());
    Assignment a{{slot("a"), std::get<Rat>(d.rows[i].at("a"))}, {slot("b"), std::get<Rat>(d.rows[i].at("b"))}};
    while (!n->is_leaf()) n = &t.node(n->split->evaluate(a) ? n->left : n->right);
    std::size_t best = n->counts[0] >= n->counts[1] ? 0 : 1;
    correct += t.classes()[best] == d.labels[i];
  }
  EXPECT_GE(correct, 190);
  Rat total;
  for (const auto& n : t.nodes())
    if (n.is_leaf())
      for (const auto& c : n.counts) total += c;
  EXPECT_EQ(total, Rat(200));
  for (const auto& p : t.extract_paths()) {
    EXPECT_GT(p.confidence, Rat(0));
    EXPECT_LE(p.confidence, Rat(1));
  }
}

// A deeper tree refines a shallower one: every shallow leaf's path is a
// prefix of some deep path.
TEST(Learner, GrowthIsPrefixConsistent) {
  FeatureSchema s = FeatureSchema::continuous({"a", "b"});
  LabeledData d = two_gaussians(300, 5);
  for (int depth = 0; depth < 5; ++depth) {
    auto shallow = learn_tree(d, s, depth).extract_paths();
    auto deep = learn_tree(d, s, depth + 1).extract_paths();
    for (const auto& sp : shallow) {
      bool found = false;
      for (const auto& dp : deep)
        found = found || (dp.primitives.size() >= sp.primitives.size() &&
                          std::equal(sp.primitives.begin(), sp.primitives.end(), dp.primitives.begin()));
      EXPECT_TRUE(found);
    }
  }
}

TEST(Neighborhood, RadiusZeroCopiesCenter) {
  FeatureSchema s = FeatureSchema::parse(R"({"features": [
    {"name": "x", "min": 0, "max": 100}, {"name": "c", "kind": "nominal", "values": ["u", "v"]}]})");
  Row center{{"x", Rat(50)}, {"c", std::string("u")}};
  auto rows = sample_neighborhood(center, s, 20, Rat(0), 1);
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& r : rows) EXPECT_EQ(r, center);
}

TEST(Neighborhood, DeterministicAndBoxed) {
  FeatureSchema s = FeatureSchema::parse(R"({"features": [
    {"name": "x", "min": 0, "max": 100}, {"name": "o", "kind": "ordinal", "lower": 0, "upper": 3},
    {"name": "c", "kind": "nominal", "values": ["u", "v", "w"]}]})");
  Row center{{"x", Rat(50)}, {"o", Rat(3)}, {"c", std::string("u")}};
  auto a = sample_neighborhood(center, s, 200, Rat(1, 10), 99);
  auto b = sample_neighborhood(center, s, 200, Rat(1, 10), 99);
  EXPECT_EQ(a, b);
  int changed = 0;
  for (const auto& r : a) {
    Rat x = std::get<Rat>(r.at("x"));
    EXPECT_GE(x, Rat(40));
    EXPECT_LE(x, Rat(60));
    Rat o = std::get<Rat>(r.at("o"));
    EXPECT_TRUE(o.is_integer());
    EXPECT_GE(o, Rat(2));
    EXPECT_LE(o, Rat(3));
    changed += std::get<std::string>(r.at("c")) != "u";
  }
  EXPECT_GT(changed, 0);
  EXPECT_LT(changed, 60);
  EXPECT_NE(a, sample_neighborhood(center, s, 200, Rat(1, 10), 100));
}
