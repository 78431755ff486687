#pragma once

// Minimal CART learner (Gini impurity, axis-parallel and nominal equality
// splits) and uniform-box neighborhood sampling for local surrogates.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dtreason/model.hpp"

namespace dtreason {

namespace detail {

class CartBuilder {
 public:
  CartBuilder(const LabeledData& data, const FeatureSchema& schema, int max_depth)
      : data_(data), schema_(schema), max_depth_(max_depth) {
    std::set<std::string> cls(data.labels.begin(), data.labels.end());
    classes_.assign(cls.begin(), cls.end());
    for (const auto& l : data.labels) label_idx_.push_back(static_cast<int>(std::distance(cls.begin(), cls.find(l))));
  }

  DecisionTree build(const std::string& id) {
    std::vector<int> all(data_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    grow(all, 0);
    return DecisionTree(id, classes_, std::move(nodes_), 0);
  }

 private:
  struct Candidate {
    Primitive cond;
    Rat score;  // sum over children of sum_k count_k^2 / n_child
    std::vector<int> left, right;
  };

  std::vector<Rat> counts(const std::vector<int>& rows) const {
    std::vector<Rat> c(classes_.size(), Rat(0));
    for (int r : rows) c[label_idx_[r]] += 1;
    return c;
  }

  static Rat purity(const std::vector<long>& c, long n) {
    if (n == 0) return Rat(0);
    long s = 0;
    for (long k : c) s += k * k;
    return Rat(s, n);
  }

  std::optional<Candidate> best_split(const std::vector<int>& rows) const {
    std::optional<Candidate> best;
    const std::size_t K = classes_.size();
    std::vector<long> total(K, 0);
    for (int r : rows) ++total[label_idx_[r]];
    const Rat parent = purity(total, static_cast<long>(rows.size()));

    auto consider = [&](Primitive cond, const Rat& score, const auto& goes_left) {
      // strict improvement keeps the earliest candidate on ties
      if (!(score > parent) || (best && !(score > best->score))) return;
      Candidate c{std::move(cond), score, {}, {}};
      for (int r : rows) (goes_left(r) ? c.left : c.right).push_back(r);
      best = std::move(c);
    };

    for (const auto& f : schema_.features()) {
      if (f.kind == FeatureKind::Nominal) {
        for (const auto& v : f.values) {
          std::vector<long> l(K, 0), rr = total;
          long nl = 0;
          for (int r : rows) {
            if (std::get<std::string>(data_.rows[r].at(f.name)) == v) {
              ++l[label_idx_[r]];
              --rr[label_idx_[r]];
              ++nl;
            }
          }
          long nr = static_cast<long>(rows.size()) - nl;
          if (nl == 0 || nr == 0) continue;
          Rat score = purity(l, nl) + purity(rr, nr);
          consider(Primitive(LinTerm::var(slot(f.name, v)), Relation::EQ, LinTerm(Rat(1))), score, [&](int r) {
            return std::get<std::string>(data_.rows[r].at(f.name)) == v;
          });
        }
        continue;
      }
      std::vector<std::pair<Rat, int>> sorted;
      sorted.reserve(rows.size());
      for (int r : rows) sorted.emplace_back(std::get<Rat>(data_.rows[r].at(f.name)), r);
      std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<long> l(K, 0), rr = total;
      long nl = 0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++l[label_idx_[sorted[i].second]];
        --rr[label_idx_[sorted[i].second]];
        ++nl;
        if (sorted[i].first == sorted[i + 1].first) continue;
        long nr = static_cast<long>(sorted.size()) - nl;
        Rat score = purity(l, nl) + purity(rr, nr);
        if (!(score > parent) || (best && !(score > best->score))) continue;
        Rat t = (sorted[i].first + sorted[i + 1].first) / Rat(2);
        consider(Primitive(LinTerm::var(slot(f.name)), Relation::LE, LinTerm(t)), score, [&](int r) {
          return std::get<Rat>(data_.rows[r].at(f.name)) <= t;
        });
      }
    }
    return best;
  }

  int grow(const std::vector<int>& rows, int depth) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{id, std::nullopt, -1, -1, counts(rows)});
    bool pure = true;
    for (int r : rows) pure = pure && label_idx_[r] == label_idx_[rows.front()];
    if (depth >= max_depth_ || pure || rows.size() < 2) return id;
    auto split = best_split(rows);
    if (!split) return id;
    nodes_[id].split = split->cond;
    nodes_[id].counts.clear();
    int l = grow(split->left, depth + 1);
    int r = grow(split->right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  const LabeledData& data_;
  const FeatureSchema& schema_;
  int max_depth_;
  std::vector<std::string> classes_;
  std::vector<int> label_idx_;
  std::vector<TreeNode> nodes_;
};

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

}  // namespace detail

// Classes are ordered lexicographically by label text.
inline DecisionTree learn_tree(const LabeledData& data, const FeatureSchema& schema, int max_depth,
                               const std::string& tree_id = "DT") {
  if (data.rows.empty()) throw ValidationError("learn_tree: empty data");
  if (max_depth < 0) throw ValidationError("learn_tree: negative depth");
  for (const auto& row : data.rows)
    for (const auto& f : schema.features())
      if (!row.count(f.name)) throw ValidationError("learn_tree: row lacks feature '" + f.name + "'");
  return detail::CartBuilder(data, schema, max_depth).build(tree_id);
}

inline double training_accuracy(const DecisionTree& t, const FeatureSchema& schema, const LabeledData& data) {
  if (data.rows.empty()) return 0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.rows.size(); ++i) ok += t.predict(schema, data.rows[i]).first == data.labels[i];
  return static_cast<double>(ok) / static_cast<double>(data.rows.size());
}

// Rows drawn uniformly from the box center +- radius * (max - min) per
// numeric feature (values on a 1e-6 grid of the box); ordinals are rounded
// and clamped to their domain. Nominal values are redrawn uniformly with
// probability `radius`.
inline std::vector<Row> sample_neighborhood(const Row& center, const FeatureSchema& schema, int n, const Rat& radius,
                                            std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_neighborhood: n must be positive");
  if (radius.sign() < 0) throw ValidationError("sample_neighborhood: negative radius");
  constexpr std::uint64_t kGrid = 1000000;
  std::mt19937_64 rng(seed);
  std::vector<Row> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Row row;
    for (const auto& f : schema.features()) {
      auto it = center.find(f.name);
      if (it == center.end()) throw ValidationError("sample_neighborhood: center lacks '" + f.name + "'");
      if (f.kind == FeatureKind::Nominal) {
        Rat u(static_cast<long>(detail::uniform_below(rng, kGrid)), static_cast<long>(kGrid));
        std::size_t pick = detail::uniform_below(rng, f.values.size());
        row.emplace(f.name, u < radius ? FeatureValue(f.values[pick]) : it->second);
        continue;
      }
      Rat c = std::get<Rat>(it->second);
      Rat width = f.norm_min ? (*f.norm_max - *f.norm_min) * radius : Rat(0);
      Rat k(static_cast<long>(detail::uniform_below(rng, kGrid + 1)), static_cast<long>(kGrid));
      Rat v = c - width + width * Rat(2) * k;
      if (f.kind == FeatureKind::Ordinal) {
        v = (v + Rat(1, 2)).floor();
        v = max(f.lower, min(f.upper, v));
      }
      row.emplace(f.name, v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace dtreason
