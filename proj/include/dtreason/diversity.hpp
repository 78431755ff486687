#pragma once

// Choice of k contrastive points trading proximity to the factual point
// against spread among themselves:
//
//   f(S) = (lambda/|S|) sum_{i in S} d(F, I_i) - (1/|S|^2) sum_{i,j in S} d(I_i, I_j)
//
// minimized exactly when C(n, k) <= 1e5, otherwise by greedy forward selection.

#include <algorithm>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/errors.hpp"
#include "dtreason/session.hpp"

namespace dtreason {

// Weighted distance between two slot assignments (missing slots read as 0).
inline Rat point_distance(const Assignment& a, const Assignment& b, const DistanceSpec& d) {
  Rat total(0);
  for (const auto& [sl, w] : d.weights) {
    auto get = [&sl](const Assignment& p) {
      auto it = p.find(sl);
      return it == p.end() ? Rat(0) : it->second;
    };
    Rat diff = ((get(a) - get(b)) * w).abs();
    if (d.kind == Norm::L1) total += diff;
    else total = max(total, diff);
  }
  return total;
}

struct DiverseSelection {
  std::vector<std::size_t> indices;  // increasing pool positions
  Rat objective;
  bool exhaustive = false;
};

namespace detail {

inline Rat diversity_objective(const std::vector<std::size_t>& s, const std::vector<Rat>& to_f,
                               const std::vector<std::vector<Rat>>& pair, const Rat& lambda) {
  Rat near(0), spread(0);
  for (auto i : s) {
    near += to_f[i];
    for (auto j : s) spread += pair[i][j];
  }
  Rat k(static_cast<long>(s.size()));
  return lambda / k * near - spread / (k * k);
}

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace detail

inline DiverseSelection select_diverse(const Assignment& factual, const std::vector<Assignment>& pool, std::size_t size,
                                       const Rat& lambda, const DistanceSpec& dist) {
  const std::size_t n = pool.size();
  if (size < 1 || size > n) throw ValidationError("select_diverse: need 1 <= size <= pool size");
  std::vector<Rat> to_f(n);
  std::vector<std::vector<Rat>> pair(n, std::vector<Rat>(n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i) {
    to_f[i] = point_distance(factual, pool[i], dist);
    for (std::size_t j = 0; j < i; ++j) pair[i][j] = pair[j][i] = point_distance(pool[i], pool[j], dist);
  }
  DiverseSelection best;
  if (detail::binomial(n, size) <= 1e5) {
    best.exhaustive = true;
    // subsets in lexicographic order; strict improvement keeps the first optimum
    std::vector<std::size_t> s(size);
    for (std::size_t i = 0; i < size; ++i) s[i] = i;
    bool first = true;
    for (;;) {
      Rat f = detail::diversity_objective(s, to_f, pair, lambda);
      if (first || f < best.objective) {
        best.indices = s;
        best.objective = f;
        first = false;
      }
      std::size_t i = size;
      while (i > 0 && s[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++s[i - 1];
      for (std::size_t j = i; j < size; ++j) s[j] = s[j - 1] + 1;
    }
    return best;
  }
  std::vector<std::size_t> s;
  while (s.size() < size) {
    std::optional<std::size_t> pick;
    Rat pick_f;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::find(s.begin(), s.end(), c) != s.end()) continue;
      std::vector<std::size_t> t = s;
      t.push_back(c);
      Rat f = detail::diversity_objective(t, to_f, pair, lambda);
      if (!pick || f < pick_f) {
        pick = c;
        pick_f = f;
      }
    }
    s.push_back(*pick);
  }
  std::sort(s.begin(), s.end());
  best.indices = s;
  best.objective = detail::diversity_objective(s, to_f, pair, lambda);
  return best;
}

// One ground point per answer over the slots of `instance` (the witness
// is the strict-slack maximizing LP point, integral on integer slots).
inline std::vector<Assignment> answer_points(const Session& s, const AnswerBundle& b, const std::string& instance) {
  std::vector<Assignment> out;
  std::set<VarId> ints = s.integer_vars();
  for (const auto& a : b.answers) {
    auto w = sat_witness(a.constraint, ints);
    if (!w) continue;
    Assignment p;
    for (const auto& [v, x] : *w)
      if (v.instance == instance) p.emplace(v.onehot ? slot(v.feature, *v.onehot) : slot(v.feature), x);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dtreason
