#pragma once

// Summary figures of an answer bundle: rule lengths, rule and example
// counts, distances at the optimum, and whether each example is a point.

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dtreason/session.hpp"

namespace dtreason {

struct BundleMetrics {
  double l_f = 0;  // mean premises per factual rule
  double l_c = 0;  // mean premises per contrastive rule
  int n_f = 0;     // distinct factual rules
  int n_c = 0;     // distinct contrastive rules
  int n_ce = 0;    // minimal contrastive answers
  std::vector<Rat> d_ce;
  std::vector<bool> ce_point;  // false: some inequality remains

  bool any_higher_dimensional() const {
    for (bool p : ce_point)
      if (!p) return true;
    return false;
  }
  // Mean distance; zero without answers.
  double mean_distance() const {
    if (d_ce.empty()) return 0;
    double s = 0;
    for (const auto& d : d_ce) s += d.to_double();
    return s / static_cast<double>(d_ce.size());
  }
};

// An answer is a point iff no decoded primitive is an inequality.
inline bool is_point(const Answer& a) {
  for (const auto& t : a.text)
    if (t.find('<') != std::string::npos || t.find('>') != std::string::npos) return false;
  return true;
}

inline BundleMetrics metrics(const AnswerBundle& b) {
  BundleMetrics m;
  std::set<std::tuple<std::string, std::string, int>> seen_f, seen_c;
  std::size_t len_f = 0, len_c = 0;
  for (const auto& a : b.answers) {
    for (const auto& r : a.rules) {
      auto key = std::make_tuple(r.instance, r.tree_id, r.leaf_id);
      if (r.contrastive) {
        if (seen_c.insert(key).second) len_c += r.antecedent.size();
      } else if (seen_f.insert(key).second) {
        len_f += r.antecedent.size();
      }
    }
    if (b.minimized) {
      ++m.n_ce;
      if (a.value) m.d_ce.push_back(*a.value);
      m.ce_point.push_back(is_point(a));
    }
  }
  m.n_f = static_cast<int>(seen_f.size());
  m.n_c = static_cast<int>(seen_c.size());
  if (m.n_f) m.l_f = static_cast<double>(len_f) / m.n_f;
  if (m.n_c) m.l_c = static_cast<double>(len_c) / m.n_c;
  return m;
}

}  // namespace dtreason
