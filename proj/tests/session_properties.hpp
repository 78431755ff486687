#pragma once

// Randomized checks over whole sessions: asserting and retracting a
// constraint is invisible to later solves, and scripts replay byte-for-byte.

#include <sstream>

#include <dtreason/script.hpp>

#include "properties.hpp"

namespace props {

inline const char* kToyTrees[] = {
    R"({"tree_id": "A", "classes": ["0", "1"], "nodes": [
      {"id": 0, "split": {"coeffs": {"x1": 1, "x2": 1}, "op": "<", "threshold": 5}, "left": 1, "right": 2},
      {"id": 1, "counts": [20, 1]}, {"id": 2, "counts": [2, 20]}]})",
    R"({"tree_id": "B", "classes": ["0", "1"], "nodes": [
      {"id": 0, "split": {"coeffs": {"x1": 1}, "op": "<=", "threshold": 1.5}, "left": 1, "right": 2},
      {"id": 1, "counts": [9, 3]},
      {"id": 2, "split": {"coeffs": {"x2": 2, "x1": -1}, "op": "<", "threshold": 3}, "left": 3, "right": 4},
      {"id": 3, "counts": [1, 7]}, {"id": 4, "counts": [6, 6]}]})",
};

inline std::string random_constraint(Gen& g, const std::vector<std::string>& insts) {
  std::ostringstream o;
  int terms = g.integer(1, 2);
  for (int i = 0; i < terms; ++i) {
    int c = g.integer(-3, 3);
    if (c == 0) c = 1;
    o << (i ? (c < 0 ? " - " : " + ") : (c < 0 ? "-" : "")) << std::abs(c) << "*"
      << insts[static_cast<std::size_t>(g.integer(0, static_cast<int>(insts.size()) - 1))] << ".x" << g.integer(1, 2);
  }
  static const char* rels[] = {"<", "<=", "=", ">=", ">"};
  o << " " << rels[g.integer(0, 4)] << " " << g.integer(-4, 8);
  return o.str();
}

// Script over the toy trees: instances, constraints, retractions, solves.
inline std::string random_script(Gen& g) {
  std::ostringstream s;
  s << "schema-inline " << R"({"features": [{"name": "x1", "kind": "continuous", "min": -10, "max": 10},)"
    << R"( {"name": "x2", "kind": "ordinal", "lower": -10, "upper": 10}]})" << "\n";
  int trees = g.integer(1, 2);
  for (int t = 0; t < trees; ++t) s << "model-inline " << json::parse(kToyTrees[t]).dump() << "\n";
  s << "instance F label=" << g.integer(0, 1);
  if (g.coin()) s << " features=" << g.integer(-2, 4) << "," << g.integer(-2, 4);
  s << "\n";
  s << "instance CE label=" << g.integer(0, 1) << " minconf=" << g.integer(0, 4) << "/5\n";
  std::vector<std::string> insts{"F", "CE"};
  int steps = g.integer(1, 5);
  int asserted = 0;
  for (int k = 0; k < steps; ++k) {
    int pick = g.integer(0, 5);
    if (pick <= 2) {
      s << "constraint " << random_constraint(g, insts) << "\n";
      ++asserted;
    } else if (pick == 3 && asserted > 0) {
      s << "retract last\n";
      --asserted;
    } else if (pick == 4) {
      s << "solveopt project=CE\n";
    } else {
      s << "solveopt minimize=" << (g.coin() ? "l1norm" : "linfnorm") << "(F, CE) project=CE eps=" << g.eps().str()
        << (g.coin() ? " global" : "") << "\n";
    }
  }
  s << "solveopt\n";
  return s.str();
}

inline std::string run_structured(Session& s, const std::string& script) {
  std::ostringstream out;
  std::istringstream in(script);
  ScriptRunner(s, out, ScriptRunner::Format::Structured).run(in);
  return out.str();
}

inline std::string last_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  auto start = s.rfind('\n', end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

// Solving, asserting and retracting a random constraint, then solving again
// gives the same bundle; both solves are with and without minimization.
inline Outcome assert_retract_neutral(int cases, std::uint64_t seed) {
  Gen g(seed);
  Outcome o;
  for (int k = 0; k < cases; ++k) {
    ++o.cases;
    std::string script = random_script(g);
    std::string solve = g.coin() ? "solveopt minimize=l1norm(F, CE) project=CE\n" : "solveopt\n";
    std::string extra = random_constraint(g, {"F", "CE"});
    std::string undo = g.coin() ? "retract last\n" : "retract " + extra + "\n";
    try {
      Session a;
      std::string before = last_line(run_structured(a, script + solve));
      std::string after = last_line(run_structured(a, "constraint " + extra + "\n" + undo + solve));
      if (before != after) o.fail("assert/retract of '" + extra + "' changed the answer after:\n" + script);
    } catch (const std::exception& e) {
      o.fail(std::string("error: ") + e.what() + "\n" + script);
    }
  }
  return o;
}

// The same script run twice gives identical structured output, and the
// session's own snapshot rebuilds a session that answers its final solve alike.
inline Outcome replay_deterministic(int cases, std::uint64_t seed) {
  Gen g(seed);
  Outcome o;
  for (int k = 0; k < cases; ++k) {
    ++o.cases;
    std::string script = random_script(g);
    try {
      Session a, b;
      std::string first = run_structured(a, script), second = run_structured(b, script);
      if (first != second) {
        o.fail("two runs differ:\n" + script);
        continue;
      }
      Session c;
      std::string replayed = run_structured(c, to_script(a));
      if (replayed != first) o.fail("snapshot replay differs:\n" + script);
      else if (to_script(c) != to_script(a)) o.fail("snapshot of the replay differs:\n" + script);
    } catch (const std::exception& e) {
      o.fail(std::string("error: ") + e.what() + "\n" + script);
    }
  }
  return o;
}

}  // namespace props

#include <dtreason/diversity.hpp>

namespace props {

// select_diverse against enumeration of every 3-subset of a random pool, with
// the objective and distances recomputed here from their definitions.
inline Outcome diversity_oracle(int cases, std::uint64_t seed) {
  Gen g(seed);
  Outcome o;
  for (int k = 0; k < cases; ++k) {
    ++o.cases;
    int dims = g.integer(1, 3);
    DistanceSpec d{g.coin() ? Norm::L1 : Norm::Linf, "F", "CE", {}};
    std::vector<VarId> slots;
    std::vector<Rat> w;
    for (int i = 0; i < dims; ++i) {
      slots.push_back(slot("f" + std::to_string(i)));
      w.push_back(Rat(g.integer(1, 4), g.integer(1, 3)));
      d.weights[slots.back()] = w.back();
    }
    auto point = [&] {
      Assignment a;
      for (auto& s : slots) a[s] = Rat(g.integer(-10, 10), g.integer(1, 2));
      return a;
    };
    auto dist = [&](const Assignment& a, const Assignment& b) {
      Rat sum(0), mx(0);
      for (int i = 0; i < dims; ++i) {
        Rat v = a.at(slots[i]) - b.at(slots[i]);
        if (v.sign() < 0) v = -v;
        v *= w[i];
        sum += v;
        if (v > mx) mx = v;
      }
      return d.kind == Norm::L1 ? sum : mx;
    };
    Assignment f = point();
    std::vector<Assignment> pool;
    int n = g.integer(3, 8);
    for (int i = 0; i < n; ++i) pool.push_back(point());
    Rat lambda(g.integer(0, 6), 2);
    std::optional<Rat> best;
    std::vector<std::size_t> best_set;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c) {
          std::vector<int> s{a, b, c};
          Rat near(0), spread(0);
          for (int i : s) {
            near += dist(f, pool[i]);
            for (int j : s) spread += dist(pool[i], pool[j]);
          }
          Rat val = lambda * near / Rat(3) - spread / Rat(9);
          if (!best || val < *best) {
            best = val;
            best_set = {static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)};
          }
        }
    DiverseSelection got = select_diverse(f, pool, 3, lambda, d);
    if (got.objective != *best || got.indices != best_set)
      o.fail("pool of " + std::to_string(n) + ": objective " + got.objective.str() + ", expected " + best->str());
  }
  return o;
}

}  // namespace props
