#pragma once

// Line-oriented session scripts and their output.
//
//   schema PATH | schema-inline JSON
//   model PATH  | model-inline JSON
//   instance NAME label=L [minconf=R] [features=v1,v2,...] [set.FEATURE=v] [trees=T1,T2]
//   constraint TEXT
//   retract TEXT | retract last
//   solveopt [minimize=l1norm(A, B)] [project=A,B.f] [eps=R] [global]
//   diverse minimize=l1norm(F, CE) size=K [lambda=R] [eps=R]
//   reset [keep_model]
//   verbosity N
//
// Blank lines and lines starting with '#' are ignored. Relative paths are
// resolved against the script's directory.

#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dtreason/diversity.hpp"
#include "dtreason/errors.hpp"
#include "dtreason/metrics.hpp"
#include "dtreason/model.hpp"
#include "dtreason/session.hpp"

namespace dtreason {

// Machine-readable form of an answer bundle, shared by the CLI's structured
// output and the HTTP service.
inline json bundle_json(const AnswerBundle& b) {
  json answers = json::array();
  for (const auto& a : b.answers) {
    json rules = json::array();
    for (const auto& r : a.rules)
      rules.push_back({{"instance", r.instance},
                       {"kind", r.contrastive ? "contrastive" : "factual"},
                       {"tree", r.tree_id},
                       {"leaf", r.leaf_id},
                       {"antecedent", r.antecedent_text},
                       {"label", r.label},
                       {"confidence", r.confidence.str()},
                       {"confidence_text", format_confidence(r.confidence)},
                       {"text", Session::rule_text(r)}});
    json ja{{"constraints", a.text}, {"rules", rules}};
    ja["min_value"] = a.value ? json(a.value->str()) : json(nullptr);
    answers.push_back(std::move(ja));
  }
  BundleMetrics m = metrics(b);
  json d = json::array();
  for (const auto& v : m.d_ce) d.push_back(v.str());
  json dims = json::array();
  for (bool p : m.ce_point) dims.push_back(p ? "point" : "higher-dimensional");
  json jm{{"l_F", m.l_f}, {"l_C", m.l_c}, {"N_F", m.n_f}, {"N_C", m.n_c}, {"N_CE", m.n_ce}, {"d_CE", d}, {"dim_CE", dims}};
  return json{{"answers", answers}, {"no_answer", b.empty()}, {"metrics", jm}, {"query", b.query},
              {"unattained", b.unattained}};
}

struct ScriptError : Error {
  enum class Kind { Parse, Engine };
  ScriptError(Kind k, int line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), kind(k), line(line) {}
  Kind kind;
  int line;
};

namespace detail {

// Whitespace-separated words; quotes and parentheses group.
inline std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  char quote = 0;
  bool have = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == '\\' && i + 1 < s.size()) cur += s[++i];
      else if (c == quote) quote = 0;
      else cur += c;
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      have = true;
      continue;
    }
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (std::isspace(static_cast<unsigned char>(c)) && depth <= 0) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
      continue;
    }
    cur += c;
    have = true;
  }
  if (quote) throw ParseError("unterminated quote", s.size());
  if (have) out.push_back(cur);
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace detail

class ScriptRunner {
 public:
  enum class Format { Text, Structured };

  ScriptRunner(Session& s, std::ostream& out, Format f = Format::Text, std::filesystem::path base = ".")
      : s_(s), out_(out), format_(f), base_(std::move(base)) {}

  // Runs every line; stops at the first error, which is rethrown as a
  // ScriptError carrying the line number.
  void run(std::istream& in) {
    std::string line;
    int n = 0;
    while (std::getline(in, line)) execute(line, ++n);
  }

  void execute(const std::string& raw, int line_no) {
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') return;
    try {
      command(line);
    } catch (const ParseError& e) {
      throw ScriptError(ScriptError::Kind::Parse, line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ScriptError(ScriptError::Kind::Parse, line_no, e.what());
    } catch (const Error& e) {
      throw ScriptError(ScriptError::Kind::Engine, line_no, e.what());
    }
  }

  // One command, with the library's own exceptions left unwrapped.
  void command(const std::string& line) {
    auto sp = line.find_first_of(" \t");
    std::string cmd = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : detail::trim(line.substr(sp));
    if (cmd == "schema") s_.set_schema(FeatureSchema::load(path(rest)));
    else if (cmd == "schema-inline") s_.set_schema(FeatureSchema::parse(rest));
    else if (cmd == "model") s_.add_tree(DecisionTree::load(path(rest)));
    else if (cmd == "model-inline") s_.add_tree(DecisionTree::parse(rest));
    else if (cmd == "instance") instance(rest);
    else if (cmd == "constraint") {
      if (rest.empty()) throw ParseError("constraint needs text", cmd.size());
      s_.assert_constraint(rest);
    } else if (cmd == "retract") {
      if (rest == "last") s_.retract_last();
      else s_.retract(rest);
    } else if (cmd == "solveopt") solveopt(rest, line);
    else if (cmd == "diverse") diverse(rest, line);
    else if (cmd == "reset") {
      if (!rest.empty() && rest != "keep_model") throw ParseError("reset takes only 'keep_model'", cmd.size() + 1);
      s_.reset(rest == "keep_model");
    } else if (cmd == "verbosity") {
      Rat v;
      if (!Rat::try_parse(rest, v) || !v.is_integer()) throw ParseError("verbosity expects an integer", cmd.size() + 1);
      s_.set_verbosity(static_cast<int>(v.numerator().get_si()));
    } else {
      throw ParseError("unknown command '" + cmd + "'", 0);
    }
  }

  // Called with every bundle before it is written.
  std::function<void(const AnswerBundle&)> on_solve;

 private:

  std::string path(const std::string& p) const {
    if (p.empty()) throw ParseError("missing path", 0);
    std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base_ / fp).string();
  }

  void instance(const std::string& rest) {
    auto args = detail::split_args(rest);
    if (args.empty()) throw ParseError("instance needs a name", 0);
    InstanceDecl d;
    d.name = args[0];
    bool labelled = false;
    FeatureSchema schema = s_.schema();
    for (std::size_t i = 1; i < args.size(); ++i) {
      auto eq = args[i].find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, got '" + args[i] + "'", 0);
      std::string key = args[i].substr(0, eq), val = args[i].substr(eq + 1);
      if (key == "label") {
        d.label = val;
        labelled = true;
      } else if (key == "minconf") {
        d.minconf = Rat::parse(val);
      } else if (key == "features") {
        auto vals = detail::split_list(val);
        if (vals.size() > schema.size()) throw ParseError("more feature values than schema features", 0);
        for (std::size_t k = 0; k < vals.size(); ++k) {
          if (vals[k] == "_" || vals[k].empty()) continue;
          d.features[schema.features()[k].name] = parse_feature(schema.features()[k], vals[k]);
        }
      } else if (key.rfind("set.", 0) == 0) {
        const Feature& f = schema.at(key.substr(4));
        d.features[f.name] = parse_feature(f, val);
      } else if (key == "trees") {
        d.trees = detail::split_list(val);
      } else {
        throw ParseError("unknown instance option '" + key + "'", 0);
      }
    }
    if (!labelled) throw ParseError("instance needs label=...", 0);
    s_.declare_instance(d);
  }

  static FeatureValue parse_feature(const Feature& f, const std::string& v) {
    try {
      return parse_value(f, v);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), 0);
    }
  }

  void solveopt(const std::string& rest, const std::string& line) {
    SolveOptions opt;
    for (const auto& a : detail::split_args(rest)) {
      if (a == "global") {
        opt.global_only = true;
        continue;
      }
      auto eq = a.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, got '" + a + "'", 0);
      std::string key = a.substr(0, eq), val = a.substr(eq + 1);
      if (key == "minimize") opt.minimize = s_.parse_distance(val);
      else if (key == "project") opt.project = detail::split_list(val);
      else if (key == "eps") {
        opt.eps = Rat::parse(val);
        if (opt.eps.sign() < 0) throw ParseError("eps must be non-negative", 0);
      } else throw ParseError("unknown solveopt option '" + key + "'", 0);
    }
    AnswerBundle b = s_.solveopt(opt);
    s_.log_solve(line);
    if (on_solve) on_solve(b);
    if (format_ == Format::Text) out_ << s_.render_bundle(b);
    else out_ << bundle_json(b).dump() << "\n";
    out_.flush();
  }

  // Closest point of every contrastive region, then the size-K subset
  // minimizing the proximity/spread objective.
  void diverse(const std::string& rest, const std::string& line) {
    SolveOptions opt;
    std::size_t size = 0;
    Rat lambda(1, 2);
    for (const auto& a : detail::split_args(rest)) {
      auto eq = a.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, got '" + a + "'", 0);
      std::string key = a.substr(0, eq), val = a.substr(eq + 1);
      Rat r;
      if (key == "minimize") opt.minimize = s_.parse_distance(val);
      else if (key == "size" || key == "lambda" || key == "eps") {
        if (!Rat::try_parse(val, r) || r.sign() < 0) throw ParseError(key + " expects a non-negative number", 0);
        if (key == "size") {
          if (!r.is_integer() || r.sign() == 0) throw ParseError("size expects a positive integer", 0);
          size = static_cast<std::size_t>(r.numerator().get_ui());
        } else if (key == "lambda") lambda = r;
        else opt.eps = r;
      } else throw ParseError("unknown diverse option '" + key + "'", 0);
    }
    if (!opt.minimize) throw ParseError("diverse needs minimize=...", 0);
    if (!size) throw ParseError("diverse needs size=K", 0);
    const DistanceSpec& d = *opt.minimize;
    opt.project = {d.from, d.to};
    AnswerBundle b = s_.solveopt(opt);
    s_.log_solve(line);
    std::vector<Assignment> pool = answer_points(s_, b, d.to);
    std::vector<Assignment> fs = answer_points(s_, b, d.from);
    json sel = json::array();
    std::string text;
    if (pool.size() < size) {
      text = "No selection: " + std::to_string(pool.size()) + " contrastive points, size " + std::to_string(size) + ".\n";
    } else {
      DiverseSelection ds = select_diverse(fs.front(), pool, size, lambda, d);
      text = "Diverse selection of " + std::to_string(size) + " from " + std::to_string(pool.size()) + " (lambda " +
             lambda.str() + "):\n";
      for (auto i : ds.indices) {
        std::string p = point_text(d.to, pool[i]);
        Rat dist = point_distance(fs.front(), pool[i], d);
        text += p + " (" + format_value(dist) + ")\n";
        sel.push_back({{"index", i}, {"point", p}, {"distance", dist.str()}});
      }
      text += "Objective: " + format_value(ds.objective) + "\n";
      if (format_ == Format::Structured)
        text = json{{"pool", pool.size()}, {"selected", sel}, {"objective", ds.objective.str()},
                    {"exhaustive", ds.exhaustive}}.dump() + "\n";
    }
    if (format_ == Format::Structured && sel.empty())
      text = json{{"pool", pool.size()}, {"selected", sel}, {"objective", nullptr}}.dump() + "\n";
    out_ << text;
    out_.flush();
  }

  std::string point_text(const std::string& inst, const Assignment& p) const {
    std::string out;
    FeatureSchema schema = s_.schema();
    for (const auto& f : schema.features()) {
      std::string v;
      if (f.kind == FeatureKind::Nominal) {
        for (const auto& x : f.values) {
          auto it = p.find(slot(f.name, x));
          if (it != p.end() && it->second == Rat(1)) v = x;
        }
      } else if (auto it = p.find(slot(f.name)); it != p.end()) {
        v = it->second.str();
      }
      if (!v.empty()) out += (out.empty() ? "" : ",") + inst + "." + f.name + "=" + v;
    }
    return out;
  }

  Session& s_;
  std::ostream& out_;
  Format format_;
  std::filesystem::path base_;
};

// Commands that rebuild the session's current state (and repeat its solves).
inline std::string to_script(const Session& s) {
  std::string out;
  for (const auto& l : s.log()) out += l + "\n";
  return out;
}

}  // namespace dtreason
