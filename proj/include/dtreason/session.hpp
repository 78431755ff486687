#pragma once

// A reasoning session: trees, a feature schema, named instances, and an
// ordered ledger of user constraints. solveopt() builds the query
//
//   S = sat(cross(inst(I_1, T, l_1, c_1), ..., {U}, {types}))
//   M = inf(relax(S, eps), distance)          when minimizing
//   P = project(M or S, kept variables)
//
// and decodes the disjuncts of P into answers and explanation rules.

#include <algorithm>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtreason/algebra.hpp"
#include "dtreason/constraint.hpp"
#include "dtreason/errors.hpp"
#include "dtreason/model.hpp"
#include "dtreason/parser.hpp"
#include "dtreason/polyhedra.hpp"

namespace dtreason {

struct InstanceDecl {
  std::string name;
  std::string label;
  Rat minconf = 0;
  Row features;                    // fixed values, possibly partial
  std::vector<std::string> trees;  // empty: every loaded tree
};

enum class Norm { L1, Linf };

inline const char* norm_name(Norm n) { return n == Norm::L1 ? "l1norm" : "linfnorm"; }

struct DistanceSpec {
  Norm kind = Norm::L1;
  std::string from, to;          // distance between `from` and `to`
  std::map<VarId, Rat> weights;  // per feature slot
};

struct SolveOptions {
  std::optional<DistanceSpec> minimize;
  std::vector<std::string> project;  // "I" or "I.feature"; empty keeps every instance
  Rat eps = 0;
  bool global_only = false;  // keep only disjuncts attaining the smallest minimum
};

struct Rule {
  std::string instance;
  bool contrastive = false;
  std::string tree_id;
  int leaf_id = -1;
  std::vector<Primitive> antecedent;
  std::vector<std::string> antecedent_text;
  std::string label;
  Rat confidence;
};

struct Answer {
  Conj constraint;                // engine form (one-hot indicators)
  std::vector<std::string> text;  // decoded primitives
  std::vector<Rule> rules;
  std::optional<Rat> value;
};

struct AnswerBundle {
  std::vector<Answer> answers;
  std::string query;
  bool minimized = false;
  // Disjuncts whose infimum was not attained (dropped from answers).
  int unattained = 0;

  bool empty() const { return answers.empty(); }
};

// ---- number rendering ----

// Four-decimal truncation without trailing zeros, at least one decimal.
inline std::string format_confidence(const Rat& r) {
  std::string s = r.truncated(4);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

// Exact value; non-terminating decimals get a truncated approximation.
inline std::string format_value(const Rat& r) {
  std::string s = r.str();
  if (s.find('/') != std::string::npos) s += " (" + r.truncated(4) + ")";
  return s;
}

inline bool is_name(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!(std::isalnum(c) || c == '_' || c == '$' || c >= 0x80)) return false;
  return !std::isdigit(static_cast<unsigned char>(s[0]));
}

class Session {
 public:
  // ---- models and schema ----

  void add_tree(DecisionTree t) {
    t.validate();
    if (tree_index(t.id()) >= 0) throw DuplicateError("tree '" + t.id() + "' already loaded");
    if (schema_) t.check_schema(*schema_);
    log_.push_back("model-inline " + t.to_json().dump());
    trees_.push_back(std::move(t));
  }

  void set_schema(FeatureSchema s) {
    if (!instances_.empty()) throw ValidationError("schema must be set before instances are declared");
    for (const auto& t : trees_) t.check_schema(s);
    log_.push_back("schema-inline " + s.to_json().dump());
    schema_ = std::move(s);
  }

  bool has_schema() const { return schema_.has_value(); }

  // The explicit schema, else continuous/nominal features read off the trees.
  FeatureSchema schema() const {
    if (schema_) return *schema_;
    std::map<std::string, std::vector<std::string>> nominal;
    std::set<std::string> numeric;
    for (const auto& t : trees_)
      for (const auto& n : t.nodes()) {
        if (!n.split) continue;
        for (const auto& [v, a] : n.split->lhs.coeffs()) {
          if (!v.onehot) {
            numeric.insert(v.feature);
            continue;
          }
          auto& vals = nominal[v.feature];
          if (std::find(vals.begin(), vals.end(), *v.onehot) == vals.end()) vals.push_back(*v.onehot);
        }
      }
    std::vector<Feature> fs;
    std::set<std::string> names = numeric;
    for (const auto& [f, vals] : nominal) names.insert(f);
    for (const auto& name : names) {
      Feature f;
      f.name = name;
      if (nominal.count(name)) {
        if (numeric.count(name)) throw ValidationError("feature '" + name + "' is used both as nominal and numeric");
        f.kind = FeatureKind::Nominal;
        f.values = nominal.at(name);
      }
      fs.push_back(std::move(f));
    }
    return FeatureSchema(std::move(fs));
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }

  const DecisionTree& tree(const std::string& id) const {
    int i = tree_index(id);
    if (i < 0) throw NameError("unknown tree '" + id + "'");
    return trees_[i];
  }

  // ---- instances ----

  void declare_instance(const InstanceDecl& d) {
    if (!is_name(d.name) || d.name == VarId::kAuxInstance) throw ValidationError("invalid instance name '" + d.name + "'");
    if (find_instance(d.name)) throw DuplicateError("instance '" + d.name + "' already declared");
    if (trees_.empty()) throw ValidationError("no model loaded");
    if (d.minconf.sign() < 0 || d.minconf > Rat(1)) throw ValidationError("minconf must lie in [0,1]");
    for (const auto& t : d.trees) tree(t);
    bool known_label = false;
    for (const auto& t : linked_trees(d)) {
      const auto& cls = t->classes();
      known_label = known_label || std::find(cls.begin(), cls.end(), d.label) != cls.end();
    }
    if (!known_label) throw ValidationError("label '" + d.label + "' is not a class of the instance's trees");
    FeatureSchema s = schema();
    std::vector<std::pair<std::string, Conj>> fixed;
    for (const auto& [name, value] : d.features) {
      const Feature& f = s.at(name);
      std::string text;
      if (f.kind == FeatureKind::Nominal) {
        const auto* v = std::get_if<std::string>(&value);
        if (!v || !f.has_value(*v)) throw ValidationError("instance '" + d.name + "': bad value for nominal '" + name + "'");
        text = d.name + "." + name + "=" + *v;
      } else {
        const auto* v = std::get_if<Rat>(&value);
        if (!v) throw ValidationError("instance '" + d.name + "': feature '" + name + "' expects a number");
        if (f.kind == FeatureKind::Ordinal && (!v->is_integer() || *v < f.lower || *v > f.upper))
          throw ValidationError("instance '" + d.name + "': ordinal '" + name + "' out of domain");
        text = d.name + "." + name + "=" + v->str();
      }
      fixed.emplace_back(text, Conj());
    }
    instances_.push_back(d);
    for (auto& [text, c] : fixed) constraints_.push_back({text, parse(text)});
    log_.push_back(instance_command(d));
  }

  const std::vector<InstanceDecl>& instances() const { return instances_; }

  const InstanceDecl* find_instance(const std::string& name) const {
    for (const auto& i : instances_)
      if (i.name == name) return &i;
    return nullptr;
  }

  // ---- user constraints ----

  Conj parse(const std::string& text) const {
    FeatureSchema s = schema();
    NameResolver names{[this](const std::string& i) { return find_instance(i) != nullptr; }, &s};
    return parse_constraints(text, names);
  }

  Conj assert_constraint(const std::string& text) {
    Conj c = parse(text);
    constraints_.push_back({text, c});
    log_.push_back("constraint " + text);
    return c;
  }

  // Removes the most recent entry with this source text, else the most
  // recent entry with the same parsed primitives.
  void retract(const std::string& text) {
    auto pos = std::find_if(constraints_.rbegin(), constraints_.rend(), [&](const auto& e) { return e.first == text; });
    if (pos == constraints_.rend()) {
      std::optional<Conj> parsed;
      try {
        parsed = parse(text);
      } catch (const Error&) {
      }
      if (parsed)
        pos = std::find_if(constraints_.rbegin(), constraints_.rend(),
                           [&](const auto& e) { return e.second.primitives() == parsed->primitives(); });
    }
    if (pos == constraints_.rend()) throw NoSuchConstraint("no asserted constraint '" + text + "'");
    constraints_.erase(std::next(pos).base());
    log_.push_back("retract " + text);
  }

  void retract_last() {
    if (constraints_.empty()) throw NoSuchConstraint("no constraint to retract");
    constraints_.pop_back();
    log_.push_back("retract last");
  }

  const std::vector<std::pair<std::string, Conj>>& constraints() const { return constraints_; }

  void reset(bool keep_model) {
    instances_.clear();
    constraints_.clear();
    if (!keep_model) {
      trees_.clear();
      schema_.reset();
      log_.clear();
      return;
    }
    std::vector<std::string> kept;
    for (const auto& l : log_)
      if (l.rfind("model-inline ", 0) == 0 || l.rfind("schema-inline ", 0) == 0 || l.rfind("verbosity ", 0) == 0)
        kept.push_back(l);
    log_ = std::move(kept);
  }

  Conj user_constraints() const {
    Conj u;
    for (const auto& [text, c] : constraints_) u = conjoin(u, c);
    return u;
  }

  // ---- implicit constraints ----

  Conj implicit_constraints() const {
    Conj out;
    FeatureSchema s = schema();
    for (const auto& inst : instances_) {
      for (const auto& f : s.features()) {
        if (f.kind == FeatureKind::Ordinal) {
          LinTerm x = LinTerm::var(VarId(inst.name, f.name));
          out.add(Primitive(x, Relation::GE, LinTerm(f.lower)));
          out.add(Primitive(x, Relation::LE, LinTerm(f.upper)));
        } else if (f.kind == FeatureKind::Nominal) {
          LinTerm sum;
          for (const auto& v : f.values) {
            LinTerm x = LinTerm::var(VarId(inst.name, f.name, v));
            out.add(Primitive(x, Relation::GE, LinTerm(Rat(0))));
            out.add(Primitive(x, Relation::LE, LinTerm(Rat(1))));
            sum += x;
          }
          out.add(Primitive(sum, Relation::EQ, LinTerm(Rat(1))));
        }
      }
    }
    out.add_provenance(Provenance::implicit());
    return out;
  }

  std::set<VarId> integer_vars() const {
    std::set<VarId> out;
    FeatureSchema s = schema();
    for (const auto& inst : instances_)
      for (const auto& f : s.features()) {
        if (f.kind == FeatureKind::Ordinal) out.insert(VarId(inst.name, f.name));
        if (f.kind == FeatureKind::Nominal)
          for (const auto& v : f.values) out.insert(VarId(inst.name, f.name, v));
      }
    return out;
  }

  // ---- distances ----

  DistanceSpec distance(Norm kind, const std::string& from, const std::string& to) const {
    for (const auto& n : {from, to})
      if (!find_instance(n)) throw NameError("unknown instance '" + n + "'");
    DistanceSpec d{kind, from, to, {}};
    FeatureSchema s = schema();
    for (const auto& f : s.features()) {
      if (f.kind == FeatureKind::Nominal) {
        for (const auto& v : f.values) d.weights[slot(f.name, v)] = kind == Norm::L1 ? Rat(1, 2) : Rat(1);
      } else {
        d.weights[slot(f.name)] = f.range_weight();
      }
    }
    return d;
  }

  // "l1norm(F, CE)" or "linfnorm(F, CE)".
  DistanceSpec parse_distance(const std::string& text) const {
    auto open = text.find('('), close = text.rfind(')');
    auto comma = text.find(',');
    if (open == std::string::npos || close == std::string::npos || comma == std::string::npos || comma < open ||
        comma > close)
      throw ParseError("expected l1norm(A, B) or linfnorm(A, B)", 0);
    std::string fn = detail::trim(text.substr(0, open));
    std::string a = detail::trim(text.substr(open + 1, comma - open - 1));
    std::string b = detail::trim(text.substr(comma + 1, close - comma - 1));
    if (!detail::trim(text.substr(close + 1)).empty()) throw ParseError("trailing text after distance", close + 1);
    Norm n;
    if (fn == "l1norm") n = Norm::L1;
    else if (fn == "linfnorm") n = Norm::Linf;
    else throw ParseError("unknown distance '" + fn + "'", 0);
    return distance(n, a, b);
  }

  // Slack linearization. L1: t_k >= +-(to.x_k - from.x_k), objective sum w_k t_k.
  // Linf: s >= +-w_k (to.x_k - from.x_k), objective s.
  static std::pair<LinTerm, std::vector<Primitive>> encode_distance(const DistanceSpec& d) {
    LinTerm objective;
    std::vector<Primitive> aux;
    const LinTerm s = LinTerm::var(VarId::aux("s"));
    int k = 0;
    for (const auto& [sl, w] : d.weights) {
      VarId a = sl.onehot ? VarId(d.to, sl.feature, *sl.onehot) : VarId(d.to, sl.feature);
      VarId b = sl.onehot ? VarId(d.from, sl.feature, *sl.onehot) : VarId(d.from, sl.feature);
      LinTerm diff = LinTerm::var(a) - LinTerm::var(b);
      if (d.kind == Norm::L1) {
        LinTerm t = LinTerm::var(VarId::aux("t" + std::to_string(k++)));
        aux.emplace_back(diff, Relation::LE, t);
        aux.emplace_back(-diff, Relation::LE, t);
        objective += t * w;
      } else {
        aux.emplace_back(diff * w, Relation::LE, s);
        aux.emplace_back(-diff * w, Relation::LE, s);
      }
    }
    if (d.kind == Norm::Linf) {
      aux.emplace_back(s, Relation::GE, LinTerm(Rat(0)));
      objective = s;
    }
    return {objective, aux};
  }

  // ---- queries ----

  EvalContext context() const {
    EvalContext ctx;
    for (const auto& t : trees_) ctx.trees[t.id()] = t.extract_paths();
    for (const auto& i : instances_) ctx.instances.push_back(i.name);
    ctx.user_constraints = user_constraints();
    ctx.implicit_constraints = implicit_constraints();
    ctx.integer_vars = integer_vars();
    return ctx;
  }

  std::set<VarId> keep_set(const std::vector<std::string>& project) const {
    FeatureSchema s = schema();
    std::set<VarId> keep;
    auto add_feature = [&](const std::string& inst, const Feature& f) {
      if (f.kind == FeatureKind::Nominal)
        for (const auto& v : f.values) keep.insert(VarId(inst, f.name, v));
      else
        keep.insert(VarId(inst, f.name));
    };
    if (project.empty()) {
      for (const auto& i : instances_)
        for (const auto& f : s.features()) add_feature(i.name, f);
      return keep;
    }
    for (const auto& item : project) {
      auto dot = item.find('.');
      std::string inst = item.substr(0, dot);
      if (!find_instance(inst)) throw NameError("unknown instance '" + inst + "' in projection");
      if (dot == std::string::npos) {
        for (const auto& f : s.features()) add_feature(inst, f);
      } else {
        add_feature(inst, s.at(item.substr(dot + 1)));
      }
    }
    return keep;
  }

  ExprPtr build_query(const SolveOptions& opt) const {
    if (instances_.empty()) throw ValidationError("no instance declared");
    std::vector<ExprPtr> parts;
    for (const auto& i : instances_)
      for (const auto* t : linked_trees(i)) parts.push_back(make_inst(i.name, t->id(), i.label, i.minconf));
    parts.push_back(make_user());
    parts.push_back(make_type());
    ExprPtr e = make_sat(make_cross(std::move(parts)));
    if (opt.minimize) {
      auto [objective, aux] = encode_distance(*opt.minimize);
      e = make_inf(make_relax(e, opt.eps), objective, aux);
    }
    return make_project(e, keep_set(opt.project));
  }

  AnswerBundle solveopt(const SolveOptions& opt = {}) const {
    ExprPtr q = build_query(opt);
    EvalContext ctx = context();
    EvalResult r = solve(q, ctx);
    AnswerBundle b;
    b.query = to_string(q);
    b.minimized = opt.minimize.has_value();
    for (auto& d : r.disjuncts) {
      if (d.conj.has_contradiction()) {
        ++b.unattained;
        continue;
      }
      Answer a;
      a.constraint = d.conj;
      a.value = d.value;
      a.text = decode(d.conj);
      a.rules = rules_of(d.conj);
      b.answers.push_back(std::move(a));
    }
    if (opt.global_only && !b.answers.empty()) {
      std::optional<Rat> best;
      for (const auto& a : b.answers)
        if (a.value && (!best || *a.value < *best)) best = a.value;
      std::vector<Answer> kept;
      for (auto& a : b.answers)
        if (!best || (a.value && *a.value == *best)) kept.push_back(std::move(a));
      b.answers = std::move(kept);
    }
    return b;
  }

  // Primitives of `c` in instance declaration order, one-hot indicators
  // shown as `I.f=v` / `I.f!=v`, and type constraints left implicit.
  std::vector<std::string> decode(const Conj& c) const {
    Conj types = implicit_constraints();
    std::vector<Primitive> prims;
    for (const auto& p : c.primitives())
      if (!entails(types, p) || types.empty()) prims.push_back(p);
    std::stable_sort(prims.begin(), prims.end(),
                     [this](const Primitive& a, const Primitive& b) { return instance_rank(a) < instance_rank(b); });
    // features whose indicator is fixed to one are decoded by that value
    std::set<std::pair<std::string, std::string>> decided;
    for (const auto& p : prims)
      if (auto ind = indicator_value(p); ind && ind->second == 1) decided.insert({ind->first.instance, ind->first.feature});
    std::vector<std::string> out;
    for (const auto& p : prims) {
      auto ind = indicator_value(p);
      if (!ind) {
        out.push_back(render(p));
        continue;
      }
      const VarId& v = ind->first;
      if (ind->second == 1) out.push_back(v.instance + "." + v.feature + "=" + *v.onehot);
      else if (!decided.count({v.instance, v.feature})) out.push_back(v.instance + "." + v.feature + "!=" + *v.onehot);
    }
    return out;
  }

  // ---- transcript ----

  int verbosity() const { return verbosity_; }
  void set_verbosity(int v) {
    verbosity_ = v;
    log_.push_back("verbosity " + std::to_string(v));
  }

  static std::string rule_text(const Rule& r) {
    std::string ante;
    for (std::size_t i = 0; i < r.antecedent_text.size(); ++i) ante += (i ? "," : "") + r.antecedent_text[i];
    if (ante.empty()) ante = "true";
    Rat dummy;
    std::string label = Rat::try_parse(r.label, dummy) ? "class " + r.label : r.label;
    return "IF " + ante + " THEN " + label + " [" + format_confidence(r.confidence) + "]";
  }

  std::string render_bundle(const AnswerBundle& b) const {
    if (b.empty()) return "No answer.\n";
    std::string out;
    for (std::size_t k = 0; k < b.answers.size(); ++k) {
      const Answer& a = b.answers[k];
      if (k) out += "--\n";
      out += "Answer constraint:\n";
      std::string line;
      for (std::size_t i = 0; i < a.text.size(); ++i) line += (i ? "," : "") + a.text[i];
      out += (line.empty() ? "true" : line) + "\n";
      if (verbosity_ >= 1)
        for (const auto& r : a.rules)
          out += "Rule satisfied by " + r.instance + (trees_.size() > 1 ? " in " + r.tree_id : "") + ":\n" + rule_text(r) + "\n";
      if (a.value) out += "Min value: " + format_value(*a.value) + "\n";
    }
    if (verbosity_ >= 2) out += "Query: " + b.query + "\n";
    return out;
  }

  // Replayable command log (model and schema lines carry inline JSON).
  const std::vector<std::string>& log() const { return log_; }
  void log_solve(const std::string& line) { log_.push_back(line); }

  static std::string instance_command(const InstanceDecl& d) {
    std::string s = "instance " + d.name + " label=" + quote_arg(d.label);
    if (d.minconf != Rat(0)) s += " minconf=" + d.minconf.str();
    for (const auto& [f, v] : d.features) s += " set." + f + "=" + quote_arg(value_str(v));
    if (!d.trees.empty()) {
      s += " trees=";
      for (std::size_t i = 0; i < d.trees.size(); ++i) s += (i ? "," : "") + d.trees[i];
    }
    return s;
  }

  static std::string quote_arg(const std::string& v) {
    bool plain = !v.empty();
    for (char c : v) plain = plain && !std::isspace(static_cast<unsigned char>(c)) && !std::strchr("\"'()", c);
    if (plain) return v;
    std::string out = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }

 private:
  int tree_index(const std::string& id) const {
    for (std::size_t i = 0; i < trees_.size(); ++i)
      if (trees_[i].id() == id) return static_cast<int>(i);
    return -1;
  }

  std::vector<const DecisionTree*> linked_trees(const InstanceDecl& d) const {
    std::vector<const DecisionTree*> out;
    for (const auto& t : trees_)
      if (d.trees.empty() || std::find(d.trees.begin(), d.trees.end(), t.id()) != d.trees.end()) out.push_back(&t);
    return out;
  }

  int instance_index(const std::string& name) const {
    for (std::size_t i = 0; i < instances_.size(); ++i)
      if (instances_[i].name == name) return static_cast<int>(i);
    return static_cast<int>(instances_.size());
  }

  int instance_rank(const Primitive& p) const {
    int best = static_cast<int>(instances_.size()) + 1;
    for (const auto& [v, a] : p.lhs.coeffs()) best = std::min(best, instance_index(v.instance));
    return best;
  }

  static std::optional<std::pair<VarId, int>> indicator_value(const Primitive& raw) {
    Primitive p = normalize(raw);
    if (p.rel != Relation::EQ || p.lhs.coeffs().size() != 1) return std::nullopt;
    const auto& [v, a] = *p.lhs.coeffs().begin();
    if (!v.onehot) return std::nullopt;
    Rat value = -p.lhs.constant() / a;
    if (value == Rat(1)) return std::make_pair(v, 1);
    if (value == Rat(0)) return std::make_pair(v, 0);
    return std::nullopt;
  }

  std::vector<Rule> rules_of(const Conj& c) const {
    std::vector<Rule> out;
    for (const auto& inst : instances_) {
      bool contrastive = false;
      for (const auto& other : instances_) {
        if (&other == &inst) break;
        contrastive = contrastive || other.label != inst.label;
      }
      for (const auto& p : c.provenance()) {
        if (p.kind != Provenance::Kind::Path || p.instance != inst.name) continue;
        Rule r;
        r.instance = inst.name;
        r.contrastive = contrastive;
        r.tree_id = p.tree_id;
        r.leaf_id = p.leaf_id;
        r.antecedent = minimal_form(Conj(p.path)).primitives();
        for (const auto& q : r.antecedent) {
          auto ind = indicator_value(q);
          if (!ind) r.antecedent_text.push_back(render(q));
          else
            r.antecedent_text.push_back(ind->first.instance + "." + ind->first.feature + (ind->second ? "=" : "!=") +
                                        *ind->first.onehot);
        }
        r.label = p.label;
        r.confidence = p.confidence;
        out.push_back(std::move(r));
      }
    }
    return out;
  }

  std::optional<FeatureSchema> schema_;
  std::vector<DecisionTree> trees_;
  std::vector<InstanceDecl> instances_;
  std::vector<std::pair<std::string, Conj>> constraints_;
  std::vector<std::string> log_;
  int verbosity_ = 1;
};

}  // namespace dtreason
