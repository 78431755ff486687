#pragma once

// Feature schemas, decision trees with linear splits, path extraction,
// prediction and labeled-data loading.
//
// Trees are written over abstract feature slots: VarId("", feature) for
// continuous/ordinal features and VarId("", feature, value) for one-hot
// indicators of nominal features. instantiate() renames slots to a concrete
// instance.

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dtreason/constraint.hpp"
#include "dtreason/errors.hpp"

namespace dtreason {

using json = nlohmann::json;

enum class FeatureKind { Continuous, Ordinal, Nominal };

inline const char* kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Ordinal: return "ordinal";
    case FeatureKind::Nominal: return "nominal";
  }
  return "?";
}

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  Rat lower, upper;                  // ordinal domain bounds
  std::vector<std::string> values;   // nominal domain
  std::optional<Rat> norm_min, norm_max;

  // Weight making the feature's range contribute at most one to a distance.
  Rat range_weight() const {
    if (!norm_min || !norm_max || *norm_max == *norm_min) return Rat(1);
    return Rat(1) / (*norm_max - *norm_min);
  }
  bool has_value(const std::string& v) const { return std::find(values.begin(), values.end(), v) != values.end(); }
};

inline VarId slot(const std::string& feature) { return VarId("", feature); }
inline VarId slot(const std::string& feature, const std::string& value) { return VarId("", feature, value); }

namespace detail {

inline Rat json_rat(const json& j, const std::string& what) {
  try {
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    if (j.is_number()) return Rat::parse(j.dump());
  } catch (const std::invalid_argument&) {
  }
  throw ValidationError(what + ": expected a number, got " + j.dump());
}

inline json rat_json(const Rat& r) {
  if (r.is_integer() && r.numerator().fits_slong_p()) return json(r.numerator().get_si());
  return json(r.str());
}

inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace detail

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Feature> features, std::optional<std::string> target = std::nullopt)
      : features_(std::move(features)), target_(std::move(target)) {
    validate();
  }

  const std::vector<Feature>& features() const { return features_; }
  const std::optional<std::string>& target() const { return target_; }
  std::size_t size() const { return features_.size(); }

  const Feature* find(const std::string& name) const {
    for (const auto& f : features_)
      if (f.name == name) return &f;
    return nullptr;
  }
  const Feature& at(const std::string& name) const {
    const Feature* f = find(name);
    if (!f) throw NameError("unknown feature '" + name + "'");
    return *f;
  }
  int index(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
      if (features_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  // Variable slots in schema order; nominal features expand to one slot per value.
  std::vector<VarId> slots() const {
    std::vector<VarId> out;
    for (const auto& f : features_) {
      if (f.kind == FeatureKind::Nominal) {
        for (const auto& v : f.values) out.push_back(slot(f.name, v));
      } else {
        out.push_back(slot(f.name));
      }
    }
    return out;
  }

  // True when `v` (instance part ignored) names a slot of this schema.
  bool has_slot(const VarId& v) const {
    const Feature* f = find(v.feature);
    if (!f) return false;
    if (f->kind == FeatureKind::Nominal) return v.onehot && f->has_value(*v.onehot);
    return !v.onehot;
  }

  void validate() const {
    std::set<std::string> names;
    for (const auto& f : features_) {
      if (f.name.empty()) throw ValidationError("feature with empty name");
      if (!names.insert(f.name).second) throw ValidationError("duplicate feature '" + f.name + "'");
      if (f.kind == FeatureKind::Nominal) {
        if (f.values.empty()) throw ValidationError("nominal feature '" + f.name + "' has no values");
        std::set<std::string> vs(f.values.begin(), f.values.end());
        if (vs.size() != f.values.size()) throw ValidationError("nominal feature '" + f.name + "' repeats a value");
      }
      if (f.kind == FeatureKind::Ordinal) {
        if (!f.lower.is_integer() || !f.upper.is_integer())
          throw ValidationError("ordinal feature '" + f.name + "' needs integer bounds");
        if (f.upper < f.lower) throw ValidationError("ordinal feature '" + f.name + "' has empty domain");
      }
      if (f.norm_min.has_value() != f.norm_max.has_value())
        throw ValidationError("feature '" + f.name + "' needs both min and max");
      if (f.norm_min && *f.norm_max < *f.norm_min)
        throw ValidationError("feature '" + f.name + "' has max below min");
    }
  }

  // {"features": [{"name", "kind", "lower"/"upper" | "values", "min", "max"}], "target"}
  static FeatureSchema from_json(const json& j) {
    if (!j.is_object() || !j.contains("features") || !j["features"].is_array())
      throw ValidationError("schema: expected an object with a 'features' array");
    std::vector<Feature> fs;
    for (const auto& jf : j["features"]) {
      Feature f;
      if (!jf.contains("name") || !jf["name"].is_string()) throw ValidationError("schema: feature without a name");
      f.name = jf["name"].get<std::string>();
      std::string kind = jf.value("kind", "continuous");
      if (kind == "continuous") f.kind = FeatureKind::Continuous;
      else if (kind == "ordinal") f.kind = FeatureKind::Ordinal;
      else if (kind == "nominal") f.kind = FeatureKind::Nominal;
      else throw ValidationError("schema: unknown kind '" + kind + "' for feature '" + f.name + "'");
      if (f.kind == FeatureKind::Ordinal) {
        if (!jf.contains("lower") || !jf.contains("upper"))
          throw ValidationError("schema: ordinal feature '" + f.name + "' needs lower and upper");
        f.lower = detail::json_rat(jf["lower"], f.name + ".lower");
        f.upper = detail::json_rat(jf["upper"], f.name + ".upper");
      }
      if (f.kind == FeatureKind::Nominal) {
        if (!jf.contains("values") || !jf["values"].is_array())
          throw ValidationError("schema: nominal feature '" + f.name + "' needs values");
        for (const auto& v : jf["values"]) f.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
      if (jf.contains("min")) f.norm_min = detail::json_rat(jf["min"], f.name + ".min");
      if (jf.contains("max")) f.norm_max = detail::json_rat(jf["max"], f.name + ".max");
      if (f.kind == FeatureKind::Ordinal && !f.norm_min) {
        f.norm_min = f.lower;
        f.norm_max = f.upper;
      }
      fs.push_back(std::move(f));
    }
    std::optional<std::string> target;
    if (j.contains("target")) target = j["target"].get<std::string>();
    return FeatureSchema(std::move(fs), std::move(target));
  }

  static FeatureSchema parse(const std::string& text) {
    try {
      return from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("schema: ") + e.what());
    }
  }
  static FeatureSchema load(const std::string& path) { return parse(detail::read_file(path)); }

  json to_json() const {
    json fs = json::array();
    for (const auto& f : features_) {
      json jf{{"name", f.name}, {"kind", kind_name(f.kind)}};
      if (f.kind == FeatureKind::Ordinal) {
        jf["lower"] = detail::rat_json(f.lower);
        jf["upper"] = detail::rat_json(f.upper);
      }
      if (f.kind == FeatureKind::Nominal) jf["values"] = f.values;
      if (f.norm_min) {
        jf["min"] = detail::rat_json(*f.norm_min);
        jf["max"] = detail::rat_json(*f.norm_max);
      }
      fs.push_back(jf);
    }
    json j{{"features", fs}};
    if (target_) j["target"] = *target_;
    return j;
  }

  // Ordinal bounds from the data are not inferred; continuous features get
  // plain reals. Convenience for tests and the synthetic scenarios.
  static FeatureSchema continuous(const std::vector<std::string>& names) {
    std::vector<Feature> fs;
    for (const auto& n : names) fs.push_back(Feature{n, FeatureKind::Continuous, {}, {}, {}, {}, {}});
    return FeatureSchema(std::move(fs));
  }

 private:
  std::vector<Feature> features_;
  std::optional<std::string> target_;
};

// ---- data rows ----

using FeatureValue = std::variant<Rat, std::string>;
using Row = std::map<std::string, FeatureValue>;

// Slot assignment of a row; nominal values become 0/1 indicators.
inline Assignment slot_assignment(const FeatureSchema& schema, const Row& row) {
  Assignment a;
  for (const auto& f : schema.features()) {
    auto it = row.find(f.name);
    if (it == row.end()) continue;
    if (f.kind == FeatureKind::Nominal) {
      const auto* s = std::get_if<std::string>(&it->second);
      if (!s || !f.has_value(*s)) throw ValidationError("feature '" + f.name + "' has no value matching the schema");
      for (const auto& v : f.values) a.emplace(slot(f.name, v), Rat(v == *s ? 1 : 0));
    } else {
      const auto* r = std::get_if<Rat>(&it->second);
      if (!r) throw ValidationError("feature '" + f.name + "' expects a number");
      a.emplace(slot(f.name), *r);
    }
  }
  return a;
}

inline std::string value_str(const FeatureValue& v) {
  if (const auto* r = std::get_if<Rat>(&v)) return r->str();
  return std::get<std::string>(v);
}

struct LabeledData {
  std::vector<Row> rows;
  std::vector<std::string> labels;

  std::size_t size() const { return rows.size(); }
};

inline FeatureValue parse_value(const Feature& f, const std::string& text) {
  std::string t = detail::trim(text);
  if (f.kind == FeatureKind::Nominal) {
    if (!f.has_value(t)) throw ValidationError("value '" + t + "' is not in the domain of '" + f.name + "'");
    return t;
  }
  Rat r;
  if (!Rat::try_parse(t, r)) throw ValidationError("feature '" + f.name + "': not a number: '" + t + "'");
  if (f.kind == FeatureKind::Ordinal && !r.is_integer())
    throw ValidationError("ordinal feature '" + f.name + "' has non-integer value " + t);
  return r;
}

// Delimiter-separated text with a header row. The label column is the
// schema's target, else "label", else the last column.
inline LabeledData parse_labeled_data(const std::string& text, const FeatureSchema& schema, char delim = ',') {
  std::istringstream in(text);
  std::string line;
  auto split = [delim](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, delim)) cells.push_back(detail::trim(cell));
    if (!l.empty() && l.back() == delim) cells.emplace_back();
    return cells;
  };
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw ValidationError("data: missing header row");
  int label_col = -1;
  std::string target = schema.target().value_or("label");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == target) label_col = static_cast<int>(i);
  if (label_col < 0) {
    if (schema.target()) throw ValidationError("data: no column named '" + target + "'");
    label_col = static_cast<int>(header.size()) - 1;
  }
  std::vector<int> feature_col(schema.size(), -1);
  for (std::size_t k = 0; k < schema.size(); ++k) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == schema.features()[k].name) feature_col[k] = static_cast<int>(i);
    if (feature_col[k] < 0) throw ValidationError("data: no column for feature '" + schema.features()[k].name + "'");
  }
  LabeledData out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw ValidationError("data line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " cells, got " + std::to_string(cells.size()));
    Row r;
    for (std::size_t k = 0; k < schema.size(); ++k) {
      try {
        r.emplace(schema.features()[k].name, parse_value(schema.features()[k], cells[feature_col[k]]));
      } catch (const ValidationError& e) {
        throw ValidationError("data line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    out.rows.push_back(std::move(r));
    out.labels.push_back(cells[label_col]);
  }
  return out;
}

inline LabeledData load_labeled_data(const std::string& path, const FeatureSchema& schema, char delim = ',') {
  return parse_labeled_data(detail::read_file(path), schema, delim);
}

inline std::string to_csv(const LabeledData& data, const FeatureSchema& schema, const std::string& label_name = "label") {
  std::string out;
  for (const auto& f : schema.features()) out += f.name + ",";
  out += label_name + "\n";
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    for (const auto& f : schema.features()) out += value_str(data.rows[i].at(f.name)) + ",";
    out += data.labels[i] + "\n";
  }
  return out;
}

// ---- trees ----

struct TreeNode {
  int id = 0;
  // Internal node: `split` holds the condition sent to the left child. Slots
  // only; rel is one of LE, LT, GE, GT, EQ (EQ only for indicator splits).
  std::optional<Primitive> split;
  int left = -1, right = -1;
  std::vector<Rat> counts;  // leaf class counts aligned with the tree's classes

  bool is_leaf() const { return !split.has_value(); }
};

// Negation of a split condition (the right child's constraint).
inline Primitive complement(const Primitive& split) {
  if (split.rel == Relation::EQ) {
    // indicator = c  becomes  indicator = 1 - c
    const auto& [v, a] = *split.lhs.coeffs().begin();
    Rat value = -split.lhs.constant() / a;
    return Primitive(LinTerm::var(v), Relation::EQ, LinTerm(Rat(1) - value));
  }
  Relation neg = split.rel == Relation::LE   ? Relation::GT
                 : split.rel == Relation::LT ? Relation::GE
                 : split.rel == Relation::GE ? Relation::LT
                                             : Relation::LE;
  return Primitive(split.lhs, neg);
}

struct PathFact {
  std::string tree_id;
  int leaf_id = -1;
  std::vector<Primitive> primitives;  // root to leaf, over slots
  std::string label;
  Rat confidence;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::string id, std::vector<std::string> classes, std::vector<TreeNode> nodes, int root = 0)
      : id_(std::move(id)), classes_(std::move(classes)), nodes_(std::move(nodes)), root_(root) {
    validate();
  }

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int root() const { return root_; }

  const TreeNode& node(int id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw ValidationError("tree " + id_ + ": no node " + std::to_string(id));
    return nodes_[it->second];
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  std::size_t depth() const { return depth_from(root_); }

  // Label of the majority class (first in class order on ties) and its share.
  std::pair<std::string, Rat> leaf_prediction(const TreeNode& leaf) const {
    Rat total, best;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < leaf.counts.size(); ++k) {
      total += leaf.counts[k];
      if (leaf.counts[k] > best) {
        best = leaf.counts[k];
        arg = k;
      }
    }
    return {classes_[arg], best / total};
  }

  void validate() const {
    if (classes_.empty()) throw ValidationError("tree " + id_ + ": no classes");
    by_id_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!by_id_.emplace(nodes_[i].id, i).second)
        throw ValidationError("tree " + id_ + ": duplicate node id " + std::to_string(nodes_[i].id));
    if (!by_id_.count(root_)) throw ValidationError("tree " + id_ + ": missing root node");
    std::set<int> seen;
    std::vector<int> stack{root_};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) throw ValidationError("tree " + id_ + ": node " + std::to_string(id) + " reached twice");
      const TreeNode& n = node(id);
      if (n.is_leaf()) {
        if (n.counts.size() != classes_.size())
          throw ValidationError("tree " + id_ + ": leaf " + std::to_string(id) + " counts do not match classes");
        Rat total;
        for (const auto& c : n.counts) {
          if (c.sign() < 0) throw ValidationError("tree " + id_ + ": negative count at leaf " + std::to_string(id));
          total += c;
        }
        if (total.sign() <= 0) throw ValidationError("tree " + id_ + ": empty leaf " + std::to_string(id));
        continue;
      }
      const Primitive& s = *n.split;
      if (s.lhs.is_constant()) throw ValidationError("tree " + id_ + ": constant split at node " + std::to_string(id));
      if (s.rel == Relation::EQ) {
        const auto& cs = s.lhs.coeffs();
        Rat value = cs.size() == 1 ? -s.lhs.constant() / cs.begin()->second : Rat(-1);
        if (cs.size() != 1 || !cs.begin()->first.onehot || (value != Rat(0) && value != Rat(1)))
          throw ValidationError("tree " + id_ + ": equality split at node " + std::to_string(id) + " must test one indicator");
      }
      if (n.left < 0 || n.right < 0) throw ValidationError("tree " + id_ + ": node " + std::to_string(id) + " lacks a child");
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
    if (seen.size() != nodes_.size()) throw ValidationError("tree " + id_ + ": unreachable nodes");
  }

  // Every split mentions only slots of `schema`.
  void check_schema(const FeatureSchema& schema) const {
    for (const auto& n : nodes_) {
      if (n.is_leaf()) continue;
      for (const auto& [v, a] : n.split->lhs.coeffs())
        if (!schema.has_slot(v)) throw ValidationError("tree " + id_ + ": split uses unknown feature slot " + v.str());
    }
  }

  // One fact per leaf, leaves in left-to-right order.
  std::vector<PathFact> extract_paths() const {
    std::vector<PathFact> out;
    std::vector<Primitive> prefix;
    walk(root_, prefix, out);
    return out;
  }

  const TreeNode& leaf_for(const Assignment& slots) const {
    const TreeNode* n = &node(root_);
    while (!n->is_leaf()) n = &node(n->split->evaluate(slots) ? n->left : n->right);
    return *n;
  }

  std::pair<std::string, Rat> predict(const Assignment& slots) const { return leaf_prediction(leaf_for(slots)); }
  std::pair<std::string, Rat> predict(const FeatureSchema& schema, const Row& row) const {
    return predict(slot_assignment(schema, row));
  }

  static DecisionTree from_json(const json& j);
  static DecisionTree parse(const std::string& text) {
    try {
      return from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("tree: ") + e.what());
    }
  }
  static DecisionTree load(const std::string& path) { return parse(detail::read_file(path)); }
  json to_json() const;

 private:
  std::size_t depth_from(int id) const {
    const TreeNode& n = node(id);
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  void walk(int id, std::vector<Primitive>& prefix, std::vector<PathFact>& out) const {
    const TreeNode& n = node(id);
    if (n.is_leaf()) {
      auto [label, conf] = leaf_prediction(n);
      out.push_back(PathFact{id_, id, prefix, label, conf});
      return;
    }
    prefix.push_back(*n.split);
    walk(n.left, prefix, out);
    prefix.back() = complement(*n.split);
    walk(n.right, prefix, out);
    prefix.pop_back();
  }

  std::string id_;
  std::vector<std::string> classes_;
  std::vector<TreeNode> nodes_;
  int root_ = 0;
  mutable std::map<int, std::size_t> by_id_;
};

namespace detail {

inline VarId parse_slot_key(const std::string& key) {
  auto lb = key.find('[');
  if (lb == std::string::npos) return slot(key);
  if (key.back() != ']') throw ValidationError("tree: malformed coefficient key '" + key + "'");
  return slot(key.substr(0, lb), key.substr(lb + 1, key.size() - lb - 2));
}

inline std::string slot_key(const VarId& v) { return v.onehot ? v.feature + "[" + *v.onehot + "]" : v.feature; }

inline Relation parse_op(const std::string& op) {
  if (op == "<=") return Relation::LE;
  if (op == "<") return Relation::LT;
  if (op == ">=") return Relation::GE;
  if (op == ">") return Relation::GT;
  if (op == "=" || op == "==") return Relation::EQ;
  throw ValidationError("tree: unknown split operator '" + op + "'");
}

}  // namespace detail

// Node list format:
//   {"tree_id": "DT1", "classes": ["0", "1"], "root": 0,
//    "nodes": [{"id": 0, "split": {"coeffs": {"x1": 1, "x2": 1}, "op": "<", "threshold": 5},
//               "left": 1, "right": 2},
//              {"id": 1, "counts": [10, 0]}, ...]}
// Nominal splits: {"feature": "sex", "op": "=" | "!=", "value": "Female"}.
inline DecisionTree DecisionTree::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("tree: expected an object");
  std::string id = j.value("tree_id", std::string("DT"));
  std::vector<std::string> classes;
  if (!j.contains("classes") || !j["classes"].is_array()) throw ValidationError("tree: missing 'classes'");
  for (const auto& c : j["classes"]) classes.push_back(c.is_string() ? c.get<std::string>() : c.dump());
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw ValidationError("tree: missing 'nodes'");
  std::vector<TreeNode> nodes;
  for (const auto& jn : j["nodes"]) {
    TreeNode n;
    if (!jn.contains("id")) throw ValidationError("tree: node without id");
    n.id = jn["id"].get<int>();
    if (jn.contains("split")) {
      const json& s = jn["split"];
      std::string op = s.value("op", std::string("<="));
      if (s.contains("feature")) {
        if (op != "=" && op != "==" && op != "!=") throw ValidationError("tree: nominal split needs '=' or '!='");
        std::string value = s["value"].is_string() ? s["value"].get<std::string>() : s["value"].dump();
        VarId v = slot(s["feature"].get<std::string>(), value);
        n.split = Primitive(LinTerm::var(v), Relation::EQ, LinTerm(Rat(op == "!=" ? 0 : 1)));
      } else {
        if (!s.contains("coeffs") || !s["coeffs"].is_object()) throw ValidationError("tree: split without coeffs");
        LinTerm t;
        for (const auto& [key, val] : s["coeffs"].items()) t.add(detail::parse_slot_key(key), detail::json_rat(val, key));
        if (op == "!=") throw ValidationError("tree: '!=' is only allowed on nominal splits");
        Relation rel = detail::parse_op(op);
        Rat threshold = detail::json_rat(s.value("threshold", json(0)), "threshold");
        n.split = Primitive(t, rel, LinTerm(threshold));
      }
      n.left = jn.value("left", -1);
      n.right = jn.value("right", -1);
    } else {
      if (!jn.contains("counts") || !jn["counts"].is_array()) throw ValidationError("tree: node " + std::to_string(n.id) + " is neither split nor leaf");
      for (const auto& c : jn["counts"]) n.counts.push_back(detail::json_rat(c, "count"));
    }
    nodes.push_back(std::move(n));
  }
  int root = j.value("root", nodes.empty() ? 0 : nodes.front().id);
  return DecisionTree(std::move(id), std::move(classes), std::move(nodes), root);
}

inline json DecisionTree::to_json() const {
  json jn = json::array();
  for (const auto& n : nodes_) {
    json o{{"id", n.id}};
    if (n.is_leaf()) {
      json cs = json::array();
      for (const auto& c : n.counts) cs.push_back(detail::rat_json(c));
      o["counts"] = cs;
    } else {
      const Primitive& s = *n.split;
      const auto& coeffs = s.lhs.coeffs();
      if (s.rel == Relation::EQ) {
        const auto& [v, a] = *coeffs.begin();
        Rat value = -s.lhs.constant() / a;
        o["split"] = json{{"feature", v.feature}, {"op", value == Rat(1) ? "=" : "!="}, {"value", *v.onehot}};
      } else {
        json c = json::object();
        for (const auto& [v, a] : coeffs) c[detail::slot_key(v)] = detail::rat_json(a);
        o["split"] = json{{"coeffs", c}, {"op", relation_symbol(s.rel)}, {"threshold", detail::rat_json(-s.lhs.constant())}};
      }
      o["left"] = n.left;
      o["right"] = n.right;
    }
    jn.push_back(o);
  }
  return json{{"tree_id", id_}, {"classes", classes_}, {"root", root_}, {"nodes", jn}};
}

// Renames slots to `inst` and tags the result with the path's provenance.
inline Conj instantiate(const PathFact& pf, const std::string& inst) {
  Conj c;
  std::vector<Primitive> renamed;
  for (const auto& p : pf.primitives) {
    LinTerm t(p.lhs.constant());
    for (const auto& [v, a] : p.lhs.coeffs()) t.add(v.onehot ? VarId(inst, v.feature, *v.onehot) : VarId(inst, v.feature), a);
    renamed.emplace_back(t, p.rel);
  }
  for (const auto& p : renamed) c.add(p);
  Provenance prov;
  prov.kind = Provenance::Kind::Path;
  prov.instance = inst;
  prov.tree_id = pf.tree_id;
  prov.leaf_id = pf.leaf_id;
  prov.label = pf.label;
  prov.confidence = pf.confidence;
  prov.path = std::move(renamed);
  c.add_provenance(std::move(prov));
  return c;
}

}  // namespace dtreason
