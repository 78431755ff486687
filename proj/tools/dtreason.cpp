// dtreason: train trees, run reasoning sessions, evaluate, sample data, serve
// the HTTP API.
//
// Exit codes: 0 success (also "No answer."), 2 usage, 3 input parse, 4 engine.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <dtreason/evaluation.hpp>
#include <dtreason/http.hpp>
#include <dtreason/learner.hpp>
#include <dtreason/script.hpp>

using namespace dtreason;

namespace {

constexpr int kUsage = 2, kParse = 3, kEngine = 4;

struct Config {
  std::vector<std::string> models;
  std::string schema, data, script, out, center;
  std::string eps = "0", minconf_f = "0", minconf_ce = "0", radius = "0.1";
  std::string norm = "l1", format = "text", host = "127.0.0.1", tree_id = "DT";
  std::uint64_t seed = 0;
  int depth = 3, instances = 10, n = 1000, port = 8080;
};

// Engine failures on input the user supplied as files count as parse errors.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rat rat_flag(const std::string& name, const std::string& v, bool unit = false) {
  Rat r;
  if (!Rat::try_parse(v, r) || r.sign() < 0 || (unit && r > Rat(1)))
    throw CLI::ValidationError("--" + name, "expected a " + std::string(unit ? "value in [0, 1]" : "non-negative number") +
                                                ", got '" + v + "'");
  return r;
}

template <class F>
auto load(F f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw InputError(e.what());
  }
}

FeatureSchema schema_of(const Config& c) {
  return load([&] { return FeatureSchema::load(c.schema); });
}

std::vector<DecisionTree> trees_of(const Config& c) {
  std::vector<DecisionTree> out;
  for (const auto& m : c.models) out.push_back(load([&] { return DecisionTree::load(m); }));
  return out;
}

LabeledData data_of(const Config& c, const FeatureSchema& s) {
  return load([&] { return parse_labeled_data(detail::read_file(c.data), s); });
}

// Output stream for --out, else stdout.
struct Sink {
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw CLI::ValidationError("--out", "cannot write '" + path + "'");
    }
  }
  std::ostream& get() { return file.is_open() ? file : std::cout; }
  std::ofstream file;
};

void write_csv(std::ostream& o, const FeatureSchema& s, const std::vector<Row>& rows, const std::vector<std::string>& labels) {
  for (const auto& f : s.features()) o << f.name << ",";
  o << "label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& f : s.features()) o << value_str(rows[i].at(f.name)) << ",";
    o << labels[i] << "\n";
  }
}

int cmd_train(const Config& c) {
  FeatureSchema s = schema_of(c);
  LabeledData d = data_of(c, s);
  DecisionTree t = learn_tree(d, s, c.depth, c.tree_id);
  Sink out(c.out);
  out.get() << t.to_json().dump(2) << "\n";
  std::ostringstream acc;
  acc.setf(std::ios::fixed);
  acc.precision(4);
  acc << training_accuracy(t, s, d);
  std::cerr << "trained " << t.id() << ": depth " << t.depth() << ", " << t.extract_paths().size()
            << " leaves, training accuracy " << acc.str() << "\n";
  return 0;
}

int cmd_session(const Config& c) {
  Session s;
  for (auto& t : trees_of(c)) s.add_tree(std::move(t));
  if (!c.schema.empty()) s.set_schema(schema_of(c));
  Sink sink(c.out);
  auto fmt = c.format == "structured" ? ScriptRunner::Format::Structured : ScriptRunner::Format::Text;
  if (!c.script.empty()) {
    std::ifstream in(c.script);
    if (!in) throw CLI::ValidationError("--script", "cannot read '" + c.script + "'");
    ScriptRunner r(s, sink.get(), fmt, std::filesystem::path(c.script).parent_path());
    try {
      r.run(in);
    } catch (const ScriptError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return e.kind == ScriptError::Kind::Parse ? kParse : kEngine;
    }
    return 0;
  }
  // Interactive: errors are reported and the session goes on.
  ScriptRunner r(s, sink.get(), fmt);
  std::string line;
  int n = 0;
  while (std::getline(std::cin, line)) {
    try {
      r.execute(line, ++n);
    } catch (const ScriptError& e) {
      std::cerr << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

int cmd_eval(const Config& c) {
  EvalSettings st;
  st.norm = c.norm == "linf" ? Norm::Linf : Norm::L1;
  st.eps = rat_flag("eps", c.eps);
  st.minconf_f = rat_flag("minconf-f", c.minconf_f, true);
  st.minconf_ce = rat_flag("minconf-ce", c.minconf_ce, true);
  st.instances = static_cast<std::size_t>(c.instances);
  FeatureSchema s = schema_of(c);
  LabeledData d = data_of(c, s);
  std::vector<DecisionTree> trees = trees_of(c);
  if (trees.empty()) trees.push_back(learn_tree(d, s, c.depth, c.tree_id));
  EvalReport rep = evaluate(trees, s, d, st);
  Sink out(c.out);
  if (c.format == "structured") out.get() << report_json(rep).dump() << "\n";
  else out.get() << report_row(rep) << "\n";
  return 0;
}

int cmd_sample(const Config& c) {
  Sink out(c.out);
  if (c.center.empty()) {
    LabeledData d = two_gaussians(c.n, c.seed);
    write_csv(out.get(), two_gaussians_schema(d), d.rows, d.labels);
    return 0;
  }
  // neighborhood of --center, labelled by the first --model
  FeatureSchema s = schema_of(c);
  std::vector<DecisionTree> trees = trees_of(c);
  if (trees.empty()) throw CLI::ValidationError("--model", "neighborhood sampling labels rows with a model");
  auto vals = detail::split_list(c.center);
  if (vals.size() != s.size()) throw InputError("--center needs one value per schema feature");
  Row center;
  for (std::size_t k = 0; k < vals.size(); ++k)
    center[s.features()[k].name] = load([&] { return parse_value(s.features()[k], vals[k]); });
  std::vector<Row> rows = sample_neighborhood(center, s, c.n, rat_flag("radius", c.radius), c.seed);
  std::vector<std::string> labels;
  for (const auto& r : rows) labels.push_back(trees[0].predict(s, r).first);
  write_csv(out.get(), s, rows, labels);
  return 0;
}

int cmd_serve(const Config& c) {
  Router router;
  httplib::Server srv;
  mount(srv, router);
  std::cerr << "listening on http://" << c.host << ":" << c.port << "\n";
  if (!srv.listen(c.host, c.port)) {
    std::cerr << "error: cannot listen on " << c.host << ":" << c.port << "\n";
    return kEngine;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Reasoning about decision trees with linear constraints"};
  app.require_subcommand(1);
  auto models = [&](CLI::App* a) { a->add_option("--model", c.models, "Tree JSON (repeatable)")->check(CLI::ExistingFile); };
  auto schema = [&](CLI::App* a, bool required) {
    auto o = a->add_option("--schema", c.schema, "Feature schema JSON")->check(CLI::ExistingFile);
    if (required) o->required();
  };
  auto out = [&](CLI::App* a) { a->add_option("--out", c.out, "Write output here instead of stdout"); };
  auto format = [&](CLI::App* a) {
    a->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
  };

  auto* train = app.add_subcommand("train", "Learn a tree from labelled data");
  schema(train, true);
  train->add_option("--data", c.data, "CSV with a header row")->required()->check(CLI::ExistingFile);
  train->add_option("--depth", c.depth, "Maximum depth")->check(CLI::NonNegativeNumber);
  train->add_option("--tree-id", c.tree_id, "Identifier of the learned tree");
  out(train);

  auto* session = app.add_subcommand("session", "Run a session script, or read commands from stdin");
  models(session);
  schema(session, false);
  session->add_option("--script", c.script, "Session script")->check(CLI::ExistingFile);
  format(session);
  out(session);

  auto* eval = app.add_subcommand("eval", "Per-instance explanation metrics");
  models(eval);
  schema(eval, true);
  eval->add_option("--data", c.data, "Labelled CSV; the first --instances rows are explained")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--depth", c.depth, "Depth of the tree learned when no --model is given")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--eps", c.eps, "Margin for strict inequalities");
  eval->add_option("--minconf-f", c.minconf_f, "Minimum confidence of factual rules");
  eval->add_option("--minconf-ce", c.minconf_ce, "Minimum confidence of contrastive rules");
  eval->add_option("--norm", c.norm, "Distance")->check(CLI::IsMember({"l1", "linf"}));
  eval->add_option("--instances", c.instances, "Rows to explain")->check(CLI::PositiveNumber);
  format(eval);
  out(eval);

  auto* sample = app.add_subcommand("sample", "Two-Gaussian synthetic data, or a labelled neighborhood of --center");
  models(sample);
  schema(sample, false);
  sample->add_option("--n", c.n, "Rows per class, or neighborhood size")->check(CLI::PositiveNumber);
  sample->add_option("--seed", c.seed, "Random seed");
  sample->add_option("--center", c.center, "Comma-separated feature values");
  sample->add_option("--radius", c.radius, "Neighborhood half-width as a fraction of each feature range");
  out(sample);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", c.host, "Bind address");
  serve->add_option("--port", c.port, "Port")->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
    if (*train) return cmd_train(c);
    if (*session) return cmd_session(c);
    if (*eval) return cmd_eval(c);
    if (*sample) return cmd_sample(c);
    return cmd_serve(c);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEngine;
  }
}
