#pragma once

// Per-instance evaluation loop: factual query for each tested row, then one
// contrastive and one minimal-contrastive query per other class.

#include <random>
#include <sstream>

#include "dtreason/metrics.hpp"
#include "dtreason/session.hpp"

namespace dtreason {

// Two bivariate normal classes "0" and "1" over feature1/feature2, rounded
// to integers. Class 0 sits at high feature1, class 1 at low feature1 or low
// feature2.
inline LabeledData two_gaussians(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  LabeledData d;
  auto draw = [&](double mx, double sx, double my, double sy, const std::string& label) {
    Row r;
    r["feature1"] = Rat(static_cast<long>(std::lround(mx + sx * n01(rng))));
    r["feature2"] = Rat(static_cast<long>(std::lround(my + sy * n01(rng))));
    d.rows.push_back(std::move(r));
    d.labels.push_back(label);
  };
  for (int i = 0; i < per_class; ++i) {
    draw(1250, 120, 600, 250, "0");
    if (i % 2) draw(700, 170, 500, 250, "1");
    else draw(900, 200, -400, 180, "1");
  }
  return d;
}

inline FeatureSchema two_gaussians_schema(const LabeledData& d) {
  Rat lo[2], hi[2];
  for (std::size_t i = 0; i < d.rows.size(); ++i)
    for (int k = 0; k < 2; ++k) {
      Rat v = std::get<Rat>(d.rows[i].at(k ? "feature2" : "feature1"));
      if (i == 0 || v < lo[k]) lo[k] = v;
      if (i == 0 || v > hi[k]) hi[k] = v;
    }
  json j{{"features", json::array()}};
  for (int k = 0; k < 2; ++k)
    j["features"].push_back(
        {{"name", k ? "feature2" : "feature1"}, {"kind", "continuous"}, {"min", lo[k].str()}, {"max", hi[k].str()}});
  return FeatureSchema::parse(j.dump());
}

struct EvalSettings {
  Norm norm = Norm::L1;
  Rat eps;
  Rat minconf_f;
  Rat minconf_ce;
  std::size_t instances = 10;
};

struct EvalReport {
  std::size_t n = 0;  // tested rows
  std::size_t s = 0;  // rows with a factual answer
  double accuracy = 0;
  // averages over the s rows
  double l_f = 0, l_c = 0, n_c = 0, n_ce = 0, d_ce = 0;
  double dim_higher = 0;  // fraction of minimal CEs that are not points
  std::size_t ce_total = 0;

  double ratio() const { return n ? static_cast<double>(s) / static_cast<double>(n) : 0; }
};

inline EvalReport evaluate(const std::vector<DecisionTree>& trees, const FeatureSchema& schema,
                           const LabeledData& data, const EvalSettings& st) {
  if (trees.empty()) throw ValidationError("evaluate: no model");
  EvalReport rep;
  std::set<std::string> classes;
  for (const auto& t : trees) classes.insert(t.classes().begin(), t.classes().end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += trees[0].predict(schema, data.rows[i]).first == data.labels[i];
  rep.accuracy = data.size() ? static_cast<double>(correct) / static_cast<double>(data.size()) : 0;

  double l_f = 0, l_c = 0, n_c = 0, d_sum = 0, higher = 0;
  std::size_t ce = 0;
  for (std::size_t i = 0; i < std::min(st.instances, data.size()); ++i) {
    ++rep.n;
    Session s;
    s.set_schema(schema);
    for (const auto& t : trees) s.add_tree(t);
    InstanceDecl f{"F", data.labels[i], st.minconf_f, data.rows[i], {}};
    s.declare_instance(f);
    AnswerBundle fb = s.solveopt();
    if (fb.empty()) continue;
    ++rep.s;
    l_f += metrics(fb).l_f;
    double lc = 0;
    int nc = 0;
    for (const auto& label : classes) {
      if (label == f.label) continue;
      s.reset(true);
      s.declare_instance(f);
      s.declare_instance({"CE", label, st.minconf_ce, {}, {}});
      SolveOptions opt;
      opt.project = {"CE"};
      BundleMetrics cm = metrics(s.solveopt(opt));
      lc += cm.l_c * cm.n_c;
      nc += cm.n_c;
      opt.minimize = s.distance(st.norm, "F", "CE");
      opt.eps = st.eps;
      BundleMetrics mm = metrics(s.solveopt(opt));
      ce += static_cast<std::size_t>(mm.n_ce);
      for (const auto& v : mm.d_ce) d_sum += v.to_double();
      for (bool p : mm.ce_point) higher += p ? 0 : 1;
    }
    n_c += nc;
    if (nc) l_c += lc / nc;
  }
  rep.ce_total = ce;
  if (rep.s) {
    double s = static_cast<double>(rep.s);
    rep.l_f = l_f / s;
    rep.l_c = l_c / s;
    rep.n_c = n_c / s;
    rep.n_ce = static_cast<double>(ce) / s;
  }
  if (ce) {
    rep.d_ce = d_sum / static_cast<double>(ce);
    rep.dim_higher = higher / static_cast<double>(ce);
  }
  return rep;
}

inline json report_json(const EvalReport& r) {
  return {{"N", r.n},   {"S", r.s},     {"S/N", r.ratio()}, {"acc", r.accuracy}, {"l_F", r.l_f},
          {"l_C", r.l_c}, {"N_C", r.n_c}, {"N_CE", r.n_ce},   {"d_CE", r.d_ce},     {"dim_CE", r.dim_higher}};
}

inline std::string report_row(const EvalReport& r) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(3);
  o << "N=" << r.n << " S/N=" << r.ratio() << " acc=" << r.accuracy << " l_F=" << r.l_f << " l_C=" << r.l_c
    << " N_C=" << r.n_c << " N_CE=" << r.n_ce << " d_CE=" << r.d_ce << " dim_CE=" << r.dim_higher;
  return o.str();
}

}  // namespace dtreason
