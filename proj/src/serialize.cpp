#include "kcbslab/serialize.hpp"

#include <optional>
#include <sstream>

namespace kcbs {

namespace {

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

json vec_to_json(const Vec3& v) {
  return json::array(
      {complex_to_json(v(0)), complex_to_json(v(1)), complex_to_json(v(2))});
}

Vec3 vec_from_json(const json& j) {
  return Vec3(complex_from_json(j.at(0)), complex_from_json(j.at(1)),
              complex_from_json(j.at(2)));
}

}  // namespace

const char* order_name(Order order) {
  return order == Order::forward ? "forward" : "reverse";
}

const char* method_name(ErrorMethod method) {
  switch (method) {
    case ErrorMethod::poisson: return "poisson-propagation";
    case ErrorMethod::sample_std: return "sample-std";
    case ErrorMethod::combined: return "combined";
  }
  return "unknown";
}

json to_json(const StateVector& v) { return vec_to_json(v.amplitudes()); }

StateVector state_from_json(const json& j) {
  return StateVector(vec_from_json(j));
}

json to_json(const Pentagram& p) {
  json vectors = json::array();
  for (const Question& q : p.questions) {
    vectors.push_back(to_json(q.eigenvector()));
  }
  return json{{"vectors", vectors},
              {"state", to_json(p.test_state)},
              {"max_adjacent_overlap", p.max_adjacent_overlap()}};
}

Pentagram pentagram_from_json(const json& j) {
  const json& vectors = j.at("vectors");
  std::array<std::optional<Question>, 5> qs;
  for (int i = 0; i < 5; ++i) {
    qs[i] = Question(state_from_json(vectors.at(i)), i);
  }
  return Pentagram{{*qs[0], *qs[1], *qs[2], *qs[3], *qs[4]},
                   state_from_json(j.at("state"))};
}

json to_json(const JointDistribution& jd) {
  return json{{"first", jd.first_index}, {"second", jd.second_index},
              {"p_yy", jd.p_yy},         {"p_yn", jd.p_yn},
              {"p_ny", jd.p_ny},         {"p_nn", jd.p_nn},
              {"correlation", jd.correlation()}};
}

json to_json(const BoundReport& r) {
  return json{{"bound", r.bound_value},
              {"attaining_mask", r.attaining_mask},
              {"attaining_assignment", r.attaining_assignment},
              {"search_space_size", r.search_space_size}};
}

json to_json(const KcbsValue& v) {
  return json{{"edge_terms", v.edge_terms},
              {"value", v.value},
              {"exclusivity_warning", v.exclusivity_warning},
              {"max_adjacent_overlap", v.max_adjacent_overlap}};
}

json to_json(const OptimizationResult& r) {
  json vectors = json::array();
  for (const auto& v : r.vectors) {
    json vec = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      vec.push_back(complex_to_json(v(i)));
    }
    vectors.push_back(vec);
  }
  json state = json::array();
  for (Eigen::Index i = 0; i < r.state.size(); ++i) {
    state.push_back(complex_to_json(r.state(i)));
  }
  return json{{"target", r.target == Target::wright ? "wright" : "kcbs"},
              {"best_value", r.best_value},
              {"vectors", vectors},
              {"state", state},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"converged", r.converged}};
}

json to_json(const NoiseModel& n) {
  return json{{"visibility", n.visibility},
              {"exclusivity_leakage_rad", n.exclusivity_leakage_rad},
              {"drift_sigma_rad", n.drift_sigma_rad},
              {"contrast_curvature", n.contrast_curvature}};
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel n;
  if (j.contains("visibility")) {
    const json& v = j.at("visibility");
    if (v.is_number()) {
      n.visibility.fill(v.get<double>());
    } else {
      for (int i = 0; i < 5; ++i) n.visibility[i] = v.at(i).get<double>();
    }
  }
  n.exclusivity_leakage_rad = j.value("exclusivity_leakage_rad", 0.0);
  n.drift_sigma_rad = j.value("drift_sigma_rad", 0.0);
  n.contrast_curvature = j.value("contrast_curvature", n.contrast_curvature);
  n.validate();
  return n;
}

json to_json(const ShotPlan& p) {
  return json{{"shots_per_setting", p.shots_per_setting},
              {"seed", p.seed},
              {"samples", p.samples}};
}

ShotPlan plan_from_json(const json& j) {
  ShotPlan p;
  p.shots_per_setting = j.value("shots_per_setting", p.shots_per_setting);
  p.seed = j.value("seed", p.seed);
  p.samples = j.value("samples", p.samples);
  p.validate();
  return p;
}

json to_json(const Estimate& e) {
  return json{{"value", e.value},
              {"sigma", e.sigma},
              {"sigma_poisson", e.sigma_poisson},
              {"sigma_sample", e.sigma_sample},
              {"method", method_name(e.method)}};
}

json to_json(const CountTable& t) {
  json settings = json::array();
  for (const auto& s : t.settings) {
    json samples = json::array();
    for (const auto& cells : s.samples) {
      json row = json::array();
      for (int k = 0; k < s.outcome_classes; ++k) row.push_back(cells[k]);
      samples.push_back(row);
    }
    json totals = json::array();
    const auto tot = s.totals();
    for (int k = 0; k < s.outcome_classes; ++k) totals.push_back(tot[k]);
    settings.push_back(json{{"label", s.label},
                            {"outcome_classes", s.outcome_classes},
                            {"totals", totals},
                            {"samples", samples}});
  }
  return json{{"shots_per_sample", t.shots_per_sample}, {"settings", settings}};
}

json to_json(const WrightEstimate& e) {
  json per = json::array();
  for (const auto& p : e.yes_probability) per.push_back(to_json(p));
  return json{{"yes_probability", per}, {"w", to_json(e.w)}};
}

json to_json(const KcbsEstimate& e) {
  json per = json::array();
  for (const auto& c : e.edge_correlation) per.push_back(to_json(c));
  return json{{"edge_correlation", per}, {"kappa", to_json(e.kappa)}};
}

json to_json(const WrightExperimentReport& r) {
  return json{{"experiment", "wright"},
              {"noise", to_json(r.noise)},
              {"plan", to_json(r.plan)},
              {"counts", to_json(r.counts)},
              {"estimate", to_json(r.estimate)},
              {"classical_bound", r.classical_bound},
              {"quantum_value", r.quantum_value},
              {"significance", r.significance},
              {"violated", r.violated}};
}

json to_json(const KcbsExperimentReport& r) {
  json orders = json::array();
  for (const auto& o : r.orders) {
    orders.push_back(json{{"order", order_name(o.order)},
                          {"counts", to_json(o.counts)},
                          {"estimate", to_json(o.estimate)},
                          {"significance", o.significance},
                          {"violated", o.violated}});
  }
  return json{{"experiment", "kcbs"},
              {"noise", to_json(r.noise)},
              {"plan", to_json(r.plan)},
              {"orders", orders},
              {"classical_bound", r.classical_bound},
              {"quantum_value", r.quantum_value}};
}

json to_json(const photonic::MeasurementDevice& d) {
  using Kind = photonic::OpticalElement::Kind;
  const auto kind_name = [](Kind k) {
    switch (k) {
      case Kind::hwp: return "hwp";
      case Kind::qwp: return "qwp";
      case Kind::pbs: return "pbs";
      case Kind::mirror: return "mirror";
      case Kind::mode_transfer: return "mode_transfer";
      case Kind::delay: return "delay";
    }
    return "unknown";
  };
  json pipeline = json::array();
  for (const auto& e : d.pipeline()) {
    json el{{"kind", kind_name(e.kind)}, {"inverted", e.inverted}};
    if (e.kind == Kind::hwp || e.kind == Kind::qwp) {
      el["angle_deg"] = e.angle_deg;
      el["path"] = e.path == photonic::Path::b ? "b" : "a";
    }
    if (e.kind == Kind::delay) el["delay_ns"] = e.delay_ns;
    pipeline.push_back(el);
  }
  return json{{"plate_angle_deg", d.plate_angle_deg()},
              {"delay_ns", d.delay_ns()},
              {"pipeline", pipeline}};
}

json to_json(const photonic::FidelityTable& t) {
  json rows = json::array();
  for (int i = 0; i < 5; ++i) {
    rows.push_back(json{{"plate_angle_deg", photonic::kPlateAnglesDeg[i]},
                        {"question", i},
                        {"fidelity", t.fidelity[i]}});
  }
  return json{{"fidelities", rows},
              {"internal_settings",
               json{{"fold_hwp_deg", t.settings.fold_hwp_deg},
                    {"comp_qwp_deg", t.settings.comp_qwp_deg},
                    {"objective", t.settings.objective}}}};
}

std::string counts_to_csv(const CountTable& t) {
  static const char* kTwo[] = {"yes", "no"};
  static const char* kFour[] = {"yy", "yn", "ny", "nn"};
  std::ostringstream os;
  os << "setting,outcome,count\n";
  for (const auto& s : t.settings) {
    const auto totals = s.totals();
    for (int k = 0; k < s.outcome_classes; ++k) {
      os << s.label << ','
         << (s.outcome_classes == 2 ? kTwo[k] : kFour[k]) << ','
         << totals[k] << '\n';
    }
  }
  return os.str();
}

std::string joints_to_csv(const std::array<JointDistribution, 5>& joints) {
  std::ostringstream os;
  os << "i,j,p_yy,p_yn,p_ny,p_nn,correlation\n";
  for (const auto& jd : joints) {
    os << jd.first_index << ',' << jd.second_index << ',' << jd.p_yy << ','
       << jd.p_yn << ',' << jd.p_ny << ',' << jd.p_nn << ','
       << jd.correlation() << '\n';
  }
  return os.str();
}

}  // namespace kcbs
