#include "osl/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "osl/errors.hpp"

namespace osl {

namespace {

[[noreturn]] void bad(const std::string& m) { throw Error(ErrorCode::BadSpec, m); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing \"" + key + "\"");
  return j.at(key);
}

std::vector<double> read_reals(const Json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(read_real(v, what));
  return out;
}

Json exact_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(exact_string(x));
  return a;
}

// [lo, hi] pair or a single value meaning lo = hi.
void read_range(const Json& j, const std::string& what, double& lo, double& hi) {
  if (j.is_array()) {
    if (j.size() != 2) bad(what + " must be [lo, hi]");
    lo = read_real(j[0], what);
    hi = read_real(j[1], what);
  } else {
    lo = hi = read_real(j, what);
  }
}

}  // namespace

std::string exact_string(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double read_real(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) return x;
  }
  bad(what + ": expected a number or decimal string, got " + j.dump());
}

Json real_value(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const ScalarDist& d) {
  Json j;
  switch (d.kind()) {
    case ScalarDist::Kind::Atoms:
      j["type"] = "atoms";
      j["values"] = exact_array(d.values());
      j["weights"] = exact_array(d.weights());
      break;
    case ScalarDist::Kind::Uniform:
      j["type"] = "uniform";
      j["lo"] = exact_string(d.param1());
      j["hi"] = exact_string(d.param2());
      break;
    case ScalarDist::Kind::Exponential:
      j["type"] = "exponential";
      j["rate"] = exact_string(d.param1());
      break;
    case ScalarDist::Kind::Dyadic:
      j["type"] = "dyadic";
      break;
    case ScalarDist::Kind::Pareto:
      j["type"] = "pareto";
      j["xm"] = exact_string(d.param1());
      j["alpha"] = exact_string(d.param2());
      break;
  }
  if (d.shift() != 0.0 || d.scale() != 1.0) {
    j["shift"] = exact_string(d.shift());
    j["scale"] = exact_string(d.scale());
  }
  return j;
}

ScalarDist scalar_dist_from_json(const Json& j) {
  const std::string where = "scalar law";
  if (j.is_number() || j.is_string()) return ScalarDist::constant(read_real(j, where));
  const std::string type = field(j, "type", where).get<std::string>();
  ScalarDist d = ScalarDist::constant(0.0);
  if (type == "atoms") {
    d = ScalarDist::atoms(read_reals(field(j, "values", where), "values"),
                          read_reals(field(j, "weights", where), "weights"));
  } else if (type == "constant") {
    d = ScalarDist::constant(read_real(field(j, "value", where), "value"));
  } else if (type == "uniform") {
    d = ScalarDist::uniform(read_real(field(j, "lo", where), "lo"), read_real(field(j, "hi", where), "hi"));
  } else if (type == "exponential") {
    d = ScalarDist::exponential(read_real(field(j, "rate", where), "rate"));
  } else if (type == "dyadic") {
    d = ScalarDist::dyadic();
  } else if (type == "pareto") {
    d = ScalarDist::pareto(read_real(field(j, "xm", where), "xm"), read_real(field(j, "alpha", where), "alpha"));
  } else {
    bad("unknown scalar law type \"" + type + "\"");
  }
  const double shift = j.contains("shift") ? read_real(j["shift"], "shift") : 0.0;
  const double scale = j.contains("scale") ? read_real(j["scale"], "scale") : 1.0;
  if (shift != 0.0 || scale != 1.0) d = d.affine(shift, scale);
  return d;
}

Json to_json(const MatrixDistribution& nu) {
  Json j;
  switch (nu.kind()) {
    case MatrixDistribution::Kind::Atoms: {
      j["kind"] = "atoms";
      Json ms = Json::array();
      for (const Mat2& g : nu.matrices()) ms.push_back(exact_array({g.a11, g.a12, g.a21, g.a22}));
      j["matrices"] = ms;
      j["weights"] = exact_array(nu.weights());
      break;
    }
    case MatrixDistribution::Kind::Triangular:
      j["kind"] = "triangular";
      j["a"] = to_json(nu.first());
      j["a_log"] = nu.a_exp();
      j["b"] = to_json(nu.second());
      j["b_log"] = nu.b_exp();
      break;
    case MatrixDistribution::Kind::RotGain:
      j["kind"] = "rotgain";
      j["angle"] = to_json(nu.first());
      j["gain"] = to_json(nu.second());
      break;
  }
  return j;
}

MatrixDistribution matrix_distribution_from_json(const Json& j) {
  const std::string where = "matrix distribution";
  const std::string kind = field(j, "kind", where).get<std::string>();
  if (kind == "atoms") {
    std::vector<Mat2> ms;
    for (const auto& m : field(j, "matrices", where)) {
      const auto v = read_reals(m, "matrix");
      if (v.size() != 4) bad("each matrix is [a11, a12, a21, a22]");
      ms.push_back({v[0], v[1], v[2], v[3]});
    }
    std::vector<double> w = j.contains("weights") ? read_reals(j["weights"], "weights")
                                                  : std::vector<double>(ms.size(), 1.0 / static_cast<double>(ms.size()));
    return MatrixDistribution::atoms(std::move(ms), std::move(w));
  }
  if (kind == "triangular") {
    return MatrixDistribution::triangular(scalar_dist_from_json(field(j, "a", where)), j.value("a_log", false),
                                          scalar_dist_from_json(field(j, "b", where)), j.value("b_log", false));
  }
  if (kind == "rotgain") {
    return MatrixDistribution::rotgain(scalar_dist_from_json(field(j, "angle", where)),
                                       scalar_dist_from_json(field(j, "gain", where)));
  }
  if (kind == "counterexample") return build_counterexample_cocycle(counterexample_psi());
  bad("unknown matrix distribution kind \"" + kind + "\"");
}

Json to_json(const EtaCell& c) {
  Json j;
  j["law"] = c.atom ? "atom" : "uniform";
  if (c.atom) {
    j["alpha"] = exact_string(c.alpha_lo);
    j["theta"] = exact_string(c.theta_lo);
  } else {
    j["alpha"] = exact_array({c.alpha_lo, c.alpha_hi});
    j["theta"] = exact_array({c.theta_lo, c.theta_hi});
  }
  j["orientation"] = c.orientation;
  return j;
}

EtaCell eta_cell_from_json(const Json& j) {
  EtaCell c;
  const std::string law = j.value("law", std::string("uniform"));
  if (law != "uniform" && law != "atom") bad("cell law must be \"uniform\" or \"atom\"");
  c.atom = law == "atom";
  read_range(field(j, "alpha", "cell"), "alpha", c.alpha_lo, c.alpha_hi);
  read_range(field(j, "theta", "cell"), "theta", c.theta_lo, c.theta_hi);
  c.orientation = j.value("orientation", 1);
  c.validate();
  return c;
}

Json to_json(const EtaSpec& eta) {
  Json j;
  Json pieces = Json::array();
  for (const auto& p : eta.pieces) pieces.push_back({{"weight", exact_string(p.weight)}, {"cell", to_json(p.cell)}});
  j["pieces"] = pieces;
  if (eta.tail_rule) {
    const TailRule& t = *eta.tail_rule;
    j["tail_rule"] = {{"first_weight", exact_string(t.first_weight)},
                      {"ratio", exact_string(t.ratio)},
                      {"theta_factor", exact_string(t.theta_factor)},
                      {"cell", to_json(t.cell)}};
  }
  return j;
}

EtaSpec eta_spec_from_json(const Json& j) {
  EtaSpec eta;
  if (!j.is_object()) bad("eta spec must be an object");
  if (j.contains("pieces")) {
    for (const auto& p : j["pieces"]) {
      eta.pieces.push_back({read_real(field(p, "weight", "piece"), "weight"), eta_cell_from_json(field(p, "cell", "piece"))});
    }
  }
  if (j.contains("tail_rule")) {
    const Json& t = j["tail_rule"];
    TailRule r;
    r.first_weight = read_real(field(t, "first_weight", "tail_rule"), "first_weight");
    r.ratio = read_real(field(t, "ratio", "tail_rule"), "ratio");
    r.theta_factor = t.contains("theta_factor") ? read_real(t["theta_factor"], "theta_factor") : 1.0;
    r.cell = eta_cell_from_json(field(t, "cell", "tail_rule"));
    eta.tail_rule = r;
  }
  return eta;
}

Json to_json(const TowerVector& pi) {
  Json h = Json::object();
  for (const auto& [k, v] : pi.entries) h[std::to_string(k)] = exact_string(v);
  return {{"heights", h}};
}

TowerVector tower_vector_from_json(const Json& j) {
  TowerVector pi;
  const Json& h = field(j, "heights", "tower vector");
  if (!h.is_object()) bad("\"heights\" must map heights to weights");
  for (const auto& [k, v] : h.items()) {
    char* end = nullptr;
    const long long height = std::strtoll(k.c_str(), &end, 10);
    if (k.empty() || *end != '\0') bad("height \"" + k + "\" is not an integer");
    pi.entries[height] = read_real(v, "tower weight");
  }
  pi.validate();
  return pi;
}

std::vector<double> p_sequence_from_json(const Json& j) { return read_reals(field(j, "p", "p-sequence"), "p"); }

Json to_json(const Estimate& e) { return {{"mean", real_value(e.mean)}, {"std_error", real_value(e.std_error)}}; }

Json to_json(const LyapunovEstimate& l) {
  return {{"lambda1", real_value(l.lambda1)}, {"lambda2", real_value(l.lambda2)}, {"steps", l.steps}};
}

Json to_json(const AngleTailReport& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
    rows.push_back({{"threshold", real_value(r.thresholds[i])}, {"truncated_mean", to_json(r.truncated_means[i])}});
  }
  Json inc = Json::array();
  for (const auto& e : r.increments) inc.push_back(to_json(e));
  return {{"sample_count", r.sample_count}, {"infinite_count", r.infinite_count}, {"thresholds", rows},
          {"increments", inc},          {"span", to_json(r.span)},                 {"verdict", r.verdict}};
}

Json to_json(const DriftReport& r) {
  return {{"horizon", r.horizon},     {"trials", r.trials},         {"drift_c", real_value(r.drift_c)},
          {"sup_h", to_json(r.sup_h)}, {"sup_2h", to_json(r.sup_2h)}, {"difference", to_json(r.difference)},
          {"stabilized", r.stabilized}};
}

Json to_json(const ConstructionReport& r) {
  Json cells = Json::array();
  for (std::size_t k = 0; k < r.cell_weights.size(); ++k) {
    cells.push_back({{"weight", real_value(r.cell_weights[k])}, {"frequency", real_value(r.cell_frequencies[k])}});
  }
  return {{"lambda_hat", {real_value(r.lambda1), real_value(r.lambda2)}},
          {"steps", r.steps},
          {"cells", cells},
          {"unclassified", r.unclassified},
          {"cell_tv", real_value(r.cell_tv)},
          {"theta_ks", real_value(r.theta_ks)},
          {"max_step_cost", real_value(r.max_step_cost)},
          {"mean_step_cost", to_json(r.mean_step_cost)},
          {"mean_log_norm", to_json(r.mean_log_norm)},
          {"birkhoff_psi", {to_json(r.birkhoff_psi1), to_json(r.birkhoff_psi2)}},
          {"depth", r.depth},
          {"agreement_samples", r.agreement_samples},
          {"agreement_fraction", real_value(r.agreement_fraction)},
          {"max_agreement_error", real_value(r.max_agreement_error)},
          {"max_invariance_error", real_value(r.max_invariance_error)},
          {"min_drift_slack", real_value(r.min_drift_slack)},
          {"max_label_jump", r.max_label_jump}};
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) bad("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
  if (!out_) bad("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

std::string csv_real(double x) { return exact_string(x); }

}  // namespace osl
