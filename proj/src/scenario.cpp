#include "afc/scenario.hpp"

#include <fstream>
#include <sstream>

#include "afc/errors.hpp"
#include "afc/fixtures.hpp"

namespace afc {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j.at(0).is_array() ? j.at(0).size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ParseError(what + ": rows must be arrays of equal length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ParseError(what + ": entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(what + ": entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix ScenarioConfig::effective_embedding() const {
  if (embedding.size() > 0) return embedding;
  return Matrix::Identity(formation.dim(), formation.dim());
}

namespace {

void check_positive_definite(std::vector<std::string>& out, const Matrix& m, int d, const std::string& name) {
  if (m.rows() != d || m.cols() != d) {
    out.push_back(name + " must be " + std::to_string(d) + "x" + std::to_string(d));
    return;
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) out.push_back(name + " must be symmetric");
  if (!(symmetric_eigenvalues(m)(0) > 0)) out.push_back(name + " must be positive definite");
}

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const char* kOffsetNames[4] = {"μ₁ > 0", "μ₂ > 0", "μ₃ > 0", "μ₄ > 0"};
const char* kDecayNames[4] = {"ϖ₁ > 0", "ϖ₂ > 0", "ϖ₃ > 0", "ϖ₄ > 0"};

}  // namespace

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> out;
  const int d = c.plant.state_dim();
  try {
    c.plant.validate();
  } catch (const Error& e) {
    out.push_back(std::string("plant: ") + e.what());
  }
  for (int k = 0; k < 4; ++k) {
    if (!(c.sim.trigger_offset[k] > 0)) {
      out.push_back(std::string(kOffsetNames[k]) + " violated: trigger.offset[" + std::to_string(k) +
                    "] = " + format_value(c.sim.trigger_offset[k]));
    }
    if (!(c.sim.trigger_decay[k] > 0)) {
      out.push_back(std::string(kDecayNames[k]) + " violated: trigger.decay[" + std::to_string(k) +
                    "] = " + format_value(c.sim.trigger_decay[k]));
    }
  }
  if (!(c.sim.dt > 0)) out.push_back("dt > 0 violated");
  if (!(c.sim.t_end >= 0)) out.push_back("t_end >= 0 violated");
  if (c.sim.decimation < 1) out.push_back("decimation >= 1 violated");
  if (!(c.sim.divergence_bound > 0)) out.push_back("divergence_bound > 0 violated");
  if (!(c.sim.adaptive.coupling > 1)) out.push_back("coupling d(0) > 1 violated");
  if (!(c.sim.adaptive.leader_gain > 0)) out.push_back("leader_gain(0) > 0 violated");
  if (!(c.sim.adaptive.state_gain > 0)) out.push_back("state_gain(0) > 0 violated");
  if (!(c.sim.adaptive.estimate_gain > 0)) out.push_back("estimate_gain(0) > 0 violated");
  if (!(c.init_low < c.init_high)) out.push_back("initial range must satisfy low < high");

  check_positive_definite(out, c.R1, d, "R1");
  if (c.sim.mode == ProtocolMode::Output) {
    if (!c.plant.has_output()) out.push_back("output mode requires an output matrix C");
    if (!c.R2) out.push_back("output mode requires observer weight R2");
  }
  if (c.R2) check_positive_definite(out, *c.R2, d, "R2");

  const Matrix emb = c.effective_embedding();
  if (emb.rows() != d || emb.cols() != c.formation.dim()) {
    out.push_back("embedding must map formation coordinates (" + std::to_string(c.formation.dim()) +
                  ") into states (" + std::to_string(d) + ")");
  }
  const int n = c.formation.agent_count();
  if (c.stress && (c.stress->rows() != n || c.stress->cols() != n)) out.push_back("inline stress must be n×n");
  if (c.reference_stress && (c.reference_stress->rows() != n || c.reference_stress->cols() != n)) {
    out.push_back("reference stress must be n×n");
  }
  if (c.transform.linear.rows() != d || c.transform.linear.cols() != d || c.transform.translation.size() != d) {
    out.push_back("transform must be " + std::to_string(d) + "-dimensional");
  }
  if (c.pinned_initial) {
    const InitialState& s = *c.pinned_initial;
    if (s.p.rows() != n || s.p.cols() != d) out.push_back("initial p must be n×d");
    if (c.sim.mode == ProtocolMode::Output && (s.z.rows() != n || s.z.cols() != d)) {
      out.push_back("initial z must be n×d");
    }
    if (s.y.rows() != c.formation.follower_count() || s.y.cols() != c.plant.input_dim()) {
      out.push_back("initial y must be n_f×m");
    }
  }
  return out;
}

ScenarioConfig scenario_from_json(const json& doc) {
  ScenarioConfig c;
  try {
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    c.name = doc.value("name", std::string("scenario"));
    if (doc.contains("case")) c.case_id = case_id_from_string(doc.at("case").get<std::string>());

    const json& plant = doc.at("plant");
    c.plant.A = matrix_from_json(plant.at("A"), "plant.A");
    c.plant.B = matrix_from_json(plant.at("B"), "plant.B");
    if (plant.contains("C")) c.plant.C = matrix_from_json(plant.at("C"), "plant.C");

    const json& f = doc.at("formation");
    std::vector<Edge> edges;
    for (const json& e : f.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("formation.edges: expected pairs");
      edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
    }
    try {
      c.formation = NominalFormation(f.at("leader_count").get<int>(),
                                     matrix_from_json(f.at("positions"), "formation.positions"), edges);
    } catch (const DimensionMismatch& e) {
      throw ValidationError({std::string("formation: ") + e.what()});
    }
    if (doc.contains("embedding")) c.embedding = matrix_from_json(doc.at("embedding"), "embedding");

    if (doc.contains("stress")) {
      const json& s = doc.at("stress");
      if (s.is_string()) {
        if (s.get<std::string>() != "compute") throw ParseError("stress: expected \"compute\" or a matrix");
      } else {
        c.stress = matrix_from_json(s, "stress");
      }
    }
    if (doc.contains("reference_stress")) c.reference_stress = matrix_from_json(doc.at("reference_stress"), "reference_stress");

    const int d = c.plant.state_dim();
    if (doc.contains("transform")) {
      const json& t = doc.at("transform");
      if (t.contains("preset")) {
        if (!c.case_id) throw ParseError("transform.preset needs a \"case\" field");
        c.transform_preset = t.at("preset").get<std::string>();
        c.transform = preset_transform(*c.case_id, c.transform_preset);
      } else {
        c.transform.linear = matrix_from_json(t.at("linear"), "transform.linear");
        c.transform.translation = vector_from_json(t.at("translation"), "transform.translation");
        c.transform.label = t.value("label", std::string("custom"));
      }
    } else {
      c.transform = AffineTransform::identity(d);
    }

    const json& w = doc.at("weights");
    c.R1 = matrix_from_json(w.at("state"), "weights.state");
    if (w.contains("observer")) c.R2 = matrix_from_json(w.at("observer"), "weights.observer");

    c.sim.mode = protocol_mode_from_string(doc.value("mode", std::string("state")));
    c.sim.integrator = integrator_from_string(doc.value("integrator", std::string("euler")));
    c.sim.dt = doc.value("dt", 0.01);
    c.sim.t_end = doc.value("t_end", 10.0);
    c.sim.decimation = doc.value("decimation", 1);
    c.sim.divergence_bound = doc.value("divergence_bound", 1e9);
    if (doc.contains("trigger")) {
      const json& t = doc.at("trigger");
      const Vector offset = vector_from_json(t.at("offset"), "trigger.offset");
      const Vector decay = vector_from_json(t.at("decay"), "trigger.decay");
      if (offset.size() != 4 || decay.size() != 4) throw ParseError("trigger.offset and trigger.decay need 4 entries");
      for (int k = 0; k < 4; ++k) {
        c.sim.trigger_offset[k] = offset(k);
        c.sim.trigger_decay[k] = decay(k);
      }
    }
    if (doc.contains("adaptive_init")) {
      const json& a = doc.at("adaptive_init");
      c.sim.adaptive.coupling = a.value("coupling", c.sim.adaptive.coupling);
      c.sim.adaptive.leader_gain = a.value("leader_gain", c.sim.adaptive.leader_gain);
      c.sim.adaptive.state_gain = a.value("state_gain", c.sim.adaptive.state_gain);
      c.sim.adaptive.estimate_gain = a.value("estimate_gain", c.sim.adaptive.estimate_gain);
    }
    if (doc.contains("initial")) {
      const json& init = doc.at("initial");
      c.seed = init.value("seed", std::uint64_t{1});
      c.init_low = init.value("low", -5.0);
      c.init_high = init.value("high", 5.0);
      if (init.contains("p")) {
        InitialState s;
        s.p = matrix_from_json(init.at("p"), "initial.p");
        s.z = init.contains("z") ? matrix_from_json(init.at("z"), "initial.z") : Matrix::Zero(s.p.rows(), s.p.cols());
        s.y = init.contains("y") ? matrix_from_json(init.at("y"), "initial.y")
                                 : Matrix::Zero(c.formation.follower_count(), c.plant.input_dim());
        c.pinned_initial = s;
      }
    }
    if (doc.contains("diagnostics")) {
      const json& g = doc.at("diagnostics");
      c.zeno_audit = g.value("zeno", true);
      c.lyapunov = g.value("lyapunov", false);
      if (g.contains("lyapunov_constants")) {
        const json& k = g.at("lyapunov_constants");
        const Vector wv = vector_from_json(k.at("weight"), "lyapunov_constants.weight");
        const Vector ov = vector_from_json(k.at("offset"), "lyapunov_constants.offset");
        if (wv.size() != 4 || ov.size() != 4) throw ParseError("lyapunov constants need 4 weights and 4 offsets");
        LyapunovConstants lc;
        for (int i = 0; i < 4; ++i) {
          lc.weight[i] = wv(i);
          lc.offset[i] = ov(i);
        }
        c.lyapunov_constants = lc;
      }
    }
    if (doc.contains("acceptance")) {
      const json& a = doc.at("acceptance");
      c.acceptance.error_tolerance = a.value("error_tolerance", c.acceptance.error_tolerance);
      c.acceptance.leader_frequency = a.value("leader_frequency", c.acceptance.leader_frequency);
      c.acceptance.follower_frequency = a.value("follower_frequency", c.acceptance.follower_frequency);
      c.acceptance.mean_frequency = a.value("mean_frequency", c.acceptance.mean_frequency);
      c.acceptance.target_tolerance = a.value("target_tolerance", c.acceptance.target_tolerance);
      if (a.contains("seeds")) c.acceptance.seeds = a.at("seeds").get<std::vector<std::uint64_t>>();
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  const std::vector<std::string> violations = validate_scenario(c);
  if (!violations.empty()) throw ValidationError(violations);
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  if (c.case_id) doc["case"] = to_string(*c.case_id);
  doc["plant"]["A"] = matrix_to_json(c.plant.A);
  doc["plant"]["B"] = matrix_to_json(c.plant.B);
  if (c.plant.has_output()) doc["plant"]["C"] = matrix_to_json(c.plant.C);
  doc["formation"]["leader_count"] = c.formation.leader_count();
  doc["formation"]["positions"] = matrix_to_json(c.formation.positions());
  json edges = json::array();
  for (const Edge& e : c.formation.edges()) edges.push_back({e.i + 1, e.j + 1});
  doc["formation"]["edges"] = edges;
  if (c.embedding.size() > 0) doc["embedding"] = matrix_to_json(c.embedding);
  doc["stress"] = c.stress ? matrix_to_json(*c.stress) : json("compute");
  if (c.reference_stress) doc["reference_stress"] = matrix_to_json(*c.reference_stress);
  if (!c.transform_preset.empty() && c.case_id) {
    doc["transform"]["preset"] = c.transform_preset;
  } else {
    doc["transform"]["linear"] = matrix_to_json(c.transform.linear);
    doc["transform"]["translation"] = vector_to_json(c.transform.translation);
    doc["transform"]["label"] = c.transform.label;
  }
  doc["weights"]["state"] = matrix_to_json(c.R1);
  if (c.R2) doc["weights"]["observer"] = matrix_to_json(*c.R2);
  doc["mode"] = to_string(c.sim.mode);
  doc["integrator"] = to_string(c.sim.integrator);
  doc["dt"] = c.sim.dt;
  doc["t_end"] = c.sim.t_end;
  doc["decimation"] = c.sim.decimation;
  doc["divergence_bound"] = c.sim.divergence_bound;
  doc["trigger"]["offset"] = std::vector<double>(c.sim.trigger_offset.begin(), c.sim.trigger_offset.end());
  doc["trigger"]["decay"] = std::vector<double>(c.sim.trigger_decay.begin(), c.sim.trigger_decay.end());
  doc["adaptive_init"] = {{"coupling", c.sim.adaptive.coupling},
                          {"leader_gain", c.sim.adaptive.leader_gain},
                          {"state_gain", c.sim.adaptive.state_gain},
                          {"estimate_gain", c.sim.adaptive.estimate_gain}};
  doc["initial"] = {{"seed", c.seed}, {"low", c.init_low}, {"high", c.init_high}};
  if (c.pinned_initial) {
    doc["initial"]["p"] = matrix_to_json(c.pinned_initial->p);
    doc["initial"]["z"] = matrix_to_json(c.pinned_initial->z);
    doc["initial"]["y"] = matrix_to_json(c.pinned_initial->y);
  }
  doc["diagnostics"] = {{"zeno", c.zeno_audit}, {"lyapunov", c.lyapunov}};
  if (c.lyapunov_constants) {
    doc["diagnostics"]["lyapunov_constants"] = {
        {"weight", std::vector<double>(c.lyapunov_constants->weight.begin(), c.lyapunov_constants->weight.end())},
        {"offset", std::vector<double>(c.lyapunov_constants->offset.begin(), c.lyapunov_constants->offset.end())}};
  }
  doc["acceptance"] = {{"error_tolerance", c.acceptance.error_tolerance},
                       {"leader_frequency", c.acceptance.leader_frequency},
                       {"follower_frequency", c.acceptance.follower_frequency},
                       {"mean_frequency", c.acceptance.mean_frequency},
                       {"target_tolerance", c.acceptance.target_tolerance},
                       {"seeds", c.acceptance.seeds}};
  return doc;
}

ScenarioConfig load_scenario(const std::string& id_or_path) {
  if (is_fixture(id_or_path)) return fixture(id_or_path);
  std::ifstream in(id_or_path);
  if (!in) throw IoError("cannot open scenario '" + id_or_path + "' (not a fixture id or readable file)");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ParseError("scenario file '" + id_or_path + "' is empty");
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(id_or_path + ": " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << scenario_to_json(config).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

PreparedScenario prepare_scenario(const ScenarioConfig& config) {
  const std::vector<std::string> violations = validate_scenario(config);
  if (!violations.empty()) throw ValidationError(violations);
  PreparedScenario s;
  s.config = config;
  s.stress = config.stress ? StressMatrix(*config.stress, config.formation.leader_count())
                           : compute_stress(config.formation);
  s.targets = target_formation(config.formation, config.effective_embedding(), config.transform);
  const std::optional<Matrix> r2 =
      config.sim.mode == ProtocolMode::Output ? config.R2 : std::optional<Matrix>{};
  s.design = design_controller(config.plant, config.R1, r2, s.targets.leaders);
  s.loop = std::make_shared<const ClosedLoop>(make_closed_loop(s.design, s.stress, config.formation, s.targets.all));
  return s;
}

InitialState initial_state(const PreparedScenario& scenario, std::uint64_t seed) {
  if (scenario.config.pinned_initial) return *scenario.config.pinned_initial;
  return random_initial_state(*scenario.loop, seed, scenario.config.init_low, scenario.config.init_high);
}

SimulationTrace run_scenario(const PreparedScenario& scenario, std::uint64_t seed, const StepObserver& observer) {
  return run_simulation(scenario.loop, scenario.config.sim, initial_state(scenario, seed), observer);
}

SimulationTrace run_scenario(const PreparedScenario& scenario, const StepObserver& observer) {
  return run_scenario(scenario, scenario.config.seed, observer);
}

json design_to_json(const ControllerDesign& d) {
  json doc;
  doc["A"] = matrix_to_json(d.A);
  doc["B"] = matrix_to_json(d.B);
  if (d.C.size() > 0) doc["C"] = matrix_to_json(d.C);
  doc["P"] = matrix_to_json(d.P);
  doc["K"] = matrix_to_json(d.K);
  if (d.Q) doc["Q"] = matrix_to_json(*d.Q);
  if (d.F) doc["F"] = matrix_to_json(*d.F);
  doc["R1"] = matrix_to_json(d.R1);
  if (d.R2.size() > 0) doc["R2"] = matrix_to_json(d.R2);
  doc["v"] = matrix_to_json(d.v);
  doc["mode"] = to_string(d.mode);
  doc["warnings"] = d.warnings;
  return doc;
}

}  // namespace afc
