#include "afc/fixtures.hpp"

#include <algorithm>

#include "afc/errors.hpp"

namespace afc {

namespace {

std::vector<Edge> one_based(std::initializer_list<std::pair<int, int>> pairs) {
  std::vector<Edge> out;
  for (const auto& [a, b] : pairs) out.push_back({a - 1, b - 1});
  return out;
}

ScenarioConfig case1_base() {
  ScenarioConfig c;
  c.case_id = CaseId::Case1;
  c.plant.A.resize(3, 3);
  c.plant.A << 1, 1, 0, -1, 0, 0, 1, 0, 1;
  c.plant.B.resize(3, 3);
  c.plant.B << 0, 1, 0, -1, 0, 0, -1, 1, 1;
  c.formation = case1_formation();
  c.reference_stress = printed_case1_stress();
  c.R1 = Matrix::Identity(3, 3);
  c.sim.mode = ProtocolMode::State;
  c.sim.dt = 0.01;
  c.sim.t_end = 10.0;
  c.sim.trigger_offset = {1, 1, 1, 1};
  c.sim.trigger_decay = {1, 1, 1, 1};
  c.sim.adaptive = {6.0, 6.0, 6.0, 6.0};
  c.acceptance.error_tolerance = 1e-2;
  c.acceptance.leader_frequency = 0.12;
  c.acceptance.follower_frequency = 0.12;
  c.acceptance.mean_frequency = 0.06;
  return c;
}

ScenarioConfig case2_base() {
  ScenarioConfig c;
  c.case_id = CaseId::Case2;
  c.plant.A = Matrix::Zero(4, 4);
  c.plant.A(0, 1) = 1;
  c.plant.A(2, 3) = 1;
  c.plant.B = Matrix::Zero(4, 2);
  c.plant.B(1, 0) = 1;
  c.plant.B(3, 1) = 1;
  c.plant.C.resize(2, 4);
  c.plant.C << 1, 1, 0, 0, 0, 0, 1, 1;
  c.formation = case2_formation();
  c.embedding = Matrix::Zero(4, 2);
  c.embedding(0, 0) = 1;
  c.embedding(2, 1) = 1;
  c.R1 = Matrix::Identity(4, 4);
  c.R2 = Matrix::Identity(4, 4);
  c.sim.mode = ProtocolMode::Output;
  c.sim.dt = 0.01;
  c.sim.t_end = 25.0;
  c.sim.trigger_offset = {1, 1, 1, 1};
  c.sim.trigger_decay = {1, 1, 0.6, 0.6};
  c.sim.adaptive = {4.0, 4.0, 4.0, 4.0};
  c.acceptance.error_tolerance = 1e-2;
  c.acceptance.leader_frequency = 0.03;
  c.acceptance.follower_frequency = 0.10;
  c.acceptance.mean_frequency = 1.0;
  return c;
}

}  // namespace

NominalFormation case1_formation() {
  Matrix a(10, 3);
  a << 2, 4, 0, -2, -4, 0, -2, 2, 4, 2, -2, 4,  //
      -2, 4, 0, -4, 0, 0, 4, 0, 0, 2, -4, 0, 2, 2, 4, -2, -2, 4;
  return NominalFormation(4, a,
                          one_based({{1, 3}, {1, 5}, {1, 6}, {1, 7}, {1, 9}, {1, 10}, {2, 6}, {2, 8}, {2, 9},
                                     {2, 10}, {3, 5}, {3, 7}, {3, 9}, {3, 10}, {4, 6}, {4, 8}, {4, 9}, {4, 10},
                                     {5, 6}, {5, 8}, {5, 10}, {6, 9}, {6, 10}, {7, 8}, {7, 9}, {8, 10}, {9, 10}}));
}

NominalFormation case2_formation() {
  Matrix a(7, 2);
  a << -1, 1, -1, -1, 0, -1, 1, -1, 1, 0, 1, 1, 0, 1;
  return NominalFormation(3, a,
                          one_based({{1, 2}, {1, 3}, {2, 3}, {1, 4}, {1, 5}, {1, 6}, {1, 7}, {2, 4}, {2, 5},
                                     {2, 6}, {2, 7}, {3, 4}, {3, 5}, {3, 6}, {3, 7}, {5, 7}}));
}

Matrix printed_case1_stress() {
  Matrix w(10, 10);
  // Row 1, column 7 reads -0.10 in print; -0.20 restores symmetry and a zero row sum.
  w << 0.41, 0, -0.05, 0, -0.27, 0.05, -0.20, 0, -0.09, 0.15,  //
      0, 0.56, 0, 0, 0, -0.23, 0, -0.34, 0.23, -0.23,           //
      -0.05, 0, 0.44, 0, -0.15, 0, 0.20, 0, -0.24, -0.20,        //
      0, 0, 0, 0.36, 0, 0.14, 0, -0.14, -0.14, -0.21,            //
      -0.27, 0, -0.15, 0, 0.51, -0.34, 0, 0.10, 0, 0.15,         //
      0.05, -0.23, 0, 0.14, -0.34, 0.52, 0, 0, 0.06, -0.21,      //
      -0.20, 0, 0.20, 0, 0, 0, 0.39, -0.20, -0.20, 0,            //
      0, -0.34, 0, -0.14, 0.10, 0, -0.20, 0.44, 0, 0.14,         //
      -0.09, 0.23, -0.24, -0.14, 0, 0.06, -0.20, 0, 0.56, -0.18, //
      0.15, -0.23, -0.20, -0.21, 0.15, -0.21, 0, 0.14, -0.18, 0.59;
  return w;
}

std::vector<std::string> fixture_ids() {
  std::vector<std::string> out;
  for (CaseId id : {CaseId::Case1, CaseId::Case2}) {
    for (const std::string& name : preset_names(id)) {
      out.push_back(to_string(id) + "-" + (name == "identity" ? std::string("nominal") : name));
    }
  }
  return out;
}

bool is_fixture(const std::string& id) {
  const auto ids = fixture_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

ScenarioConfig fixture(const std::string& id) {
  if (!is_fixture(id)) throw UnknownPreset("unknown fixture '" + id + "'");
  const CaseId cid = case_id_from_string(id.substr(0, 5));
  const std::string suffix = id.substr(6);
  ScenarioConfig c = cid == CaseId::Case1 ? case1_base() : case2_base();
  c.name = id;
  c.transform_preset = suffix == "nominal" ? "identity" : suffix;
  c.transform = preset_transform(cid, c.transform_preset);
  return c;
}

}  // namespace afc
