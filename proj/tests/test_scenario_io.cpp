#include <doctest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "afc/errors.hpp"
#include "afc/fixtures.hpp"
#include "afc/scenario.hpp"
#include "afc/trace_io.hpp"
#include "support.hpp"

using namespace afc;
using nlohmann::json;

TEST_SUITE("scenario_io") {

TEST_CASE("fixture catalog") {
  const auto ids = fixture_ids();
  CHECK(ids.size() == 12);
  CHECK(is_fixture("case1-nominal"));
  CHECK_FALSE(is_fixture("case3-nominal"));
  CHECK_THROWS_AS(fixture("case1-twirl"), UnknownPreset);

  const ScenarioConfig c1 = load_scenario("case1-nominal");
  CHECK(c1.sim.adaptive.coupling == 6.0);
  CHECK(c1.sim.adaptive.state_gain == 6.0);
  CHECK(c1.sim.adaptive.estimate_gain == 6.0);
  const ScenarioConfig c2 = load_scenario("case2-nominal");
  CHECK(c2.sim.adaptive.coupling == 4.0);
  CHECK(c2.sim.trigger_decay[2] == 0.6);
  CHECK(c2.sim.trigger_decay[3] == 0.6);
}

TEST_CASE("every fixture designs and validates at load") {
  for (const auto& id : fixture_ids()) {
    CAPTURE(id);
    const ScenarioConfig c = load_scenario(id);
    CHECK(validate_scenario(c).empty());
    const PreparedScenario p = prepare_scenario(c);
    CHECK(validate_stress(p.stress.omega(), c.formation).passed());
    if (c.reference_stress) {
      CHECK(validate_stress(*c.reference_stress, c.formation, StressTolerances::rounded()).passed());
    }
  }
}

TEST_CASE("fixtures survive a round trip through a file") {
  const auto dir = afc::test::scratch_dir("roundtrip");
  for (const auto& id : fixture_ids()) {
    CAPTURE(id);
    const ScenarioConfig c = fixture(id);
    const std::string path = (dir / (id + ".json")).string();
    save_scenario(c, path);
    const ScenarioConfig back = load_scenario(path);
    CHECK(scenario_to_json(back) == scenario_to_json(c));
    CHECK(back.plant.A == c.plant.A);
    CHECK(back.formation.positions() == c.formation.positions());
    CHECK(back.formation.edges() == c.formation.edges());
    CHECK(back.transform.linear == c.transform.linear);
    CHECK(back.sim.trigger_offset == c.sim.trigger_offset);
    CHECK(back.acceptance.seeds == c.acceptance.seeds);
  }
}

TEST_CASE("empty and missing files") {
  const auto dir = afc::test::scratch_dir("badfiles");
  const std::string empty = (dir / "empty.json").string();
  std::ofstream(empty).close();
  CHECK_THROWS_AS(load_scenario(empty), ParseError);
  CHECK_THROWS_AS(load_scenario((dir / "absent.json").string()), IoError);

  const std::string junk = (dir / "junk.json").string();
  std::ofstream(junk) << "{ not json";
  CHECK_THROWS_AS(load_scenario(junk), ParseError);
}

TEST_CASE("non-positive trigger offset is named") {
  json doc = scenario_to_json(fixture("case1-nominal"));
  doc["trigger"]["offset"][0] = 0.0;
  try {
    scenario_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    bool named = false;
    for (const auto& v : e.violations()) named |= v.find("μ₁ > 0") != std::string::npos;
    CHECK(named);
  }
}

TEST_CASE("every violated constraint is listed") {
  ScenarioConfig c = fixture("case2-nominal");
  c.sim.dt = 0;
  c.sim.adaptive.coupling = 1.0;
  c.sim.trigger_decay[3] = -1;
  c.R2.reset();
  const auto v = validate_scenario(c);
  CHECK(v.size() >= 4);
}

TEST_CASE("matrix and vector helpers") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6.5;
  CHECK(matrix_from_json(matrix_to_json(m), "m") == m);
  CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,2],[3]]"), "m"), ParseError);
  const Vector v = Eigen::Vector3d(1, -2, 0.25);
  CHECK(vector_from_json(vector_to_json(v), "v") == v);

  const auto dir = afc::test::scratch_dir("matrix");
  const std::string path = (dir / "m.csv").string();
  Matrix r(2, 2);
  r << 0.1, 1.0 / 3.0, -2e-17, 7;
  write_matrix_csv(r, path);
  CHECK(read_matrix_csv(path) == r);
}

TEST_CASE("summary, report and checksum") {
  ScenarioConfig c = fixture("case1-nominal");
  c.sim.t_end = 2.0;
  const PreparedScenario p = prepare_scenario(c);
  const SimulationTrace tr = run_scenario(p, 7);
  const auto dir = afc::test::scratch_dir("report");
  const TraceFiles a = emit_trace(tr, (dir / "a").string(), zeno_audit(tr), std::nullopt, c.name);
  const TraceFiles b = emit_trace(run_scenario(p, 7), (dir / "b").string(), zeno_audit(tr), std::nullopt, c.name);
  CHECK(file_checksum(a.states) == file_checksum(b.states));
  CHECK(file_checksum(a.states).size() == 16);

  const std::string report = report_trace_dir((dir / "a").string());
  CHECK(report.find("L1") != std::string::npos);
  CHECK(report.find("F6") != std::string::npos);

  std::ifstream in(a.summary);
  const json s = json::parse(in);
  CHECK(s.at("agent_count") == 10);

  const auto cols = state_columns(tr);
  CHECK(cols.front() == "t");
  CHECK(cols.back() == "compensation_error");
  CHECK_THROWS_AS(report_trace_dir((dir / "nowhere").string()), IoError);
}

TEST_CASE("event count table shape") {
  const std::string t = event_count_table({3, 4, 5, 6, 7}, 2);
  CHECK(t.find("L1") != std::string::npos);
  CHECK(t.find("L2") != std::string::npos);
  CHECK(t.find("F3") != std::string::npos);
  CHECK(t.find("F4") == std::string::npos);
  CHECK(t.find("frequency") == std::string::npos);
  const std::string r = event_count_table({3, 4, 5, 6, 7}, 2, 50);
  CHECK(r.find("frequency (%)") != std::string::npos);
  CHECK(r.find("14.0") != std::string::npos);
}

}
