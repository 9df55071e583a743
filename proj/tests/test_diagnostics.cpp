#include <doctest.h>

#include <string>

#include "afc/diagnostics.hpp"
#include "afc/errors.hpp"
#include "afc/fixtures.hpp"
#include "afc/scenario.hpp"

using namespace afc;

namespace {

SimulationTrace bare_trace(int agents, double t_end) {
  SimulationTrace tr;
  tr.agent_count = agents;
  tr.leader_count = 1;
  tr.dt = 0.01;
  tr.t_end = t_end;
  tr.total_steps = static_cast<int>(t_end / tr.dt + 0.5);
  return tr;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("empty event log reports the horizon as the minimum gap") {
  const ZenoReport z = zeno_audit(bare_trace(2, 3.0));
  CHECK(z.clean());
  for (const auto& a : z.agents) {
    CHECK(a.events == 0);
    CHECK(a.min_gap == 3.0);
  }
}

TEST_CASE("an agent firing at every grid point is flagged") {
  SimulationTrace tr = bare_trace(2, 2.0);
  for (int k = 0; k <= tr.total_steps; ++k) tr.events.push_back({0, k, k * tr.dt});
  tr.events.push_back({1, 0, 0.0});
  const ZenoReport z = zeno_audit(tr);
  REQUIRE(z.suspects.size() == 1);
  CHECK(z.suspects[0] == 0);
  CHECK(z.agents[0].min_gap == doctest::Approx(0.01));
  CHECK_FALSE(z.agents[1].zeno_suspect);
}

TEST_CASE("nominal ten-agent run thins out over time") {
  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const ZenoReport z = zeno_audit(run_scenario(prep, 1));
  CHECK(z.clean());
  for (const auto& a : z.agents) {
    CHECK(a.min_gap >= 0.01 - 1e-12);
    CHECK(a.window_counts.back() <= a.window_counts.front());
  }
}

TEST_CASE("admissible constants pass and the bound holds on the nominal run") {
  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const LyapunovContext ctx = make_lyapunov_context(prep.design, *prep.loop, prep.config.sim);
  const LyapunovConstants c = admissible_constants(ctx);
  CHECK(check_lyapunov_constants(ctx, c).empty());
  const LyapunovReport r = lyapunov_monitor(run_scenario(prep, 1), ctx, c);
  CHECK(r.holds());
  CHECK(r.value.back() < r.value.front());
}

TEST_CASE("equilibrium with gains at their offsets has a constant value") {
  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const LyapunovContext ctx = make_lyapunov_context(prep.design, *prep.loop, prep.config.sim);
  const LyapunovConstants c = admissible_constants(ctx);
  const StressMatrix& s = prep.stress;
  TraceSample sample;
  sample.p = prep.loop->targets;
  sample.y = -s.ff().ldlt().solve(s.fl() * prep.design.v);
  sample.coupling = Vector::Constant(6, c.offset[0]);
  sample.estimate_gain = Vector::Constant(6, c.offset[1]);
  sample.state_gain = Vector::Constant(6, c.offset[2]);
  sample.leader_gain = Vector::Constant(4, c.offset[3]);
  CHECK(std::abs(lyapunov_value(ctx, c, sample)) < 1e-12);

  SimulationTrace tr;
  tr.samples = {sample, sample, sample};
  for (int k = 0; k < 3; ++k) tr.samples[k].t = 0.01 * k;
  CHECK(lyapunov_monitor(tr, ctx, c).holds());
}

TEST_CASE("constants below the offset bound are refused") {
  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const LyapunovContext ctx = make_lyapunov_context(prep.design, *prep.loop, prep.config.sim);
  LyapunovConstants c = admissible_constants(ctx);
  c.offset[0] = 0.5;
  const auto bad = check_lyapunov_constants(ctx, c);
  REQUIRE_FALSE(bad.empty());
  CHECK(bad.front().find("offset1") != std::string::npos);
  CHECK_THROWS_AS(lyapunov_monitor(SimulationTrace{}, ctx, c), InvalidConstants);
}

}
