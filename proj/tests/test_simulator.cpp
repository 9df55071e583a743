#include <doctest.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <string>

#include "afc/errors.hpp"
#include "afc/fixtures.hpp"
#include "afc/scenario.hpp"
#include "afc/simulator.hpp"
#include "afc/trace_io.hpp"
#include "support.hpp"

using namespace afc;

namespace {

// One leader (agent 0) and two followers on a path 0 - 1 - 2, scalar plant.
std::shared_ptr<ClosedLoop> scalar_chain() {
  auto loop = std::make_shared<ClosedLoop>();
  loop->A = Matrix::Zero(1, 1);
  loop->B = Matrix::Ones(1, 1);
  loop->K = -Matrix::Ones(1, 1);
  loop->targets = Matrix::Zero(3, 1);
  loop->v = Matrix::Zero(1, 1);
  loop->leader_count = 1;
  loop->neighbors = {{{1, 1.0}}, {{0, 1.0}, {2, 1.0}}, {{1, 1.0}}};
  loop->omega.resize(3, 3);
  loop->omega << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  return loop;
}

SimulationOptions quiet_options(double t_end) {
  SimulationOptions o;
  o.dt = 0.01;
  o.t_end = t_end;
  o.trigger_offset = {1e12, 1e12, 1e12, 1e12};
  return o;
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_SUITE("etc_simulator") {

TEST_CASE("leader control law") {
  CHECK(leader_control(Vector::Ones(3), Matrix::Zero(3, 3), Vector::Zero(3)).isZero());

  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const Matrix& K = prep.design.K;
  const Vector v1 = prep.design.v.row(0).transpose();
  const Eigen::Vector3d held(2, 4, 0);
  Vector expect(3);
  for (int r = 0; r < 3; ++r) {
    expect(r) = v1(r);
    for (int c = 0; c < 3; ++c) expect(r) += K(r, c) * held(c);
  }
  CHECK((leader_control(held, K, v1) - expect).norm() < 1e-12);

  // At the target the closed-loop vector field vanishes.
  for (int i = 0; i < 4; ++i) {
    const Vector target = prep.targets.leaders.row(i).transpose();
    const Vector u = leader_control(target, K, prep.design.v.row(i).transpose());
    CHECK((prep.design.A * target + prep.design.B * u).norm() < 1e-10);
  }
}

TEST_CASE("follower control law") {
  Matrix K(1, 2);
  K << 2, -1;
  CHECK(follower_control(Eigen::Vector2d(1, 3), Vector::Constant(1, 0.5), K)(0) == doctest::Approx(-0.5));
}

TEST_CASE("leader trigger arithmetic") {
  const Eigen::Vector3d err(0.1, 0, 0), gap(0.2, 0, 0);
  CHECK(leader_trigger(6, err, gap, 1, 1, 0) == doctest::Approx(-0.98).epsilon(1e-12));
  const double late = leader_trigger(6, err, gap, 1, 1, 10);
  CHECK(late == doctest::Approx(0.06 - 0.04 - std::exp(-10.0)).epsilon(1e-12));
  CHECK(std::abs(late - 0.0200) < 1e-4);
  CHECK(late > 0);
  CHECK(leader_trigger(6, Vector::Zero(3), gap, 1, 1, 3) < 0);
}

TEST_CASE("follower trigger arithmetic") {
  const Vector a = Vector::Constant(1, 0.3), b = Vector::Constant(1, 0.1);
  const Vector c = Vector::Constant(1, 0.2), e = Vector::Constant(1, 0.1);
  const double f = follower_trigger(1, 1, 1, a, b, c, e, 1, 1, 60);
  CHECK(f == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(follower_trigger(1, 1, 1, Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), 1, 1, 2) ==
        doctest::Approx(-std::exp(-2.0)));
}

TEST_CASE("compensation estimate and coupling growth on a scalar chain") {
  auto loop = scalar_chain();
  InitialState init{Matrix::Zero(3, 1), Matrix::Zero(3, 1), Matrix::Zero(2, 1)};
  init.y(0, 0) = 1.0;
  SimulationOptions o = quiet_options(0.01);
  Simulation sim(loop, o, init);
  sim.initialize();
  // Layout of a follower: p, y, coupling, state gain, estimate gain.
  const Vector rates = sim.agent_rates(1);
  const double estimate = (1.0 - 0.0) + (1.0 - 0.0);
  CHECK(estimate == 2.0);
  CHECK(rates(1) == doctest::Approx(-6.0 * estimate));
  CHECK(rates(2) == doctest::Approx(estimate * estimate));
  sim.advance();
  CHECK(sim.agent(1).coupling == doctest::Approx(6.04).epsilon(1e-12));
}

TEST_CASE("consensus fixed point of the estimator") {
  auto loop = scalar_chain();
  loop->v(0, 0) = 0.7;
  InitialState init{Matrix::Zero(3, 1), Matrix::Zero(3, 1), Matrix::Constant(2, 1, 0.7)};
  Simulation sim(loop, quiet_options(1.0), init);
  sim.initialize();
  for (int i : {1, 2}) {
    const Vector r = sim.agent_rates(i);
    CHECK(r(1) == 0.0);
    CHECK(r(2) == 0.0);
  }
}

TEST_CASE("scalar Euler run with feedback refreshed at every step") {
  auto loop = std::make_shared<ClosedLoop>();
  loop->A = Matrix::Zero(1, 1);
  loop->B = Matrix::Ones(1, 1);
  loop->K = -Matrix::Ones(1, 1);
  loop->targets = Matrix::Zero(1, 1);
  loop->v = Matrix::Zero(1, 1);
  loop->leader_count = 1;
  loop->neighbors = {{}};
  loop->omega = Matrix::Zero(1, 1);
  SimulationOptions o;
  o.dt = 0.01;
  o.t_end = 1.0;
  o.trigger_offset = {1e-300, 1e-300, 1e-300, 1e-300};
  o.adaptive.leader_gain = 1e12;
  o.divergence_bound = 1e300;
  InitialState init{Matrix::Ones(1, 1), Matrix::Zero(1, 1), Matrix::Zero(0, 1)};
  const SimulationTrace tr = run_simulation(loop, o, init);
  CHECK(static_cast<int>(tr.events.size()) == 101);
  CHECK(std::abs(tr.samples.back().p(0, 0) - std::exp(-1.0)) < 5e-3);
}

TEST_CASE("equilibrium is stationary and silent") {
  const PreparedScenario prep = prepare_scenario(fixture("case1-nominal"));
  const StressMatrix& s = prep.stress;
  InitialState init;
  init.p = prep.loop->targets;
  init.z = Matrix::Zero(10, 3);
  init.y = -s.ff().ldlt().solve(s.fl() * prep.design.v);
  const SimulationTrace tr = run_simulation(prep.loop, prep.config.sim, init);
  CHECK(tr.events.size() == 10);
  for (const Event& e : tr.events) CHECK(e.step == 0);
  CHECK((tr.samples.back().p - init.p).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((tr.samples.back().y - init.y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("overwhelming offsets silence every agent after the first broadcast") {
  ScenarioConfig cfg = fixture("case1-nominal");
  cfg.sim.trigger_offset = {1e15, 1e15, 1e15, 1e15};
  cfg.sim.t_end = 1.0;
  cfg.sim.divergence_bound = 1e300;
  const PreparedScenario prep = prepare_scenario(cfg);
  const SimulationTrace tr = run_scenario(prep, 1);
  CHECK(tr.events.size() == 10);
  for (const Event& e : tr.events) CHECK(e.t == 0.0);
}

TEST_CASE("Euler and RK4 agree on the nominal ten-agent run") {
  ScenarioConfig cfg = fixture("case1-nominal");
  const PreparedScenario euler = prepare_scenario(cfg);
  cfg.sim.integrator = Integrator::Rk4;
  const PreparedScenario rk4 = prepare_scenario(cfg);
  const double a = run_scenario(euler, 1).summary.final_errors.formation;
  const double b = run_scenario(rk4, 1).summary.final_errors.formation;
  CHECK(std::abs(a - b) < 1e-3);
}

TEST_CASE("decimation keeps every k-th grid point and the last one") {
  ScenarioConfig cfg = fixture("case1-nominal");
  cfg.sim.decimation = 10;
  const SimulationTrace tr = run_scenario(prepare_scenario(cfg), 2);
  CHECK(tr.total_steps == 1000);
  CHECK(tr.samples.size() == 101);
  const auto dir = afc::test::scratch_dir("decimation");
  const TraceFiles files = emit_trace(tr, dir.string());
  CHECK(count_lines(files.states) == 102);
}

TEST_CASE("zero-length horizon gives header-only files") {
  ScenarioConfig cfg = fixture("case1-nominal");
  cfg.sim.t_end = 0.0;
  const SimulationTrace tr = run_scenario(prepare_scenario(cfg), 1);
  CHECK(tr.samples.empty());
  CHECK(tr.events.empty());
  const auto dir = afc::test::scratch_dir("empty");
  const TraceFiles files = emit_trace(tr, dir.string());
  CHECK(count_lines(files.states) == 1);
  CHECK(count_lines(files.events) == 1);
  CHECK(count_lines(files.series) == 1);
}

TEST_CASE("events file names all ten agents") {
  const SimulationTrace tr = run_scenario(prepare_scenario(fixture("case1-nominal")), 1);
  const auto dir = afc::test::scratch_dir("events");
  const TraceFiles files = emit_trace(tr, dir.string());
  std::set<int> ids;
  for (const Event& e : read_events_csv(files.events)) ids.insert(e.agent);
  CHECK(ids.size() == 10);
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == 9);
}

TEST_CASE("divergence guard") {
  ScenarioConfig cfg = fixture("case1-nominal");
  cfg.sim.divergence_bound = 1.0;
  const PreparedScenario prep = prepare_scenario(cfg);
  CHECK_THROWS_AS(run_scenario(prep, 1), NumericalDivergence);
}

TEST_CASE("output mode runs the observer") {
  ScenarioConfig cfg = fixture("case2-nominal");
  cfg.sim.t_end = 1.0;
  const PreparedScenario prep = prepare_scenario(cfg);
  const SimulationTrace tr = run_scenario(prep, 3);
  CHECK(tr.mode == ProtocolMode::Output);
  CHECK(tr.samples.front().z.isZero());
  CHECK(tr.samples.back().errors.observer < tr.samples.front().errors.observer);
}

TEST_CASE("mode and integrator names") {
  CHECK(protocol_mode_from_string("output") == ProtocolMode::Output);
  CHECK(integrator_from_string("rk4") == Integrator::Rk4);
  CHECK_THROWS_AS(integrator_from_string("midpoint"), ParseError);
  CHECK(to_string(Integrator::Euler) == "euler");
}

}
