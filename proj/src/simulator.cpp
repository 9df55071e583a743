#include "afc/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "afc/errors.hpp"

namespace afc {

std::string to_string(ProtocolMode mode) { return mode == ProtocolMode::State ? "state" : "output"; }

std::string to_string(Integrator integrator) {
  return integrator == Integrator::Euler ? "euler" : "rk4";
}

ProtocolMode protocol_mode_from_string(const std::string& s) {
  if (s == "state") return ProtocolMode::State;
  if (s == "output") return ProtocolMode::Output;
  throw ParseError("unknown mode '" + s + "' (expected state or output)");
}

Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return Integrator::Euler;
  if (s == "rk4") return Integrator::Rk4;
  throw ParseError("unknown integrator '" + s + "' (expected euler or rk4)");
}

Vector leader_control(const Vector& held, const Matrix& K, const Vector& v) { return K * held + v; }

Vector follower_control(const Vector& held, const Vector& held_y, const Matrix& K) {
  return K * held + held_y;
}

double leader_trigger(double leader_gain, const Vector& error, const Vector& held_minus_target,
                      double offset, double decay, double t) {
  return leader_gain * error.squaredNorm() - held_minus_target.squaredNorm() - offset * std::exp(-decay * t);
}

double follower_trigger(double state_gain, double estimate_gain, double coupling, const Vector& error,
                        const Vector& error_y, const Vector& combined, const Vector& estimate,
                        double offset, double decay, double t) {
  return state_gain * error.squaredNorm() + estimate_gain * coupling * error_y.squaredNorm() -
         combined.squaredNorm() - estimate.squaredNorm() - offset * std::exp(-decay * t);
}

ClosedLoop make_closed_loop(const ControllerDesign& design, const StressMatrix& stress,
                            const NominalFormation& formation, const Matrix& targets) {
  const int n = formation.agent_count();
  if (stress.agent_count() != n || targets.rows() != n) {
    throw DimensionMismatch("stress, formation and targets disagree on the agent count");
  }
  if (targets.cols() != design.A.rows()) throw DimensionMismatch("targets must be n×d");
  if (design.v.rows() != formation.leader_count()) {
    throw DimensionMismatch("one compensation term per leader expected");
  }
  ClosedLoop loop;
  loop.A = design.A;
  loop.B = design.B;
  loop.C = design.C;
  loop.K = design.K;
  if (design.F) loop.F = *design.F;
  loop.targets = targets;
  loop.v = design.v;
  loop.leader_count = formation.leader_count();
  loop.omega = stress.omega();
  loop.neighbors.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j : formation.neighbors(i)) loop.neighbors[i].emplace_back(j, stress.weight(i, j));
  }
  return loop;
}

InitialState random_initial_state(const ClosedLoop& loop, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  InitialState init;
  init.p.resize(loop.agent_count(), loop.state_dim());
  for (Eigen::Index i = 0; i < init.p.rows(); ++i) {
    for (Eigen::Index k = 0; k < init.p.cols(); ++k) init.p(i, k) = dist(rng);
  }
  init.z = Matrix::Zero(loop.agent_count(), loop.state_dim());
  init.y = Matrix::Zero(loop.follower_count(), loop.input_dim());
  return init;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(std::shared_ptr<const ClosedLoop> loop, SimulationOptions options,
                       const InitialState& init)
    : loop_(std::move(loop)), options_(options) {
  n_ = loop_->agent_count();
  nl_ = loop_->leader_count;
  d_ = loop_->state_dim();
  m_ = loop_->input_dim();
  if (!(options_.dt > 0.0)) throw DimensionMismatch("dt must be positive");
  if (!(options_.t_end >= 0.0)) throw DimensionMismatch("t_end must be non-negative");
  if (options_.decimation < 1) throw DimensionMismatch("decimation must be >= 1");
  if (output_mode() && (loop_->C.size() == 0 || loop_->F.size() == 0)) {
    throw DimensionMismatch("output mode needs C and an observer gain F");
  }
  if (init.p.rows() != n_ || init.p.cols() != d_) throw DimensionMismatch("initial p must be n×d");
  if (output_mode() && (init.z.rows() != n_ || init.z.cols() != d_)) {
    throw DimensionMismatch("initial z must be n×d");
  }
  if (init.y.rows() != n_ - nl_ || init.y.cols() != m_) throw DimensionMismatch("initial y must be n_f×m");
  total_steps_ = static_cast<int>(std::llround(options_.t_end / options_.dt));

  int offset = 0;
  for (int i = 0; i < n_; ++i) {
    const int base = output_mode() ? 2 * d_ : d_;
    const int size = i < nl_ ? base + 1 : base + m_ + 3;
    slots_.push_back({offset, size});
    offset += size;
  }
  x_ = Vector::Zero(offset);
  for (int i = 0; i < n_; ++i) {
    x_.segment(p_off(i), d_) = init.p.row(i).transpose();
    if (output_mode()) x_.segment(z_off(i), d_) = init.z.row(i).transpose();
    const int s = scalar_off(i);
    if (i < nl_) {
      x_(s) = options_.adaptive.leader_gain;
    } else {
      x_.segment(y_off(i), m_) = init.y.row(i - nl_).transpose();
      x_(s) = options_.adaptive.coupling;
      x_(s + 1) = options_.adaptive.state_gain;
      x_(s + 2) = options_.adaptive.estimate_gain;
    }
  }
  held_ = Matrix::Zero(n_, d_);
  held_y_ = Matrix::Zero(n_, m_);
  combined_ = Matrix::Zero(n_, d_);
  inputs_.resize(static_cast<std::size_t>(n_));
  last_event_.assign(static_cast<std::size_t>(n_), 0.0);
  event_count_.assign(static_cast<std::size_t>(n_), 0);
}

int Simulation::scalar_off(int i) const {
  return i < nl_ ? y_off(i) : y_off(i) + m_;
}

void Simulation::refresh_caches() {
  for (int i = 0; i < n_; ++i) inputs_[i] = inputs_for(i);
  for (int i = 0; i < n_; ++i) {
    Vector c = Vector::Zero(d_);
    for (const auto& [j, w] : loop_->neighbors[i]) c += w * (held_.row(i) - held_.row(j)).transpose();
    combined_.row(i) = c.transpose();
  }
}

Simulation::Inputs Simulation::inputs_for(int i) const {
  Inputs in;
  const Vector held = held_.row(i).transpose();
  if (i < nl_) {
    in.u = leader_control(held, loop_->K, loop_->v.row(i).transpose());
    return in;
  }
  const Vector hy = held_y_.row(i).transpose();
  in.u = follower_control(held, hy, loop_->K);
  in.estimate = Vector::Zero(m_);
  for (const auto& [j, w] : loop_->neighbors[i]) {
    const Vector other = j < nl_ ? Vector(loop_->v.row(j).transpose()) : Vector(held_y_.row(j).transpose());
    in.estimate += w * (hy - other);
  }
  return in;
}

Vector Simulation::local_rates(int i, const Eigen::Ref<const Vector>& local, const Inputs& in) const {
  const ClosedLoop& L = *loop_;
  Vector rate = Vector::Zero(local.size());
  const Vector p = local.segment(0, d_);
  rate.segment(0, d_) = L.A * p + L.B * in.u;
  Vector own = p;
  int base = d_;
  if (output_mode()) {
    const Vector z = local.segment(d_, d_);
    rate.segment(d_, d_) = L.A * z + L.B * in.u + L.F * (L.C * z - L.C * p);
    own = z;
    base = 2 * d_;
  }
  const double err_sq = (held_.row(i).transpose() - own).squaredNorm();
  if (i < nl_) {
    rate(base) = err_sq;
    return rate;
  }
  const double coupling = local(base + m_);
  const Vector y = local.segment(base, m_);
  rate.segment(base, m_) = -coupling * in.estimate;
  rate(base + m_) = in.estimate.squaredNorm();
  rate(base + m_ + 1) = err_sq;
  rate(base + m_ + 2) = coupling * (held_y_.row(i).transpose() - y).squaredNorm();
  return rate;
}

double Simulation::trigger_for(int i, const Eigen::Ref<const Vector>& local) const {
  const int base = output_mode() ? 2 * d_ : d_;
  const Vector own = output_mode() ? Vector(local.segment(d_, d_)) : Vector(local.segment(0, d_));
  const Vector held = held_.row(i).transpose();
  const Vector error = held - own;
  const double t = time();
  const int idx = output_mode() ? 2 : 0;
  if (i < nl_) {
    return leader_trigger(local(base), error, held - loop_->targets.row(i).transpose(),
                          options_.trigger_offset[idx], options_.trigger_decay[idx], t);
  }
  const Vector error_y = held_y_.row(i).transpose() - local.segment(base, m_);
  return follower_trigger(local(base + m_ + 1), local(base + m_ + 2), local(base + m_), error, error_y,
                          combined_.row(i).transpose(), inputs_[i].estimate, options_.trigger_offset[idx + 1],
                          options_.trigger_decay[idx + 1], t);
}

void Simulation::broadcast(int i) {
  const int own = output_mode() ? z_off(i) : p_off(i);
  held_.row(i) = x_.segment(own, d_).transpose();
  if (i >= nl_) held_y_.row(i) = x_.segment(y_off(i), m_).transpose();
  last_event_[i] = time();
  ++event_count_[i];
  events_.push_back({i, step_, time()});
}

StepReport Simulation::initialize() {
  StepReport report;
  report.step = step_;
  report.t = time();
  report.trigger_before.assign(static_cast<std::size_t>(n_), std::numeric_limits<double>::infinity());
  report.fired.assign(static_cast<std::size_t>(n_), 1);
  for (int i = 0; i < n_; ++i) broadcast(i);
  refresh_caches();
  for (int i = 0; i < n_; ++i) report.trigger_after.push_back(trigger_value(i));
  return report;
}

StepReport Simulation::check_triggers() {
  StepReport report;
  report.step = step_;
  report.t = time();
  report.fired.assign(static_cast<std::size_t>(n_), 0);
  for (int i = 0; i < n_; ++i) report.trigger_before.push_back(trigger_value(i));
  bool any = false;
  for (int i = 0; i < n_; ++i) {
    if (report.trigger_before[i] > 0.0) {
      broadcast(i);
      report.fired[i] = 1;
      any = true;
    }
  }
  if (any) refresh_caches();
  for (int i = 0; i < n_; ++i) report.trigger_after.push_back(trigger_value(i));
  return report;
}

StepReport Simulation::advance() {
  if (done()) throw DimensionMismatch("simulation already reached t_end");
  const double h = options_.dt;
  for (int i = 0; i < n_; ++i) {
    auto local = x_.segment(slots_[i].offset, slots_[i].size);
    const Inputs& in = inputs_[i];
    if (options_.integrator == Integrator::Euler) {
      local += h * local_rates(i, local, in);
    } else {
      const Vector x0 = local;
      const Vector k1 = local_rates(i, x0, in);
      const Vector k2 = local_rates(i, x0 + 0.5 * h * k1, in);
      const Vector k3 = local_rates(i, x0 + 0.5 * h * k2, in);
      const Vector k4 = local_rates(i, x0 + h * k3, in);
      local = x0 + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  ++step_;
  check_divergence();
  return check_triggers();
}

void Simulation::check_divergence() const {
  for (Eigen::Index k = 0; k < x_.size(); ++k) {
    if (!std::isfinite(x_(k)) || std::abs(x_(k)) > options_.divergence_bound) {
      throw NumericalDivergence("state exceeded " + std::to_string(options_.divergence_bound) +
                                " at t = " + std::to_string(time()));
    }
  }
}

Vector Simulation::agent_rates(int i) const {
  return local_rates(i, x_.segment(slots_[i].offset, slots_[i].size), inputs_[i]);
}

double Simulation::trigger_value(int i) const {
  return trigger_for(i, x_.segment(slots_[i].offset, slots_[i].size));
}

void Simulation::overwrite_continuous(int i, const Vector& local_state) {
  if (local_state.size() != slots_[i].size) throw DimensionMismatch("local state has the wrong size");
  x_.segment(slots_[i].offset, slots_[i].size) = local_state;
}

Vector Simulation::continuous_state(int i) const { return x_.segment(slots_[i].offset, slots_[i].size); }

AgentRuntimeState Simulation::agent(int i) const {
  AgentRuntimeState a;
  a.leader = i < nl_;
  a.p = x_.segment(p_off(i), d_);
  if (output_mode()) a.z = x_.segment(z_off(i), d_);
  const int s = scalar_off(i);
  if (a.leader) {
    a.leader_gain = x_(s);
  } else {
    a.y = x_.segment(y_off(i), m_);
    a.coupling = x_(s);
    a.state_gain = x_(s + 1);
    a.estimate_gain = x_(s + 2);
    a.held_y = held_y_.row(i).transpose();
  }
  a.held = held_.row(i).transpose();
  a.last_event_time = last_event_[i];
  a.event_count = event_count_[i];
  return a;
}

std::vector<AgentRuntimeState> Simulation::agents() const {
  std::vector<AgentRuntimeState> out;
  for (int i = 0; i < n_; ++i) out.push_back(agent(i));
  return out;
}

Matrix Simulation::positions() const {
  Matrix out(n_, d_);
  for (int i = 0; i < n_; ++i) out.row(i) = x_.segment(p_off(i), d_).transpose();
  return out;
}

Matrix Simulation::observer_states() const {
  if (!output_mode()) return Matrix(0, d_);
  Matrix out(n_, d_);
  for (int i = 0; i < n_; ++i) out.row(i) = x_.segment(z_off(i), d_).transpose();
  return out;
}

Matrix Simulation::estimates() const {
  Matrix out(n_ - nl_, m_);
  for (int i = nl_; i < n_; ++i) out.row(i - nl_) = x_.segment(y_off(i), m_).transpose();
  return out;
}

Vector Simulation::couplings() const {
  Vector out(n_ - nl_);
  for (int i = nl_; i < n_; ++i) out(i - nl_) = x_(scalar_off(i));
  return out;
}

Vector Simulation::leader_gains() const {
  Vector out(nl_);
  for (int i = 0; i < nl_; ++i) out(i) = x_(scalar_off(i));
  return out;
}

Vector Simulation::state_gains() const {
  Vector out(n_ - nl_);
  for (int i = nl_; i < n_; ++i) out(i - nl_) = x_(scalar_off(i) + 1);
  return out;
}

Vector Simulation::estimate_gains() const {
  Vector out(n_ - nl_);
  for (int i = nl_; i < n_; ++i) out(i - nl_) = x_(scalar_off(i) + 2);
  return out;
}

ErrorNorms Simulation::error_norms() const {
  const Matrix pos = positions();
  const Matrix xs = output_mode() ? observer_states() : pos;
  ErrorNorms e;
  double formation = 0.0;
  double compensation = 0.0;
  const Matrix y = estimates();
  for (int i = nl_; i < n_; ++i) {
    Vector xi = Vector::Zero(d_);
    Vector theta = Vector::Zero(m_);
    for (const auto& [j, w] : loop_->neighbors[i]) {
      xi += w * (xs.row(i) - xs.row(j)).transpose();
      const Vector other = j < nl_ ? Vector(loop_->v.row(j).transpose()) : Vector(y.row(j - nl_).transpose());
      theta += w * (y.row(i - nl_).transpose() - other);
    }
    formation += xi.squaredNorm();
    compensation += theta.squaredNorm();
  }
  e.formation = std::sqrt(formation);
  e.compensation = std::sqrt(compensation);
  e.leader = (xs.topRows(nl_) - loop_->targets.topRows(nl_)).norm();
  if (output_mode()) e.observer = (xs - pos).norm();
  return e;
}

// ---------------------------------------------------------------------------

namespace {

TraceSample sample_of(const Simulation& sim) {
  TraceSample s;
  s.step = sim.step_index();
  s.t = sim.time();
  s.p = sim.positions();
  s.z = sim.observer_states();
  s.y = sim.estimates();
  s.coupling = sim.couplings();
  s.leader_gain = sim.leader_gains();
  s.state_gain = sim.state_gains();
  s.estimate_gain = sim.estimate_gains();
  const int n = sim.loop().agent_count();
  s.held.resize(n, sim.loop().state_dim());
  s.held_y.resize(sim.loop().follower_count(), sim.loop().input_dim());
  for (int i = 0; i < n; ++i) {
    const AgentRuntimeState a = sim.agent(i);
    s.held.row(i) = a.held.transpose();
    if (!a.leader) s.held_y.row(i - sim.loop().leader_count) = a.held_y.transpose();
  }
  s.errors = sim.error_norms();
  return s;
}

}  // namespace

SimulationSummary summarize(const SimulationTrace& trace) {
  SimulationSummary out;
  out.total_steps = trace.total_steps;
  if (!trace.samples.empty()) out.final_errors = trace.samples.back().errors;
  out.agents.resize(static_cast<std::size_t>(trace.agent_count));
  std::vector<double> last(static_cast<std::size_t>(trace.agent_count), -1.0);
  for (auto& a : out.agents) a.min_gap = trace.t_end;
  for (const Event& e : trace.events) {
    AgentSummary& a = out.agents[e.agent];
    if (a.events > 0) a.min_gap = std::min(a.min_gap, e.t - last[e.agent]);
    last[e.agent] = e.t;
    ++a.events;
  }
  double total = 0.0;
  for (auto& a : out.agents) {
    a.frequency = trace.total_steps > 0 ? static_cast<double>(a.events) / trace.total_steps : 0.0;
    total += a.frequency;
  }
  out.mean_frequency = trace.agent_count > 0 ? total / trace.agent_count : 0.0;
  return out;
}

SimulationTrace run_simulation(std::shared_ptr<const ClosedLoop> loop, const SimulationOptions& options,
                               const InitialState& init, const StepObserver& observer) {
  Simulation sim(std::move(loop), options, init);
  SimulationTrace trace;
  trace.mode = options.mode;
  trace.agent_count = sim.loop().agent_count();
  trace.leader_count = sim.loop().leader_count;
  trace.state_dim = sim.loop().state_dim();
  trace.input_dim = sim.loop().input_dim();
  trace.dt = options.dt;
  trace.total_steps = sim.total_steps();
  trace.t_end = sim.total_steps() * options.dt;
  if (sim.total_steps() == 0) {
    trace.summary = summarize(trace);
    return trace;
  }
  StepReport report = sim.initialize();
  if (observer) observer(sim, report);
  trace.samples.push_back(sample_of(sim));
  while (!sim.done()) {
    report = sim.advance();
    if (observer) observer(sim, report);
    if (sim.step_index() % options.decimation == 0 || sim.done()) trace.samples.push_back(sample_of(sim));
  }
  trace.events = sim.events();
  trace.summary = summarize(trace);
  return trace;
}

}  // namespace afc
