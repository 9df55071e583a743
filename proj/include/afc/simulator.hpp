#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "afc/controller_design.hpp"
#include "afc/formation_geometry.hpp"
#include "afc/linalg.hpp"

namespace afc {

enum class ProtocolMode { State, Output };
enum class Integrator { Euler, Rk4 };

std::string to_string(ProtocolMode mode);
std::string to_string(Integrator integrator);
ProtocolMode protocol_mode_from_string(const std::string& s);
Integrator integrator_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Pure pieces of the protocol.

/// u = K x̂ + v (x̂ is the held state or held observer state).
Vector leader_control(const Vector& held, const Matrix& K, const Vector& v);

/// u = K x̂ + ŷ.
Vector follower_control(const Vector& held, const Vector& held_y, const Matrix& K);

/// γ‖ε‖² - ‖x̂ - x*‖² - μ e^{-ϖ t}.
double leader_trigger(double leader_gain, const Vector& error, const Vector& held_minus_target,
                      double offset, double decay, double t);

/// φ‖ε_x‖² + ϕ d ‖ε_y‖² - ‖combined‖² - ‖estimate‖² - μ e^{-ϖ t}, where
/// `combined` is Σ w_ij (x̂_i - x̂_j) and `estimate` the held compensation
/// disagreement Σ w_ij (ŷ_i - ŷ_j / v_j).
double follower_trigger(double state_gain, double estimate_gain, double coupling, const Vector& error,
                        const Vector& error_y, const Vector& combined, const Vector& estimate,
                        double offset, double decay, double t);

// ---------------------------------------------------------------------------

/// Immutable data shared by every agent of a run.
struct ClosedLoop {
  Matrix A, B, C, K, F;  ///< F and C only used in output mode
  Matrix targets;        ///< n×d target states, leaders first
  Matrix v;              ///< n_l×m compensation terms
  int leader_count = 0;
  /// neighbors[i] = (j, w_ij) over the graph edges.
  std::vector<std::vector<std::pair<int, double>>> neighbors;
  Matrix omega;  ///< stress used for the weights (for diagnostics)

  int agent_count() const { return static_cast<int>(targets.rows()); }
  int follower_count() const { return agent_count() - leader_count; }
  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

ClosedLoop make_closed_loop(const ControllerDesign& design, const StressMatrix& stress,
                            const NominalFormation& formation, const Matrix& targets);

struct AdaptiveInit {
  double coupling = 6.0;  ///< d_i(0) > 1
  double leader_gain = 6.0;     ///< γ_i(0) > 0
  double state_gain = 6.0;    ///< φ_i(0) > 0
  double estimate_gain = 6.0;       ///< ϕ_i(0) > 0
};

struct SimulationOptions {
  ProtocolMode mode = ProtocolMode::State;
  Integrator integrator = Integrator::Euler;
  double dt = 0.01;
  double t_end = 10.0;
  /// Trigger offsets/decays: [0] leaders and [1] followers in state mode,
  /// [2] leaders and [3] followers in output mode.
  std::array<double, 4> trigger_offset{1, 1, 1, 1};
  std::array<double, 4> trigger_decay{1, 1, 1, 1};
  AdaptiveInit adaptive;
  int decimation = 1;
  double divergence_bound = 1e9;
};

struct InitialState {
  Matrix p;  ///< n×d
  Matrix z;  ///< n×d (output mode)
  Matrix y;  ///< n_f×m
};

/// p uniform on [lo, hi]^d per agent, z = 0, y = 0.
InitialState random_initial_state(const ClosedLoop& loop, std::uint64_t seed, double lo = -5.0,
                                  double hi = 5.0);

/// Snapshot of one agent.
struct AgentRuntimeState {
  bool leader = false;
  Vector p;
  Vector z;  ///< empty in state mode
  Vector y;  ///< followers only
  double coupling = 0.0;
  double leader_gain = 0.0;
  double state_gain = 0.0;
  double estimate_gain = 0.0;
  Vector held;    ///< p̂ (state mode) or ẑ (output mode)
  Vector held_y;  ///< followers only
  double last_event_time = 0.0;
  int event_count = 0;
};

struct Event {
  int agent = 0;
  int step = 0;
  double t = 0.0;
};

/// What happened at one grid point.
struct StepReport {
  int step = 0;
  double t = 0.0;
  std::vector<double> trigger_before;  ///< f_i with the pre-event board
  std::vector<char> fired;
  std::vector<double> trigger_after;   ///< f_i after held values refreshed
};

struct ErrorNorms {
  double formation = 0.0;    ///< ‖ξ_f‖ (state) or ‖η_f‖ (output)
  double leader = 0.0;       ///< ‖e_{p_l}‖ or ‖e_{z_l}‖
  double observer = 0.0;     ///< ‖δ‖ = ‖z - p‖ (output mode)
  double compensation = 0.0; ///< ‖θ_f‖
};

class Simulation {
 public:
  Simulation(std::shared_ptr<const ClosedLoop> loop, SimulationOptions options,
             const InitialState& init);

  const ClosedLoop& loop() const { return *loop_; }
  const SimulationOptions& options() const { return options_; }
  int step_index() const { return step_; }
  int total_steps() const { return total_steps_; }
  double time() const { return step_ * options_.dt; }
  bool done() const { return step_ >= total_steps_; }

  /// Broadcasts every agent's initial value (logged as an event at t = 0).
  StepReport initialize();
  /// One integration step with held values frozen, then trigger checks.
  StepReport advance();

  AgentRuntimeState agent(int i) const;
  std::vector<AgentRuntimeState> agents() const;
  const std::vector<Event>& events() const { return events_; }

  /// Time derivative of agent i's local continuous state under the current
  /// board. Layout: p, [z], [y, d], adaptive scalars.
  Vector agent_rates(int i) const;
  /// Trigger function of agent i at the current time and board.
  double trigger_value(int i) const;
  /// Overwrites agent i's continuous state without touching the board.
  void overwrite_continuous(int i, const Vector& local_state);
  Vector continuous_state(int i) const;

  ErrorNorms error_norms() const;

  Matrix positions() const;
  Matrix observer_states() const;
  Matrix estimates() const;  ///< y_f, n_f×m
  Vector couplings() const;
  Vector leader_gains() const;
  Vector state_gains() const;
  Vector estimate_gains() const;

 private:
  struct Slot {
    int offset = 0;
    int size = 0;
  };
  struct Inputs {
    Vector u;
    Vector estimate;  ///< θ̂_i (followers)
  };

  bool output_mode() const { return options_.mode == ProtocolMode::Output; }
  int p_off(int i) const { return slots_[i].offset; }
  int z_off(int i) const { return slots_[i].offset + d_; }
  int y_off(int i) const { return slots_[i].offset + (output_mode() ? 2 * d_ : d_); }
  int scalar_off(int i) const;

  Vector local_rates(int i, const Eigen::Ref<const Vector>& local, const Inputs& in) const;
  Inputs inputs_for(int i) const;
  void refresh_caches();
  double trigger_for(int i, const Eigen::Ref<const Vector>& local) const;
  void broadcast(int i);
  StepReport check_triggers();
  void check_divergence() const;

  std::shared_ptr<const ClosedLoop> loop_;
  SimulationOptions options_;
  int n_ = 0, nl_ = 0, d_ = 0, m_ = 0;
  int step_ = 0, total_steps_ = 0;
  std::vector<Slot> slots_;
  Vector x_;

  // Board of broadcast values and what agents derive from it.
  Matrix held_;    ///< n×d
  Matrix held_y_;  ///< n×m (follower rows used)
  std::vector<Inputs> inputs_;
  Matrix combined_;  ///< n×d, Σ w_ij (x̂_i - x̂_j)

  std::vector<double> last_event_;
  std::vector<int> event_count_;
  std::vector<Event> events_;
};

/// Recorded sample of the whole fleet.
struct TraceSample {
  int step = 0;
  double t = 0.0;
  Matrix p, z, y;
  Vector coupling, leader_gain, state_gain, estimate_gain;
  Matrix held, held_y;
  ErrorNorms errors;
};

struct AgentSummary {
  int events = 0;
  double frequency = 0.0;
  double min_gap = 0.0;
};

struct SimulationSummary {
  ErrorNorms final_errors;
  std::vector<AgentSummary> agents;
  int total_steps = 0;
  double mean_frequency = 0.0;
};

struct SimulationTrace {
  ProtocolMode mode = ProtocolMode::State;
  int agent_count = 0;
  int leader_count = 0;
  int state_dim = 0;
  int input_dim = 0;
  double dt = 0.0;
  double t_end = 0.0;
  int total_steps = 0;
  std::vector<TraceSample> samples;
  std::vector<Event> events;
  SimulationSummary summary;
};

using StepObserver = std::function<void(const Simulation&, const StepReport&)>;

/// Runs [0, t_end] on the grid k·dt, k = 0..round(t_end/dt). Samples every
/// `decimation` steps plus the final step. A zero-length horizon yields an
/// empty trace.
SimulationTrace run_simulation(std::shared_ptr<const ClosedLoop> loop,
                               const SimulationOptions& options, const InitialState& init,
                               const StepObserver& observer = {});

SimulationSummary summarize(const SimulationTrace& trace);

}  // namespace afc
