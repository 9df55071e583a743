#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "afc/controller_design.hpp"
#include "afc/simulator.hpp"

namespace afc {

struct AgentZenoReport {
  int events = 0;
  double min_gap = 0.0;           ///< t_end when fewer than two events
  std::vector<int> window_counts; ///< events per window
  double max_density = 0.0;       ///< max over windows of events / grid points
  bool zeno_suspect = false;
};

struct ZenoReport {
  double window = 1.0;
  std::vector<AgentZenoReport> agents;
  std::vector<int> suspects;

  bool clean() const { return suspects.empty(); }
};

/// Event density audit: an agent is flagged when it fires at more than
/// `threshold` of the grid points of any window.
ZenoReport zeno_audit(const SimulationTrace& trace, double window = 1.0, double threshold = 0.5);

/// Weights of the candidate Lyapunov function. Index 0..3 hold α₁..α₄ and
/// β₁..β₄; α₄ is only used in output mode.
struct LyapunovConstants {
  std::array<double, 4> weight{};
  std::array<double, 4> offset{};
};

/// Design data the monitor needs besides the trace.
struct LyapunovContext {
  ProtocolMode mode = ProtocolMode::State;
  Matrix P, R1;
  Matrix Q, R2, C, F;  ///< output mode
  Matrix B;
  Matrix omega;
  int leader_count = 0;
  Matrix targets;  ///< n×d
  Matrix v;        ///< n_l×m
  std::array<double, 4> trigger_offset{1, 1, 1, 1};
  std::array<double, 4> trigger_decay{1, 1, 1, 1};
};

LyapunovContext make_lyapunov_context(const ControllerDesign& design, const ClosedLoop& loop,
                                      const SimulationOptions& options);

/// Lists every violated admissibility inequality (empty when admissible).
std::vector<std::string> check_lyapunov_constants(const LyapunovContext& ctx,
                                                  const LyapunovConstants& c);

/// Smallest admissible constants scaled by `margin` > 1 (α₂ = 1).
LyapunovConstants admissible_constants(const LyapunovContext& ctx, double margin = 1.5);

struct LyapunovReport {
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> bound;
  double tolerance = 0.0;
  double max_excess = 0.0;  ///< max(V - bound), may be negative
  std::vector<int> violations;  ///< sample indices beyond tolerance

  bool holds() const { return violations.empty(); }
};

/// V evaluated on one sample.
double lyapunov_value(const LyapunovContext& ctx, const LyapunovConstants& c, const TraceSample& s);

/// V(t) against V(0) + ∫₀ᵗ Π (trapezoidal on the sample times), with
/// Π(t) = (μ_l n_l + μ_f n_f) e^{-min(ϖ_l, ϖ_f) t}. Throws InvalidConstants
/// naming the violated inequalities. `relative_tolerance` scales V(0).
LyapunovReport lyapunov_monitor(const SimulationTrace& trace, const LyapunovContext& ctx,
                                const LyapunovConstants& c, double relative_tolerance = 1e-3);

}  // namespace afc
