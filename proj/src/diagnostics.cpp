#include "afc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "afc/errors.hpp"

namespace afc {

ZenoReport zeno_audit(const SimulationTrace& trace, double window, double threshold) {
  ZenoReport report;
  report.window = window;
  report.agents.resize(static_cast<std::size_t>(trace.agent_count));
  const int windows = trace.t_end > 0 ? static_cast<int>(std::ceil(trace.t_end / window - 1e-9)) : 0;
  for (auto& a : report.agents) {
    a.window_counts.assign(static_cast<std::size_t>(windows), 0);
    a.min_gap = trace.t_end;
  }
  std::vector<double> last(static_cast<std::size_t>(trace.agent_count), 0.0);
  for (const Event& e : trace.events) {
    AgentZenoReport& a = report.agents[e.agent];
    if (a.events > 0) a.min_gap = std::min(a.min_gap, e.t - last[e.agent]);
    last[e.agent] = e.t;
    ++a.events;
    if (windows > 0) {
      const int w = std::clamp(static_cast<int>(std::floor(e.t / window + 1e-9)), 0, windows - 1);
      ++a.window_counts[w];
    }
  }
  for (int i = 0; i < trace.agent_count; ++i) {
    AgentZenoReport& a = report.agents[i];
    for (int w = 0; w < windows; ++w) {
      const double span = std::min(window, trace.t_end - w * window);
      const double points = std::max(1.0, std::round(span / trace.dt));
      a.max_density = std::max(a.max_density, a.window_counts[w] / points);
    }
    a.zeno_suspect = a.max_density > threshold;
    if (a.zeno_suspect) report.suspects.push_back(i);
  }
  return report;
}

LyapunovContext make_lyapunov_context(const ControllerDesign& design, const ClosedLoop& loop,
                                      const SimulationOptions& options) {
  LyapunovContext ctx;
  ctx.mode = options.mode;
  ctx.P = design.P;
  ctx.R1 = design.R1;
  if (design.Q) ctx.Q = *design.Q;
  if (design.F) ctx.F = *design.F;
  ctx.R2 = design.R2;
  ctx.C = design.C;
  ctx.B = design.B;
  ctx.omega = loop.omega;
  ctx.leader_count = loop.leader_count;
  ctx.targets = loop.targets;
  ctx.v = loop.v;
  ctx.trigger_offset = options.trigger_offset;
  ctx.trigger_decay = options.trigger_decay;
  return ctx;
}

namespace {

struct Norms {
  double r1_min = 0.0;
  double ff_sq = 0.0;   // ‖Ω_ff²‖
  double fl_sq = 0.0;   // ‖Ω_flᵀ Ω_fl‖
  double lambda = 0.0;  // ‖P B Bᵀ P‖
  double pfc_sq = 0.0;  // ‖P F C‖²
  double s_min = 0.0;   // λ_min(CᵀC + Q⁻¹ R₂ Q⁻¹)
};

Norms norms_of(const LyapunovContext& ctx) {
  Norms n;
  const int nl = ctx.leader_count;
  const int nf = static_cast<int>(ctx.omega.rows()) - nl;
  const Matrix ff = ctx.omega.bottomRightCorner(nf, nf);
  const Matrix fl = ctx.omega.bottomLeftCorner(nf, nl);
  n.r1_min = symmetric_eigenvalues(ctx.R1)(0);
  n.ff_sq = spectral_norm(ff * ff);
  n.fl_sq = spectral_norm(fl.transpose() * fl);
  n.lambda = spectral_norm(ctx.P * ctx.B * ctx.B.transpose() * ctx.P);
  if (ctx.mode == ProtocolMode::Output) {
    const double pfc = spectral_norm(ctx.P * ctx.F * ctx.C);
    n.pfc_sq = pfc * pfc;
    const Matrix qinv = ctx.Q.inverse();
    n.s_min = symmetric_eigenvalues(ctx.C.transpose() * ctx.C + qinv * ctx.R2 * qinv)(0);
  }
  return n;
}

struct Bounds {
  double weight1, weight3, weight4, offset1, offset2, offset3, offset4;
};

// Strict lower bounds implied by the given α₂ (and α₁, α₃ for the βs).
Bounds lower_bounds(const Norms& n, ProtocolMode mode, const LyapunovConstants& c) {
  const double a1 = c.weight[0], a2 = c.weight[1], a3 = c.weight[2];
  Bounds b{};
  if (mode == ProtocolMode::State) {
    b.weight1 = 3 * a2 / n.r1_min;
    b.weight3 = 2 * a2 / n.r1_min;
    b.weight4 = 0.0;
  } else {
    const double den = 2 * n.r1_min - 1;
    b.weight1 = den > 0 ? 6 * a2 / den : INFINITY;
    b.weight3 = den > 0 ? 4 * a2 / den : INFINITY;
    b.weight4 = std::max(4 * a1 * n.ff_sq * n.pfc_sq, 2 * a3 * n.pfc_sq + 4 * a1 * n.fl_sq * n.pfc_sq) / n.s_min;
  }
  b.offset1 = std::max(1.0, 8 * a1 / a2 - 1);
  b.offset2 = (4 * a1 / a2 + c.offset[0]) * n.ff_sq;
  b.offset3 = 3 * n.ff_sq + 4 * a1 / a2 * n.ff_sq * n.lambda;
  b.offset4 = 2 + a3 / a2 * n.lambda + 3 * n.fl_sq + 4 * a1 / a2 * n.fl_sq * n.lambda;
  return b;
}

void require(std::vector<std::string>& out, const char* name, double value, double bound) {
  if (!(value > bound)) {
    std::ostringstream os;
    os << name << " = " << value << " must exceed " << bound;
    out.push_back(os.str());
  }
}

}  // namespace

std::vector<std::string> check_lyapunov_constants(const LyapunovContext& ctx, const LyapunovConstants& c) {
  std::vector<std::string> out;
  if (!(c.weight[1] > 0)) {
    out.push_back("weight2 must be positive");
    return out;
  }
  const Norms n = norms_of(ctx);
  if (ctx.mode == ProtocolMode::Output && !(n.r1_min > 0.5)) {
    out.push_back("lambda_min(R1) must exceed 1/2 in output mode");
  }
  const Bounds b = lower_bounds(n, ctx.mode, c);
  require(out, "weight1", c.weight[0], b.weight1);
  require(out, "weight3", c.weight[2], b.weight3);
  if (ctx.mode == ProtocolMode::Output) require(out, "weight4", c.weight[3], b.weight4);
  require(out, "offset1", c.offset[0], b.offset1);
  require(out, "offset2", c.offset[1], b.offset2);
  require(out, "offset3", c.offset[2], b.offset3);
  require(out, "offset4", c.offset[3], b.offset4);
  return out;
}

LyapunovConstants admissible_constants(const LyapunovContext& ctx, double margin) {
  const Norms n = norms_of(ctx);
  LyapunovConstants c;
  c.weight[1] = 1.0;
  Bounds b = lower_bounds(n, ctx.mode, c);
  c.weight[0] = margin * b.weight1;
  c.weight[2] = margin * b.weight3;
  b = lower_bounds(n, ctx.mode, c);
  c.weight[3] = ctx.mode == ProtocolMode::Output ? margin * b.weight4 : 0.0;
  c.offset[0] = margin * b.offset1;
  b = lower_bounds(n, ctx.mode, c);
  c.offset[1] = margin * b.offset2;
  c.offset[2] = margin * b.offset3;
  c.offset[3] = margin * b.offset4;
  return c;
}

double lyapunov_value(const LyapunovContext& ctx, const LyapunovConstants& c, const TraceSample& s) {
  const int nl = ctx.leader_count;
  const int n = static_cast<int>(ctx.omega.rows());
  const int nf = n - nl;
  const bool output = ctx.mode == ProtocolMode::Output;
  const Matrix& x = output ? s.z : s.p;
  const Matrix ff = ctx.omega.bottomRightCorner(nf, nf);
  const Matrix fl = ctx.omega.bottomLeftCorner(nf, nl);

  const Matrix xi = ctx.omega.bottomRows(nf) * x;  // n_f×d
  const Matrix theta = ff * s.y + fl * ctx.v;     // n_f×m
  const Matrix el = x.topRows(nl) - ctx.targets.topRows(nl);

  double v1 = c.weight[0] * (xi * ctx.P * xi.transpose()).trace();
  v1 += c.weight[1] * (theta.transpose() * ff.ldlt().solve(theta)).trace();
  v1 += c.weight[2] * (el * ctx.P * el.transpose()).trace();

  double v2 = 0.0, v3 = 0.0;
  for (int i = 0; i < nf; ++i) {
    v2 += 0.5 * std::pow(s.coupling(i) - c.offset[0], 2);
    v3 += 0.5 * (std::pow(s.estimate_gain(i) - c.offset[1], 2) + std::pow(s.state_gain(i) - c.offset[2], 2));
  }
  for (int i = 0; i < nl; ++i) v3 += 0.5 * std::pow(s.leader_gain(i) - c.offset[3], 2);
  double value = v1 + c.weight[1] * (v2 + v3);

  if (output) {
    const Matrix delta = s.z - s.p;
    value += c.weight[3] * (delta * ctx.Q.inverse() * delta.transpose()).trace();
  }
  return value;
}

LyapunovReport lyapunov_monitor(const SimulationTrace& trace, const LyapunovContext& ctx,
                                const LyapunovConstants& c, double relative_tolerance) {
  const std::vector<std::string> bad = check_lyapunov_constants(ctx, c);
  if (!bad.empty()) {
    std::string msg;
    for (const auto& s : bad) msg += (msg.empty() ? "" : "; ") + s;
    throw InvalidConstants(msg);
  }
  const int nl = ctx.leader_count;
  const int nf = static_cast<int>(ctx.omega.rows()) - nl;
  const int idx = ctx.mode == ProtocolMode::Output ? 2 : 0;
  const double rate = ctx.trigger_offset[idx] * nl + ctx.trigger_offset[idx + 1] * nf;
  const double decay = std::min(ctx.trigger_decay[idx], ctx.trigger_decay[idx + 1]);
  auto budget = [&](double t) { return rate * std::exp(-decay * t); };

  LyapunovReport report;
  if (trace.samples.empty()) return report;
  double integral = 0.0;
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const TraceSample& s = trace.samples[k];
    if (k > 0) {
      const double t0 = trace.samples[k - 1].t;
      integral += 0.5 * (s.t - t0) * (budget(t0) + budget(s.t));
    }
    report.t.push_back(s.t);
    report.value.push_back(lyapunov_value(ctx, c, s));
    report.bound.push_back(report.value.front() + integral);
  }
  report.tolerance = relative_tolerance * report.value.front();
  report.max_excess = -INFINITY;
  for (std::size_t k = 0; k < report.value.size(); ++k) {
    const double excess = report.value[k] - report.bound[k];
    report.max_excess = std::max(report.max_excess, excess);
    if (excess > report.tolerance) report.violations.push_back(static_cast<int>(k));
  }
  return report;
}

}  // namespace afc
