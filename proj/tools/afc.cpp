// Command-line front end: design, stress validation, simulation, reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "afc/diagnostics.hpp"
#include "afc/errors.hpp"
#include "afc/fixtures.hpp"
#include "afc/scenario.hpp"
#include "afc/trace_io.hpp"

namespace fs = std::filesystem;
using namespace afc;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::string> integrator;
  std::optional<std::string> mode;
  std::optional<int> decimation;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed for the random initial states");
    cmd->add_option("--dt", dt, "Integration step");
    cmd->add_option("--t-end", t_end, "Horizon");
    cmd->add_option("--integrator", integrator, "euler or rk4");
    cmd->add_option("--mode", mode, "state or output");
    cmd->add_option("--decimation", decimation, "Record every k-th grid point");
  }

  void apply(ScenarioConfig& c) const {
    if (seed) c.seed = *seed;
    if (dt) c.sim.dt = *dt;
    if (t_end) c.sim.t_end = *t_end;
    if (integrator) c.sim.integrator = integrator_from_string(*integrator);
    if (mode) c.sim.mode = protocol_mode_from_string(*mode);
    if (decimation) c.sim.decimation = *decimation;
    const auto violations = validate_scenario(c);
    if (!violations.empty()) throw ValidationError(violations);
  }
};

std::string default_output_root() {
  if (const char* env = std::getenv("AFC_OUTPUT_DIR"); env && *env) return env;
  return "afc-out";
}

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (Eigen::Index k = 0; k < m.cols(); ++k) os << std::setw(11) << std::setprecision(5) << m(i, k);
    os << '\n';
  }
}

int cmd_design(const std::string& scenario, const Overrides& ov, const std::string& out) {
  ScenarioConfig c = load_scenario(scenario);
  ov.apply(c);
  const TargetFormation targets = target_formation(c.formation, c.effective_embedding(), c.transform);
  const std::optional<Matrix> r2 = c.sim.mode == ProtocolMode::Output ? c.R2 : std::optional<Matrix>{};
  const ControllerDesign d = design_controller(c.plant, c.R1, r2, targets.leaders);
  print_matrix(std::cout, "P", d.P);
  print_matrix(std::cout, "K", d.K);
  if (d.Q) print_matrix(std::cout, "Q", *d.Q);
  if (d.F) print_matrix(std::cout, "F", *d.F);
  print_matrix(std::cout, "v (one leader per row)", d.v);
  std::cout << "compensation mode: " << to_string(d.mode) << '\n';
  std::cout << "spectral abscissa of A+BK: " << spectral_abscissa(d.A + d.B * d.K) << '\n';
  if (d.F) std::cout << "spectral abscissa of A+FC: " << spectral_abscissa(d.A + *d.F * d.C) << '\n';
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write '" + out + "'");
    f << design_to_json(d).dump(2) << '\n';
    std::cout << "design written to " << out << '\n';
  }
  return 0;
}

int cmd_validate_stress(const std::string& scenario, const std::string& matrix_path, bool reference,
                        std::optional<double> tol_eq) {
  const ScenarioConfig c = load_scenario(scenario);
  Matrix omega;
  StressTolerances tol = StressTolerances::solver_grade();
  std::string source;
  if (!matrix_path.empty()) {
    omega = read_matrix_csv(matrix_path);
    source = matrix_path;
  } else if (reference) {
    if (!c.reference_stress) throw ValidationError({"scenario has no reference stress"});
    omega = *c.reference_stress;
    tol = StressTolerances::rounded();
    source = "reference stress";
  } else if (c.stress) {
    omega = *c.stress;
    source = "inline stress";
  } else {
    omega = compute_stress(c.formation).omega();
    source = "computed stress";
  }
  if (tol_eq) tol.equilibrium = *tol_eq;
  if (omega.rows() != c.formation.agent_count() || omega.cols() != c.formation.agent_count()) {
    throw DimensionMismatch("stress matrix must be " + std::to_string(c.formation.agent_count()) + " square");
  }
  const StressValidation v = validate_stress(omega, c.formation, tol);
  std::cout << "validating " << source << " against " << c.name << '\n';
  for (const auto& chk : v.checks) {
    std::cout << "  " << std::left << std::setw(12) << chk.name << (chk.passed ? "pass" : "FAIL") << "  value "
              << chk.value << "  threshold " << chk.threshold << '\n';
  }
  std::cout << "  rank " << v.rank << " (expected " << v.expected_rank << "), min eig of follower block "
            << v.min_eig_ff << '\n';
  std::cout << (v.passed() ? "stress valid" : "stress INVALID") << '\n';
  return v.passed() ? 0 : 1;
}

int cmd_compute_stress(const std::string& scenario, const std::string& out) {
  const ScenarioConfig c = load_scenario(scenario);
  StressSolveInfo info;
  const StressMatrix s = compute_stress(c.formation, {}, &info);
  std::cout << "stress space dimension " << info.basis_dimension << ", Newton iterations " << info.iterations
            << '\n';
  const Vector ev = symmetric_eigenvalues(s.ff());
  std::cout << "follower block eigenvalues:";
  for (Eigen::Index i = 0; i < ev.size(); ++i) std::cout << ' ' << ev(i);
  std::cout << '\n';
  if (out.empty()) {
    std::cout << std::setprecision(17);
    for (Eigen::Index i = 0; i < s.omega().rows(); ++i) {
      for (Eigen::Index k = 0; k < s.omega().cols(); ++k) std::cout << (k ? "," : "") << s.omega()(i, k);
      std::cout << '\n';
    }
  } else {
    write_matrix_csv(s.omega(), out);
    std::cout << "stress written to " << out << '\n';
  }
  return 0;
}

struct RunOutput {
  SimulationTrace trace;
  std::optional<ZenoReport> zeno;
  std::optional<LyapunovReport> lyapunov;
};

RunOutput run_with_diagnostics(const PreparedScenario& prep, std::uint64_t seed, bool lyapunov) {
  RunOutput out;
  out.trace = run_scenario(prep, seed);
  if (prep.config.zeno_audit) out.zeno = zeno_audit(out.trace);
  if (lyapunov || prep.config.lyapunov) {
    const LyapunovContext ctx = make_lyapunov_context(prep.design, *prep.loop, prep.config.sim);
    const LyapunovConstants k =
        prep.config.lyapunov_constants ? *prep.config.lyapunov_constants : admissible_constants(ctx);
    out.lyapunov = lyapunov_monitor(out.trace, ctx, k);
  }
  return out;
}

int cmd_simulate(const std::string& scenario, const Overrides& ov, std::string out, bool lyapunov) {
  ScenarioConfig c = load_scenario(scenario);
  ov.apply(c);
  const PreparedScenario prep = prepare_scenario(c);
  for (const auto& w : prep.design.warnings) std::cerr << "warning: " << w << '\n';
  const RunOutput run = run_with_diagnostics(prep, c.seed, lyapunov);
  if (out.empty()) out = (fs::path(default_output_root()) / c.name).string();
  const TraceFiles files = emit_trace(run.trace, out, run.zeno, run.lyapunov, c.name);
  std::cout << report_trace_dir(out);
  std::cout << "trace written to " << out << '\n';
  std::cout << "states checksum " << file_checksum(files.states) << '\n';
  return 0;
}

int cmd_report(const std::string& dir) {
  std::cout << report_trace_dir(dir);
  return 0;
}

int cmd_sweep(const std::vector<std::string>& scenarios, std::vector<std::uint64_t> seeds, const Overrides& ov,
              unsigned jobs) {
  struct Job {
    std::size_t scenario;
    std::uint64_t seed;
  };
  std::vector<PreparedScenario> prepared;
  for (const auto& s : scenarios) {
    ScenarioConfig c = load_scenario(s);
    ov.apply(c);
    prepared.push_back(prepare_scenario(c));
  }
  std::vector<Job> work;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    const auto& list = seeds.empty() ? prepared[i].config.acceptance.seeds : seeds;
    for (auto seed : list) work.push_back({i, seed});
  }
  std::vector<std::string> lines(work.size());
  std::vector<std::string> errors(work.size());
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= work.size()) return;
        k = next++;
      }
      const PreparedScenario& prep = prepared[work[k].scenario];
      try {
        const RunOutput run = run_with_diagnostics(prep, work[k].seed, false);
        const SimulationSummary& s = run.trace.summary;
        double max_freq = 0.0;
        for (const auto& a : s.agents) max_freq = std::max(max_freq, a.frequency);
        std::ostringstream os;
        os << std::left << std::setw(20) << prep.config.name << std::setw(6) << work[k].seed << std::scientific
           << std::setprecision(3) << std::setw(12) << s.final_errors.formation << std::setw(12)
           << s.final_errors.leader << std::setw(12) << s.final_errors.observer << std::fixed << std::setprecision(2)
           << std::setw(8) << 100 * s.mean_frequency << std::setw(8) << 100 * max_freq
           << (run.zeno && !run.zeno->clean() ? "zeno-suspect" : "");
        lines[k] = os.str();
      } catch (const std::exception& e) {
        errors[k] = prep.config.name + " seed " + std::to_string(work[k].seed) + ": " + e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::cout << std::left << std::setw(20) << "scenario" << std::setw(6) << "seed" << std::setw(12) << "formation"
            << std::setw(12) << "leader" << std::setw(12) << "observer" << std::setw(8) << "mean%" << std::setw(8)
            << "max%" << '\n';
  int failures = 0;
  for (std::size_t k = 0; k < work.size(); ++k) {
    if (!errors[k].empty()) {
      std::cerr << "error: " << errors[k] << '\n';
      ++failures;
    } else {
      std::cout << lines[k] << '\n';
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_export(const std::string& id, const std::string& out, bool list) {
  if (list) {
    for (const auto& f : fixture_ids()) std::cout << f << '\n';
    return 0;
  }
  const ScenarioConfig c = load_scenario(id);
  if (out.empty()) {
    std::cout << scenario_to_json(c).dump(2) << '\n';
  } else {
    save_scenario(c, out);
    std::cout << "scenario written to " << out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive event-triggered affine formation control toolkit"};
  app.require_subcommand(1);

  std::string scenario, out, matrix_path, dir, fixture_id;
  bool reference = false, lyapunov = false, list = false;
  std::optional<double> tol_eq;
  std::vector<std::string> scenarios;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  Overrides design_ov, sim_ov, sweep_ov;

  auto* design = app.add_subcommand("design", "Solve the Riccati equations and compensation terms");
  design->add_option("scenario", scenario, "Fixture id or scenario file")->required();
  design->add_option("-o,--out", out, "Write the design document here");
  design_ov.add_to(design);

  auto* vstress = app.add_subcommand("validate-stress", "Check a stress matrix against a formation");
  vstress->add_option("scenario", scenario, "Fixture id or scenario file")->required();
  vstress->add_option("--matrix", matrix_path, "Stress matrix CSV to check");
  vstress->add_flag("--reference", reference, "Check the scenario's rounded reference stress");
  vstress->add_option("--tol-eq", tol_eq, "Equilibrium residual tolerance");

  auto* cstress = app.add_subcommand("compute-stress", "Compute an optimal stress for a formation");
  cstress->add_option("scenario", scenario, "Fixture id or scenario file")->required();
  cstress->add_option("-o,--out", out, "CSV output path");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its trace");
  simulate->add_option("scenario", scenario, "Fixture id or scenario file")->required();
  simulate->add_option("-o,--out", out, "Trace directory (default $AFC_OUTPUT_DIR/<name>)");
  simulate->add_flag("--lyapunov", lyapunov, "Evaluate the Lyapunov bound");
  sim_ov.add_to(simulate);

  auto* report = app.add_subcommand("report", "Summarize a trace directory");
  report->add_option("dir", dir, "Trace directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run scenarios over several seeds concurrently");
  sweep->add_option("scenarios", scenarios, "Fixture ids or scenario files")->required();
  sweep->add_option("--seeds", seeds, "Seeds (default: each scenario's acceptance seeds)")->delimiter(',');
  sweep->add_option("-j,--jobs", jobs, "Worker threads");
  sweep_ov.add_to(sweep);

  auto* exportf = app.add_subcommand("export-fixture", "Write a bundled scenario as a document");
  exportf->add_option("id", fixture_id, "Fixture id");
  exportf->add_option("-o,--out", out, "Output path (default stdout)");
  exportf->add_flag("--list", list, "List fixture ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) return cmd_design(scenario, design_ov, out);
    if (*vstress) return cmd_validate_stress(scenario, matrix_path, reference, tol_eq);
    if (*cstress) return cmd_compute_stress(scenario, out);
    if (*simulate) return cmd_simulate(scenario, sim_ov, out, lyapunov);
    if (*report) return cmd_report(dir);
    if (*sweep) return cmd_sweep(scenarios, seeds, sweep_ov, jobs);
    if (*exportf) {
      if (!list && fixture_id.empty()) throw ValidationError({"export-fixture needs an id or --list"});
      return cmd_export(fixture_id, out, list);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
