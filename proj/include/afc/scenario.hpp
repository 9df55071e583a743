#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afc/affine_targets.hpp"
#include "afc/controller_design.hpp"
#include "afc/diagnostics.hpp"
#include "afc/formation_geometry.hpp"
#include "afc/simulator.hpp"

namespace afc {

/// Pass/fail bands a scenario declares for its own runs.
struct AcceptanceBands {
  double error_tolerance = 1e-2;
  double leader_frequency = 0.12;
  double follower_frequency = 0.12;
  double mean_frequency = 1.0;
  double target_tolerance = 1e-2;  ///< final follower position vs transform
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

struct ScenarioConfig {
  std::string name;
  std::optional<CaseId> case_id;
  PlantModel plant;
  NominalFormation formation;
  /// d×k lift from formation coordinates to states; empty when k = d.
  Matrix embedding;
  /// Inline stress; empty means "compute".
  std::optional<Matrix> stress;
  /// Rounded matrix shipped for cross-checks only.
  std::optional<Matrix> reference_stress;
  AffineTransform transform;
  /// Preset name when the transform came from the preset table.
  std::string transform_preset;
  Matrix R1;
  std::optional<Matrix> R2;
  SimulationOptions sim;
  std::uint64_t seed = 1;
  double init_low = -5.0;
  double init_high = 5.0;
  std::optional<InitialState> pinned_initial;
  bool zeno_audit = true;
  bool lyapunov = false;
  std::optional<LyapunovConstants> lyapunov_constants;
  AcceptanceBands acceptance;

  /// Embedding actually used (identity when none was given).
  Matrix effective_embedding() const;
};

/// Every violated constraint, in human-readable form (empty when valid).
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Parses and validates; throws ParseError on malformed documents and
/// ValidationError listing every violated constraint.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Bundled fixture id or path to a scenario document.
ScenarioConfig load_scenario(const std::string& id_or_path);
void save_scenario(const ScenarioConfig& config, const std::string& path);

/// Scenario with its stress, targets, design and closed loop resolved.
struct PreparedScenario {
  ScenarioConfig config;
  StressMatrix stress;
  TargetFormation targets;
  ControllerDesign design;
  std::shared_ptr<const ClosedLoop> loop;
};

PreparedScenario prepare_scenario(const ScenarioConfig& config);

InitialState initial_state(const PreparedScenario& scenario, std::uint64_t seed);

SimulationTrace run_scenario(const PreparedScenario& scenario, std::uint64_t seed,
                             const StepObserver& observer = {});
SimulationTrace run_scenario(const PreparedScenario& scenario, const StepObserver& observer = {});

// JSON helpers for matrices (row-major nested arrays).
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json design_to_json(const ControllerDesign& design);

}  // namespace afc
