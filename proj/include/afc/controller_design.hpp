#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afc/linalg.hpp"

namespace afc {

/// Linear agent model ṗ = A p + B u, q = C p. C may be empty when only the
/// state-feedback protocol is used.
struct PlantModel {
  Matrix A;
  Matrix B;
  Matrix C;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }
  bool has_output() const { return C.size() > 0; }

  /// Throws DimensionMismatch on inconsistent shapes or rank(B) != m.
  void validate() const;
};

enum class CompensationMode { FullRowRank, FullColumnRank, Infeasible };

std::string to_string(CompensationMode mode);
CompensationMode compensation_mode_from_string(const std::string& s);

/// Stabilizing solution of P A + Aᵀ P - P B Bᵀ P + R = 0.
///
/// The stable invariant subspace of the Hamiltonian [A, -BBᵀ; -R, -Aᵀ] is
/// read off an ordered complex Schur form; a few Newton (Kleinman) steps
/// then polish the residual. Throws NotStabilizable when a PBH test fails
/// and NoStabilizingSolution when the Hamiltonian has eigenvalues on the
/// imaginary axis.
Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& R);

/// Frobenius norm of P A + Aᵀ P - P B Bᵀ P + R.
double care_residual(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P);

/// PBH test: min singular value of [A - λI, B] over eigenvalues with
/// Re λ >= -1e-9. Returns +inf when A has no such eigenvalue.
double stabilizability_margin(const Matrix& A, const Matrix& B);
bool is_stabilizable(const Matrix& A, const Matrix& B, double threshold = 1e-8);
bool is_detectable(const Matrix& A, const Matrix& C, double threshold = 1e-8);

struct StateFeedbackDesign {
  Matrix P;
  Matrix K;  ///< K = -Bᵀ P
};

struct ObserverDesign {
  Matrix Q;
  Matrix F;  ///< F = -Q Cᵀ
  std::vector<std::string> warnings;
};

StateFeedbackDesign design_state_feedback(const PlantModel& plant, const Matrix& R1);

/// Observer gain from the dual CARE. `lambda_min_R1` only drives a warning
/// when the output-feedback certificate λ_min(R₁) > 1/2 does not hold.
ObserverDesign design_observer(const PlantModel& plant, const Matrix& R2, double lambda_min_R1);

struct Compensation {
  Matrix v;  ///< one leader per row (n_l × m)
  CompensationMode mode = CompensationMode::Infeasible;
  std::vector<double> residuals;  ///< ‖U₂ A p*_i‖ per leader (zero in row-rank mode)
};

/// Compensation terms making every leader target an equilibrium of the
/// closed loop, (A + BK) p*_i + B v_i = 0, without throwing; mode is
/// Infeasible when some target cannot be held.
Compensation assess_compensation(const PlantModel& plant, const Matrix& K,
                                 const Matrix& leader_targets, double tol = 1e-9);

/// As assess_compensation but throws InfeasibleTarget listing the leaders
/// whose targets violate U₂ A p*_i = 0.
Compensation compensation_terms(const PlantModel& plant, const Matrix& K,
                                const Matrix& leader_targets, double tol = 1e-9);

/// Everything the two protocols need from the design step.
struct ControllerDesign {
  Matrix A, B, C;
  Matrix P, K;
  std::optional<Matrix> Q, F;
  Matrix R1, R2;
  Matrix v;
  CompensationMode mode = CompensationMode::Infeasible;
  std::vector<std::string> warnings;

  /// Λ = P B Bᵀ P.
  Matrix gain_gram() const { return P * B * B.transpose() * P; }
};

/// Runs design_state_feedback, optionally design_observer (when R2 is
/// given), and compensation_terms for the leader targets.
ControllerDesign design_controller(const PlantModel& plant, const Matrix& R1,
                                   const std::optional<Matrix>& R2,
                                   const Matrix& leader_targets);

}  // namespace afc
