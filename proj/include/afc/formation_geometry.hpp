#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afc/linalg.hpp"

namespace afc {

/// Undirected edge between agents `i` and `j` (0-based, i < j).
struct Edge {
  int i = 0;
  int j = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Graph plus nominal configuration. Leaders are agents 0..n_l-1, followers
/// the remaining ones. Positions are stored one agent per row (P(a)).
class NominalFormation {
 public:
  NominalFormation() = default;
  NominalFormation(int leader_count, Matrix positions, std::vector<Edge> edges);

  int agent_count() const { return static_cast<int>(positions_.rows()); }
  int leader_count() const { return leader_count_; }
  int follower_count() const { return agent_count() - leader_count_; }
  int dim() const { return static_cast<int>(positions_.cols()); }

  const Matrix& positions() const { return positions_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int agent) const { return neighbors_.at(agent); }
  bool has_edge(int a, int b) const;
  bool is_leader(int agent) const { return agent < leader_count_; }

  /// Augmented configuration [P(a), 1].
  Matrix augmented() const;

 private:
  int leader_count_ = 0;
  Matrix positions_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
};

/// Equilibrium stress matrix with its leader/follower partition.
class StressMatrix {
 public:
  StressMatrix() = default;
  StressMatrix(Matrix omega, int leader_count);

  const Matrix& omega() const { return omega_; }
  int agent_count() const { return static_cast<int>(omega_.rows()); }
  int leader_count() const { return leader_count_; }
  int follower_count() const { return agent_count() - leader_count_; }

  /// Edge weight w_ij = -[Ω]_ij for i != j.
  double weight(int i, int j) const { return -omega_(i, j); }
  /// Nonzero off-diagonal weights keyed by edge.
  std::vector<std::pair<Edge, double>> weights() const;

  Matrix ll() const { return omega_.topLeftCorner(leader_count_, leader_count_); }
  Matrix lf() const { return omega_.topRightCorner(leader_count_, follower_count()); }
  Matrix fl() const { return omega_.bottomLeftCorner(follower_count(), leader_count_); }
  Matrix ff() const { return omega_.bottomRightCorner(follower_count(), follower_count()); }

 private:
  Matrix omega_;
  int leader_count_ = 0;
};

/// Rank of the augmented matrix [aᵢᵀ, 1] of a point set (one point per row).
int affine_span_rank(const Matrix& points, double rel_tol = 1e-10);
/// Same, for a list of points; throws DimensionMismatch on ragged input.
int affine_span_rank(std::span<const Vector> points, double rel_tol = 1e-10);

struct StressSolverOptions {
  /// Cap on Newton iterations summed over all barrier stages.
  int max_iterations = 2000;
  /// Stop once the duality-gap bound (n-d-1+1)·μ falls below this.
  double gap_tolerance = 1e-11;
  /// Minimum acceptable (d+2)-th smallest eigenvalue relative to λ_max.
  double min_relative_gap = 1e-7;
};

/// Diagnostic output of the stress optimizer.
struct StressSolveInfo {
  int basis_dimension = 0;
  int iterations = 0;
  double barrier_weight = 0.0;
  double objective = 0.0;  ///< λ_{d+2} before trace normalization
};

/// Equilibrium stress with the formation's sparsity that is PSD with rank
/// n-d-1, normalized to trace(Ω) = n. Throws AssumptionViolated when the
/// leaders do not affinely span ℝ^d and NoValidStress when the optimizer
/// cannot reach a positive (d+2)-th eigenvalue.
StressMatrix compute_stress(const NominalFormation& formation,
                            const StressSolverOptions& opts = {},
                            StressSolveInfo* info = nullptr);

struct StressTolerances {
  double symmetry = 1e-10;
  double row_sum = 1e-10;
  double equilibrium = 1e-8;
  double sparsity = 1e-12;
  double psd_margin = -1e-9;
  double rank = 1e-7;

  /// Tolerances for solver output.
  static StressTolerances solver_grade() { return {}; }
  /// Tolerances for matrices copied from print (two decimals).
  static StressTolerances rounded();
};

struct StressCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct StressValidation {
  std::vector<StressCheck> checks;
  int rank = 0;
  int expected_rank = 0;
  double min_eigenvalue = 0.0;          ///< of the full symmetric part
  double min_compressed_eigenvalue = 0.0;
  double min_eig_ff = 0.0;
  Vector eigenvalues;

  bool passed() const;
  const StressCheck* find(const std::string& name) const;
};

/// Checks sparsity, symmetry, row sums, equilibrium residual ‖Ω P(a)‖_F,
/// PSD margin and rank. PSD margin and rank are measured on the
/// compression of Ω onto the orthogonal complement of range([P(a), 1]);
/// whatever Ω does inside that range is what the equilibrium check bounds.
StressValidation validate_stress(const Matrix& omega, const NominalFormation& formation,
                                 const StressTolerances& tol = {});

struct Localizability {
  bool localizable = false;
  bool ff_positive_definite = false;
  double min_eig_ff = 0.0;
};

Localizability localizability_check(const StressMatrix& stress, double rel_tol = 1e-9);

/// p*_f = -(Ω_ff⁻¹ Ω_fl ⊗ I) p*_l with one target per row. Throws
/// NotLocalizable when Ω_ff is singular.
Matrix follower_targets(const StressMatrix& stress, const Matrix& leader_targets);

}  // namespace afc
