#include "afc/controller_design.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "afc/errors.hpp"

namespace afc {
namespace {

using Complex = std::complex<double>;

double min_singular_value(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular T,
// keeping T = Uᴴ H U.
void swap_schur_pair(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k) {
  const Complex a = t(k, k);
  const Complex b = t(k, k + 1);
  const Complex c = t(k + 1, k + 1);
  // Eigenvector of the 2x2 block for eigenvalue c.
  Complex x1 = b;
  Complex x2 = c - a;
  const double norm = std::sqrt(std::norm(x1) + std::norm(x2));
  if (norm == 0.0) return;
  x1 /= norm;
  x2 /= norm;
  Eigen::Matrix2cd z;
  z << x1, -std::conj(x2), x2, std::conj(x1);
  const Eigen::Index n = t.rows();
  t.block(k, 0, 2, n) = z.adjoint() * t.block(k, 0, 2, n);
  t.block(0, k, n, 2) = t.block(0, k, n, 2) * z;
  u.block(0, k, n, 2) = u.block(0, k, n, 2) * z;
  t(k + 1, k) = 0.0;
}

Matrix solve_care_impl(const Matrix& A, const Matrix& B, const Matrix& R, bool dual) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || R.rows() != n || R.cols() != n) {
    throw DimensionMismatch("solve_care: A must be square and B, R conform to it");
  }
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, R.norm())) {
    throw DimensionMismatch("solve_care: R must be symmetric");
  }
  if (symmetric_eigenvalues(R)(0) <= 0.0) {
    throw DimensionMismatch("solve_care: R must be positive definite");
  }
  if (!is_stabilizable(A, B)) {
    if (dual) throw NotDetectable("(A, C) fails the PBH detectability test");
    throw NotStabilizable("(A, B) fails the PBH stabilizability test");
  }

  const Matrix G = B * B.transpose();
  Matrix H(2 * n, 2 * n);
  H << A, -G, -R, -A.transpose();

  Eigen::ComplexSchur<ComplexMatrix> schur(H.cast<Complex>());
  ComplexMatrix t = schur.matrixT();
  ComplexMatrix u = schur.matrixU();

  const double axis_tol = 1e-9 * std::max(1.0, H.norm());
  Eigen::Index stable = 0;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const double re = t(k, k).real();
    if (std::abs(re) <= axis_tol) {
      std::ostringstream os;
      os << "Hamiltonian eigenvalue " << t(k, k) << " lies on the imaginary axis";
      throw NoStabilizingSolution(os.str());
    }
    if (re < 0) ++stable;
  }
  if (stable != n) {
    throw NoStabilizingSolution("Hamiltonian has " + std::to_string(stable) +
                                " stable eigenvalues, expected " + std::to_string(n));
  }

  // Bubble the stable eigenvalues to the leading block.
  for (bool swapped = true; swapped;) {
    swapped = false;
    for (Eigen::Index k = 0; k + 1 < 2 * n; ++k) {
      if (t(k, k).real() > 0 && t(k + 1, k + 1).real() < 0) {
        swap_schur_pair(t, u, k);
        swapped = true;
      }
    }
  }

  const ComplexMatrix u1 = u.topLeftCorner(n, n);
  const ComplexMatrix u2 = u.bottomLeftCorner(n, n);
  Eigen::FullPivLU<ComplexMatrix> lu(u1);
  if (!lu.isInvertible()) throw NoStabilizingSolution("stable subspace is not a graph over the state");
  const ComplexMatrix pc = u2 * lu.inverse();
  Matrix P = pc.real();
  P = 0.5 * (P + P.transpose());

  // Newton refinement: solve (A - G P)ᵀ X + X (A - G P) = -(R + P G P).
  double residual = care_residual(A, B, R, P);
  for (int iter = 0; iter < 5 && residual > 1e-13 * std::max(1.0, R.norm()); ++iter) {
    const Matrix acl = A - G * P;
    const Matrix next = solve_lyapunov(acl, R + P * G * P);
    const double next_residual = care_residual(A, B, R, next);
    if (!(next_residual < residual)) break;
    P = next;
    residual = next_residual;
  }

  if (spectral_abscissa(A - G * P) >= 0.0) {
    throw NoStabilizingSolution("closed loop A - BBᵀP is not Hurwitz");
  }
  return P;
}

}  // namespace

void PlantModel::validate() const {
  const Eigen::Index d = A.rows();
  if (A.cols() != d || d == 0) throw DimensionMismatch("A must be square and non-empty");
  if (B.rows() != d || B.cols() == 0) throw DimensionMismatch("B must have d rows and m > 0 columns");
  if (numerical_rank(B) != B.cols()) {
    throw DimensionMismatch("B must have full column rank (rank(B) = m)");
  }
  if (C.size() > 0 && C.cols() != d) throw DimensionMismatch("C must have d columns");
}

std::string to_string(CompensationMode mode) {
  switch (mode) {
    case CompensationMode::FullRowRank: return "full-row-rank";
    case CompensationMode::FullColumnRank: return "full-column-rank";
    case CompensationMode::Infeasible: return "infeasible";
  }
  return "infeasible";
}

CompensationMode compensation_mode_from_string(const std::string& s) {
  if (s == "full-row-rank") return CompensationMode::FullRowRank;
  if (s == "full-column-rank") return CompensationMode::FullColumnRank;
  if (s == "infeasible") return CompensationMode::Infeasible;
  throw ParseError("unknown compensation mode '" + s + "'");
}

double care_residual(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
  return (P * A + A.transpose() * P - P * B * B.transpose() * P + R).norm();
}

double stabilizability_margin(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A, false);
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lambda = es.eigenvalues()(k);
    if (lambda.real() < -1e-9) continue;
    ComplexMatrix pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<Complex>();
    margin = std::min(margin, min_singular_value(pbh));
  }
  return margin;
}

bool is_stabilizable(const Matrix& A, const Matrix& B, double threshold) {
  Matrix ab(A.rows(), A.cols() + B.cols());
  ab << A, B;
  return stabilizability_margin(A, B) > threshold * std::max(1.0, spectral_norm(ab));
}

bool is_detectable(const Matrix& A, const Matrix& C, double threshold) {
  return is_stabilizable(A.transpose(), C.transpose(), threshold);
}

Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& R) {
  return solve_care_impl(A, B, R, false);
}

StateFeedbackDesign design_state_feedback(const PlantModel& plant, const Matrix& R1) {
  plant.validate();
  StateFeedbackDesign out;
  out.P = solve_care(plant.A, plant.B, R1);
  out.K = -plant.B.transpose() * out.P;
  return out;
}

ObserverDesign design_observer(const PlantModel& plant, const Matrix& R2, double lambda_min_R1) {
  plant.validate();
  if (!plant.has_output()) throw DimensionMismatch("design_observer needs an output matrix C");
  ObserverDesign out;
  out.Q = solve_care_impl(plant.A.transpose(), plant.C.transpose(), R2, true);
  out.F = -out.Q * plant.C.transpose();
  if (!(lambda_min_R1 > 0.5)) {
    std::ostringstream os;
    os << "lambda_min(R1) = " << lambda_min_R1
       << " does not satisfy lambda_min(R1) > 1/2; the output-feedback certificate does not apply";
    out.warnings.push_back(os.str());
  }
  return out;
}

Compensation assess_compensation(const PlantModel& plant, const Matrix& K,
                                 const Matrix& leader_targets, double tol) {
  const Eigen::Index d = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  if (leader_targets.cols() != d) throw DimensionMismatch("leader targets must have d columns");
  if (K.rows() != m || K.cols() != d) throw DimensionMismatch("K must be m x d");

  const Matrix acl = plant.A + plant.B * K;
  const Eigen::Index nl = leader_targets.rows();
  Compensation out;
  out.v.resize(nl, m);
  out.residuals.assign(static_cast<std::size_t>(nl), 0.0);

  if (numerical_rank(plant.B) == d) {
    // B Bᵀ invertible: right inverse Bᵀ (B Bᵀ)⁻¹.
    out.mode = CompensationMode::FullRowRank;
    const Matrix bt = plant.B.transpose();
    const Matrix right_inverse = bt * (plant.B * bt).ldlt().solve(Matrix::Identity(d, d));
    for (Eigen::Index i = 0; i < nl; ++i) {
      out.v.row(i) = (-right_inverse * acl * leader_targets.row(i).transpose()).transpose();
    }
    return out;
  }

  out.mode = CompensationMode::FullColumnRank;
  const Matrix bt = plant.B.transpose();
  const Matrix u1 = (bt * plant.B).ldlt().solve(bt);
  const Matrix u2 = range_complement(plant.B).transpose();
  const double scale = std::max(1.0, spectral_norm(plant.A));
  for (Eigen::Index i = 0; i < nl; ++i) {
    const Vector target = leader_targets.row(i).transpose();
    const double res = (u2 * plant.A * target).norm();
    out.residuals[static_cast<std::size_t>(i)] = res;
    if (res > tol * scale * std::max(1.0, target.norm())) out.mode = CompensationMode::Infeasible;
    out.v.row(i) = (-u1 * acl * target).transpose();
  }
  return out;
}

Compensation compensation_terms(const PlantModel& plant, const Matrix& K,
                                const Matrix& leader_targets, double tol) {
  Compensation out = assess_compensation(plant, K, leader_targets, tol);
  if (out.mode != CompensationMode::Infeasible) return out;
  std::vector<std::pair<int, double>> offenders;
  const double scale = std::max(1.0, spectral_norm(plant.A));
  std::ostringstream os;
  os << "U2 A p* != 0 for leader(s)";
  for (std::size_t i = 0; i < out.residuals.size(); ++i) {
    const double tnorm = leader_targets.row(static_cast<Eigen::Index>(i)).norm();
    if (out.residuals[i] > tol * scale * std::max(1.0, tnorm)) {
      offenders.emplace_back(static_cast<int>(i), out.residuals[i]);
      os << ' ' << i + 1 << " (" << out.residuals[i] << ")";
    }
  }
  throw InfeasibleTarget(os.str(), std::move(offenders));
}

ControllerDesign design_controller(const PlantModel& plant, const Matrix& R1,
                                   const std::optional<Matrix>& R2,
                                   const Matrix& leader_targets) {
  ControllerDesign out;
  out.A = plant.A;
  out.B = plant.B;
  out.C = plant.C;
  out.R1 = R1;
  const StateFeedbackDesign sf = design_state_feedback(plant, R1);
  out.P = sf.P;
  out.K = sf.K;
  if (R2) {
    out.R2 = *R2;
    ObserverDesign obs = design_observer(plant, *R2, symmetric_eigenvalues(R1)(0));
    out.Q = obs.Q;
    out.F = obs.F;
    out.warnings = std::move(obs.warnings);
  }
  const Compensation comp = compensation_terms(plant, out.K, leader_targets);
  out.v = comp.v;
  out.mode = comp.mode;
  return out;
}

}  // namespace afc
