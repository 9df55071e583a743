#include "afc/formation_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "afc/errors.hpp"

namespace afc {

NominalFormation::NominalFormation(int leader_count, Matrix positions, std::vector<Edge> edges)
    : leader_count_(leader_count), positions_(std::move(positions)) {
  const int n = agent_count();
  if (leader_count_ < 1 || leader_count_ >= n) {
    std::ostringstream os;
    os << "need 1 <= n_l < n, got n_l=" << leader_count_ << ", n=" << n;
    throw DimensionMismatch(os.str());
  }
  if (dim() < 1) throw DimensionMismatch("formation dimension must be positive");
  std::set<Edge> unique;
  for (Edge e : edges) {
    if (e.i == e.j) throw DimensionMismatch("self-loop on agent " + std::to_string(e.i + 1));
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      throw DimensionMismatch("edge references agent outside 1.." + std::to_string(n));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    unique.insert(e);
  }
  edges_.assign(unique.begin(), unique.end());
  neighbors_.assign(n, {});
  for (const Edge& e : edges_) {
    neighbors_[e.i].push_back(e.j);
    neighbors_[e.j].push_back(e.i);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

bool NominalFormation::has_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

Matrix NominalFormation::augmented() const {
  Matrix out(agent_count(), dim() + 1);
  out.leftCols(dim()) = positions_;
  out.col(dim()).setOnes();
  return out;
}

StressMatrix::StressMatrix(Matrix omega, int leader_count)
    : omega_(std::move(omega)), leader_count_(leader_count) {
  if (omega_.rows() != omega_.cols()) throw DimensionMismatch("stress matrix must be square");
  if (leader_count_ < 1 || leader_count_ >= omega_.rows()) {
    throw DimensionMismatch("stress partition needs 1 <= n_l < n");
  }
}

std::vector<std::pair<Edge, double>> StressMatrix::weights() const {
  std::vector<std::pair<Edge, double>> out;
  for (int i = 0; i < agent_count(); ++i) {
    for (int j = i + 1; j < agent_count(); ++j) {
      if (omega_(i, j) != 0.0) out.emplace_back(Edge{i, j}, -omega_(i, j));
    }
  }
  return out;
}

int affine_span_rank(const Matrix& points, double rel_tol) {
  if (points.rows() == 0) throw DimensionMismatch("affine_span_rank needs at least one point");
  Matrix aug(points.rows(), points.cols() + 1);
  aug.leftCols(points.cols()) = points;
  aug.col(points.cols()).setOnes();
  return numerical_rank(aug, rel_tol);
}

int affine_span_rank(std::span<const Vector> points, double rel_tol) {
  if (points.empty()) throw DimensionMismatch("affine_span_rank needs at least one point");
  const Eigen::Index d = points.front().size();
  Matrix rows(static_cast<Eigen::Index>(points.size()), d);
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() != d) {
      throw DimensionMismatch("point " + std::to_string(k + 1) + " has dimension " +
                              std::to_string(points[k].size()) + ", expected " +
                              std::to_string(d));
    }
    rows.row(static_cast<Eigen::Index>(k)) = points[k].transpose();
  }
  return affine_span_rank(rows, rel_tol);
}

StressTolerances StressTolerances::rounded() {
  StressTolerances t;
  t.symmetry = 5e-3;
  t.row_sum = 5e-2;
  t.equilibrium = 0.15;
  t.sparsity = 0.0;
  t.psd_margin = -1e-6;
  t.rank = 1e-7;
  return t;
}

bool StressValidation::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const StressCheck& c) { return c.passed; });
}

const StressCheck* StressValidation::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

StressValidation validate_stress(const Matrix& omega, const NominalFormation& formation,
                                 const StressTolerances& tol) {
  const int n = formation.agent_count();
  const int d = formation.dim();
  if (omega.rows() != n || omega.cols() != n) {
    throw DimensionMismatch("stress is " + std::to_string(omega.rows()) + "x" +
                            std::to_string(omega.cols()) + ", formation has " +
                            std::to_string(n) + " agents");
  }
  StressValidation report;
  report.expected_rank = n - d - 1;

  double off_pattern = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !formation.has_edge(i, j)) off_pattern = std::max(off_pattern, std::abs(omega(i, j)));
    }
  }
  report.checks.push_back({"sparsity", off_pattern <= tol.sparsity, off_pattern, tol.sparsity});

  const double asym = (omega - omega.transpose()).cwiseAbs().maxCoeff();
  report.checks.push_back({"symmetry", asym <= tol.symmetry, asym, tol.symmetry});

  const double row_sum = omega.rowwise().sum().cwiseAbs().maxCoeff();
  report.checks.push_back({"row_sum", row_sum <= tol.row_sum, row_sum, tol.row_sum});

  const double residual = (omega * formation.positions()).norm();
  report.checks.push_back({"equilibrium", residual <= tol.equilibrium, residual, tol.equilibrium});

  const Matrix sym = 0.5 * (omega + omega.transpose());
  report.eigenvalues = symmetric_eigenvalues(sym);
  report.min_eigenvalue = report.eigenvalues(0);

  const Matrix complement = range_complement(formation.augmented());
  const Matrix compressed = complement.transpose() * sym * complement;
  Vector ceig = compressed.size() ? symmetric_eigenvalues(compressed) : Vector();
  report.min_compressed_eigenvalue = ceig.size() ? ceig(0) : 0.0;
  report.checks.push_back({"psd", ceig.size() == 0 || ceig(0) >= tol.psd_margin,
                           report.min_compressed_eigenvalue, tol.psd_margin});

  const double scale = std::max(1.0, ceig.size() ? ceig.cwiseAbs().maxCoeff() : 0.0);
  report.rank = static_cast<int>((ceig.array().abs() > tol.rank * scale).count());
  report.checks.push_back({"rank", report.rank == report.expected_rank,
                           static_cast<double>(report.rank),
                           static_cast<double>(report.expected_rank)});

  const int nl = formation.leader_count();
  const Matrix ff = sym.bottomRightCorner(n - nl, n - nl);
  report.min_eig_ff = symmetric_eigenvalues(ff)(0);
  return report;
}

Localizability localizability_check(const StressMatrix& stress, double rel_tol) {
  const Matrix ff = stress.ff();
  const Vector eig = symmetric_eigenvalues(ff);
  Localizability out;
  out.min_eig_ff = eig(0);
  const double scale = std::max(1.0, eig.cwiseAbs().maxCoeff());
  Eigen::JacobiSVD<Matrix> svd(ff);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  out.localizable = smin > rel_tol * scale;
  out.ff_positive_definite = eig(0) > rel_tol * scale;
  return out;
}

Matrix follower_targets(const StressMatrix& stress, const Matrix& leader_targets) {
  if (leader_targets.rows() != stress.leader_count()) {
    throw DimensionMismatch("expected " + std::to_string(stress.leader_count()) +
                            " leader targets, got " + std::to_string(leader_targets.rows()));
  }
  const Localizability loc = localizability_check(stress);
  if (!loc.localizable) {
    throw NotLocalizable("Ω_ff is singular (min eigenvalue " + std::to_string(loc.min_eig_ff) + ")");
  }
  const Matrix ff = stress.ff();
  return -ff.fullPivLu().solve(stress.fl() * leader_targets);
}

}  // namespace afc
