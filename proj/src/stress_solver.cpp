#include <cmath>
#include <limits>
#include <sstream>

#include "afc/errors.hpp"
#include "afc/formation_geometry.hpp"

namespace afc {
namespace {

// Columns: one per edge; rows: agent-major equilibrium equations
// Σ_j w_ij (a_i - a_j) = 0.
Matrix equilibrium_operator(const NominalFormation& f) {
  const int n = f.agent_count();
  const int d = f.dim();
  const auto& edges = f.edges();
  Matrix op = Matrix::Zero(n * d, static_cast<Eigen::Index>(edges.size()));
  const Matrix& a = f.positions();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    const auto col = static_cast<Eigen::Index>(k);
    op.block(i * d, col, d, 1) = (a.row(i) - a.row(j)).transpose();
    op.block(j * d, col, d, 1) = (a.row(j) - a.row(i)).transpose();
  }
  return op;
}

Matrix stress_from_weights(const NominalFormation& f, const Vector& w) {
  const int n = f.agent_count();
  Matrix omega = Matrix::Zero(n, n);
  const auto& edges = f.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    const double wk = w(static_cast<Eigen::Index>(k));
    omega(i, j) -= wk;
    omega(j, i) -= wk;
    omega(i, i) += wk;
    omega(j, j) += wk;
  }
  return omega;
}

}  // namespace

StressMatrix compute_stress(const NominalFormation& formation, const StressSolverOptions& opts,
                            StressSolveInfo* info) {
  const int n = formation.agent_count();
  const int d = formation.dim();
  const int nl = formation.leader_count();

  const int leader_rank = affine_span_rank(formation.positions().topRows(nl));
  if (leader_rank != d + 1) {
    std::ostringstream os;
    os << "leaders span an affine set of rank " << leader_rank << ", need " << d + 1;
    throw AssumptionViolated(os.str());
  }
  const int s = n - d - 1;
  if (s < 1) throw NoValidStress("n - d - 1 must be positive");

  const Matrix weights_basis = nullspace(equilibrium_operator(formation), 1e-10);
  const auto k = static_cast<int>(weights_basis.cols());
  if (k == 0) throw NoValidStress("edge set admits no nonzero equilibrium stress");

  const Matrix complement = range_complement(formation.augmented());
  std::vector<Matrix> full(k), compressed(k);
  for (int b = 0; b < k; ++b) {
    full[b] = stress_from_weights(formation, weights_basis.col(b));
    compressed[b] = complement.transpose() * full[b] * complement;
  }

  // Maximize λ_min(Σ c_b M_b) over ‖c‖ ≤ 1 along the central path of
  //   t/μ + log det(Σ c_b M_b - t I) + log(1 - ‖c‖²).
  auto combine = [&](const Vector& c) {
    Matrix m = Matrix::Zero(s, s);
    for (int b = 0; b < k; ++b) m += c(b) * compressed[b];
    return Matrix(0.5 * (m + m.transpose()));
  };
  const Matrix eye = Matrix::Identity(s, s);

  Vector c = Vector::Zero(k);
  c(0) = 0.5;
  double t = symmetric_eigenvalues(combine(c))(0) - 1.0;
  double mu = 1.0;
  int it = 0;

  // Barrier value; -inf outside the feasible region.
  auto barrier = [&](const Vector& cc, double tt, double mu_) {
    const double r = 1.0 - cc.squaredNorm();
    if (r <= 0.0) return -std::numeric_limits<double>::infinity();
    Eigen::LLT<Matrix> llt(combine(cc) - tt * eye);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Matrix l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    if (!std::isfinite(logdet)) return -std::numeric_limits<double>::infinity();
    return tt / mu_ + logdet + std::log(r);
  };

  Vector grad(k + 1);
  Matrix hess(k + 1, k + 1);
  std::vector<Matrix> xm(k);
  while (it < opts.max_iterations) {
    for (int newton = 0; newton < 60 && it < opts.max_iterations; ++newton, ++it) {
      const Matrix xinv = (combine(c) - t * eye).llt().solve(eye);
      const double r = 1.0 - c.squaredNorm();
      for (int b = 0; b < k; ++b) xm[b] = xinv * compressed[b];
      for (int a = 0; a < k; ++a) {
        grad(a) = xm[a].trace() - 2.0 * c(a) / r;
        for (int b = a; b < k; ++b) {
          double h = -(xm[a].cwiseProduct(xm[b].transpose())).sum();
          h -= 4.0 * c(a) * c(b) / (r * r);
          if (a == b) h -= 2.0 / r;
          hess(a, b) = hess(b, a) = h;
        }
        const double at = (xm[a] * xinv).trace();
        hess(a, k) = hess(k, a) = at;
      }
      grad(k) = 1.0 / mu - xinv.trace();
      hess(k, k) = -(xinv * xinv).trace();

      const Vector delta = hess.ldlt().solve(-grad);
      const double decrement = grad.dot(delta);
      if (!(decrement > 1e-14)) break;
      const double f0 = barrier(c, t, mu);
      double alpha = 1.0;
      Vector c_new;
      double t_new = t;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        c_new = c + alpha * delta.head(k);
        t_new = t + alpha * delta(k);
        if (barrier(c_new, t_new, mu) >= f0 + 0.25 * alpha * decrement) break;
      }
      if (!(barrier(c_new, t_new, mu) > -std::numeric_limits<double>::infinity())) break;
      c = c_new;
      t = t_new;
      if (decrement < 1e-12) break;
    }
    // s + 1 barrier terms bound the duality gap by (s + 1) μ.
    if ((s + 1) * mu < opts.gap_tolerance) break;
    mu *= 0.2;
  }
  const Vector best = c / c.norm();

  const Vector spectrum = symmetric_eigenvalues(combine(best));
  const double lmin = spectrum(0);
  const double lmax = spectrum(s - 1);
  if (info) {
    info->basis_dimension = k;
    info->iterations = it;
    info->barrier_weight = mu;
    info->objective = lmin;
  }
  if (!(lmin > opts.min_relative_gap * std::max(1e-300, std::abs(lmax)))) {
    std::ostringstream os;
    os << "best (d+2)-th eigenvalue " << lmin << " after " << it
       << " iterations over a " << k << "-dimensional stress space";
    throw NoValidStress(os.str());
  }

  Matrix omega = Matrix::Zero(n, n);
  for (int b = 0; b < k; ++b) omega += best(b) * full[b];
  omega = 0.5 * (omega + omega.transpose());
  omega *= static_cast<double>(n) / omega.trace();
  return StressMatrix(std::move(omega), nl);
}

}  // namespace afc
