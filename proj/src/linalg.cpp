#include "afc/linalg.hpp"

#include <algorithm>

#include "afc/errors.hpp"

namespace afc {

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

int numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double threshold = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++r;
  }
  return r;
}

Matrix nullspace(const Matrix& m, double rel_tol) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double threshold = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++r;
  }
  return svd.matrixV().rightCols(cols - r);
}

Matrix range_complement(const Matrix& m, double rel_tol) {
  return nullspace(m.transpose(), rel_tol);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Vector symmetric_eigenvalues(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spectral_abscissa(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw DimensionMismatch("solve_lyapunov expects square matrices of equal size");
  }
  // vec(XA + AᵀX) = (Aᵀ ⊗ I + I ⊗ Aᵀ) vec(X), column-major vec.
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix op = kron(a.transpose(), eye) + kron(eye, a.transpose());
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Vector x = op.fullPivLu().solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

Matrix unstack(const Vector& v, int dim) {
  const Eigen::Index count = v.size() / dim;
  Matrix out(count, dim);
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = v.segment(i * dim, dim).transpose();
  return out;
}

Vector stack(const Matrix& rows) {
  Vector out(rows.size());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.segment(i * rows.cols(), rows.cols()) = rows.row(i).transpose();
  }
  return out;
}

}  // namespace afc
