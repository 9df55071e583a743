#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "afc/linalg.hpp"

namespace afc::test {

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < cols; ++k) m(i, k) = dist(rng);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int size, double lo = -1.0, double hi = 1.0) {
  return random_matrix(rng, size, 1, lo, hi).col(0);
}

// Eigenvalue real parts straight from Eigen, kept separate from the library helpers.
inline double max_real_eigenvalue(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

inline Eigen::VectorXd sym_eigs(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline int svd_rank(const Matrix& m, double tol) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > tol;
  return r;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("afc-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace afc::test
