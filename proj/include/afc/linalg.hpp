#pragma once

#include <Eigen/Dense>

namespace afc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Kronecker product X ⊗ Y.
Matrix kron(const Matrix& x, const Matrix& y);

/// Numerical rank from singular values; a singular value counts when it
/// exceeds `rel_tol * max(1, sigma_max)`.
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

/// Orthonormal basis (columns) of the right nullspace of `m`.
Matrix nullspace(const Matrix& m, double rel_tol = 1e-10);

/// Orthonormal basis of the orthogonal complement of range(m).
Matrix range_complement(const Matrix& m, double rel_tol = 1e-10);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Ascending eigenvalues of the symmetric part of `m`.
Vector symmetric_eigenvalues(const Matrix& m);

/// Largest real part over the spectrum of a square matrix.
double spectral_abscissa(const Matrix& m);

/// Solves X A + Aᵀ X = -Q for X (dense Kronecker formulation; small sizes).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Reshape a stacked vector of `count` blocks of length `dim` into a
/// count×dim matrix (one block per row), and back.
Matrix unstack(const Vector& v, int dim);
Vector stack(const Matrix& rows);

}  // namespace afc
