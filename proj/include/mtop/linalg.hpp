#pragma once

#include <vector>

namespace mtop {

// Dense helpers for the small (n <= 6) matrices this project touches.
// Row-major storage, size n*n.

using Matrix = std::vector<double>;

double frobenius_norm(const Matrix& a, int n);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotation, ascending.
std::vector<double> jacobi_eigenvalues(Matrix a, int n, double tol = 1e-12);

/// Lower-triangular Cholesky factor of a positive definite matrix.
/// Returns false when a pivot falls below tol (not positive definite).
bool cholesky(const Matrix& a, int n, Matrix& lower, double tol = 1e-12);

/// LU inverse with partial pivoting; det receives the determinant.
/// Returns false on |det| below the caller's degeneracy threshold handling
/// (the determinant is always written so callers can inspect it).
bool invert(const Matrix& a, int n, Matrix& inv, double& det);

struct NuclearFrobenius {
  double frobenius = 0.0;
  double nuclear = 0.0;
  int rank = 0;
};

/// Frobenius norm, nuclear norm (singular values via Jacobi on A^T A), and
/// the numeric rank (singular values above 1e-10 * max).
NuclearFrobenius nuclear_frobenius_bounds(const Matrix& a, int n);

}  // namespace mtop
