#pragma once

#include <span>

#include "pda/matrix.hpp"

namespace pda {

struct EigenDecomposition {
  Matrix vectors;  // orthonormal columns, one per eigenvalue
  Vector values;   // sorted descending
};

/// Cyclic Jacobi sweeps for a symmetric matrix. Off-diagonal tolerance is
/// 1e-12 relative to the Frobenius norm, capped at 100 sweeps. Throws on a
/// non-square or asymmetric input, or if the cap is hit.
EigenDecomposition symmetric_eigendecomposition(const Matrix& m);

/// Q * diag(values) * Q^T, re-symmetrized exactly.
Matrix assemble_symmetric(const Matrix& q, std::span<const double> values);

/// Symmetric PSD square root. Eigenvalues in [-neg_tol, 0) are clipped to
/// zero; anything below -neg_tol throws.
Matrix psd_sqrt(const Matrix& m, double neg_tol = 1e-10);

}  // namespace pda
