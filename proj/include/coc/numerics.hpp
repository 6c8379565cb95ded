#pragma once

#include "coc/common.hpp"

namespace coc {

// Relative tolerance for accepting a matrix as symmetric.
inline constexpr double kSymTol = 1e-10;
// Negative eigenvalues above -kPsdClamp * ||m||_F are clamped to zero.
inline constexpr double kPsdClamp = 1e-10;

struct SymEigen {
    Vector values;  // descending
    Matrix vectors; // columns aligned with values, orthonormal
};

bool is_symmetric(const Matrix& m, double rel_tol = kSymTol);

// (m + m^T)/2 after a symmetry check; throws ValidationError if clearly asymmetric.
Matrix symmetrize(const Matrix& m, const std::string& what = "matrix");

// Cyclic Jacobi. Off-diagonal Frobenius tolerance 1e-12 (relative), 100-sweep cap;
// NumericalError on non-convergence.
SymEigen sym_eigen(const Matrix& m);

// Inverse of a symmetric positive definite matrix via Cholesky. One jitter retry
// (adds (1e-10 * trace/dim) * I) before giving up with SingularityError.
Matrix spd_inverse(const Matrix& m);

// Symmetric PSD square root via the eigendecomposition. Eigenvalues in
// [-1e-10*||m||, 0) are clamped to zero; anything lower throws ValidationError.
Matrix psd_sqrt(const Matrix& m);

// Cholesky solve m * x = rhs with the same jitter fallback as spd_inverse.
Vector spd_solve(const Matrix& m, const Vector& rhs);

}  // namespace coc
