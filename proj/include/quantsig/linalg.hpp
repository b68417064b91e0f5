#pragma once

#include "quantsig/matrix.hpp"

#include <span>
#include <vector>

namespace quantsig::linalg {

/// Minimum-norm-residual solution of A x ~ b by Householder QR.
/// Requires rows >= cols. Throws Error{SingularSystem} when a diagonal of R
/// falls below `rank_tol` times the largest one.
std::vector<double> least_squares_qr(Matrix a, std::vector<double> b, double rank_tol = 1e-12);

struct SymmetricEigen {
    std::vector<double> values;  ///< descending
    Matrix vectors;              ///< column j pairs with values[j]
    int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// Frobenius norm drops below `tol` or `max_sweeps` sweeps have run.
SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100);

}  // namespace quantsig::linalg
