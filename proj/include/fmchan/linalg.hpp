#ifndef FMCHAN_LINALG_HPP
#define FMCHAN_LINALG_HPP

#include <vector>

#include "fmchan/tensor.hpp"

namespace fmchan::linalg {

ComplexMatrix identity(int n);
ComplexMatrix adjoint(const ComplexMatrix& a);

// C = A * B
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
// C = A * B^H without forming the adjoint
ComplexMatrix matmul_abh(const ComplexMatrix& a, const ComplexMatrix& b);

struct HermitianEig {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns; a = vectors * diag(values) * vectors^H
};

// Cyclic complex Jacobi. Intended for the small Gram/covariance matrices in
// this project (n up to a few hundred).
HermitianEig hermitian_eig(const ComplexMatrix& a);

// Moore-Penrose inverse of a Hermitian PSD matrix; eigenvalues at or below
// rel_tol * lambda_max are treated as zero.
ComplexMatrix pinv_hermitian(const ComplexMatrix& a, double rel_tol);

// Solve A X = B for Hermitian positive definite A via Cholesky.
ComplexMatrix cholesky_solve(const ComplexMatrix& a, const ComplexMatrix& b);

} // namespace fmchan::linalg

#endif
