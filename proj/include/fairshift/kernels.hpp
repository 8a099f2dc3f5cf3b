#pragma once

// Dense kernels used by the networks, the transport solver and PCA.
//
// Every kernel exists twice: `kernels::serial` is the plain reference and
// `kernels::` is the OpenMP version. The parallel versions split work over
// output rows only and keep the per-element accumulation order of the serial
// code, so both produce bit-identical results for any thread count.

#include "fairshift/matrix.hpp"

namespace fairshift::kernels {

// Below this many multiply-adds the parallel kernels run single-threaded.
inline constexpr std::size_t kParallelWorkThreshold = 1 << 15;

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix squared_distances(const Matrix& a, const Matrix& b);
Matrix covariance(const Matrix& x);
}  // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// Pairwise squared Euclidean distances between the rows of a and b.
Matrix squared_distances(const Matrix& a, const Matrix& b);
// Population covariance (1/n) of the rows of x.
Matrix covariance(const Matrix& x);

}  // namespace fairshift::kernels
