#include "fairshift/kernels.hpp"

#include <stdexcept>
#include <string>

namespace fairshift::kernels {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("kernels: shape mismatch in ") + what);
}

// Row kernels shared by both variants; each computes one output row.

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* o = out.row(i).data();
  const std::size_t inner = a.cols(), cols = b.cols();
  for (std::size_t p = 0; p < inner; ++p) {
    const double aip = a(i, p);
    const double* brow = b.row(p).data();
    for (std::size_t j = 0; j < cols; ++j) o[j] += aip * brow[j];
  }
}

inline void matmul_tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* o = out.row(i).data();
  const std::size_t inner = a.rows(), cols = b.cols();
  for (std::size_t p = 0; p < inner; ++p) {
    const double api = a(p, i);
    if (api == 0.0) continue;
    const double* brow = b.row(p).data();
    for (std::size_t j = 0; j < cols; ++j) o[j] += api * brow[j];
  }
}

inline void matmul_nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const double* arow = a.row(i).data();
  const std::size_t inner = a.cols();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.row(j).data();
    double s = 0.0;
    for (std::size_t p = 0; p < inner; ++p) s += arow[p] * brow[p];
    out(i, j) = s;
  }
}

inline void sqdist_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const double* arow = a.row(i).data();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.row(j).data();
    double s = 0.0;
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double d = arow[p] - brow[p];
      s += d * d;
    }
    out(i, j) = s;
  }
}

Matrix centered(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (auto& m : mean) m /= static_cast<double>(n);
  Matrix c(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) c(i, j) = x(i, j) - mean[j];
  return c;
}

template <typename RowFn>
void run_rows_serial(std::size_t rows, RowFn&& fn) {
  for (std::size_t i = 0; i < rows; ++i) fn(i);
}

template <typename RowFn>
void run_rows_parallel(std::size_t rows, std::size_t work, RowFn&& fn) {
  const long n = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
  for (long i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  run_rows_serial(a.rows(), [&](std::size_t i) { matmul_row(a, b, out, i); });
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  run_rows_serial(a.cols(), [&](std::size_t i) { matmul_tn_row(a, b, out, i); });
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  run_rows_serial(a.rows(), [&](std::size_t i) { matmul_nt_row(a, b, out, i); });
  return out;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "squared_distances");
  Matrix out(a.rows(), b.rows());
  run_rows_serial(a.rows(), [&](std::size_t i) { sqdist_row(a, b, out, i); });
  return out;
}

Matrix covariance(const Matrix& x) {
  require(x.rows() > 0, "covariance");
  Matrix c = centered(x);
  Matrix cov = serial::matmul_tn(c, c);
  for (auto& v : cov.values()) v /= static_cast<double>(x.rows());
  return cov;
}

}  // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  run_rows_parallel(a.rows(), a.rows() * a.cols() * b.cols(),
                    [&](std::size_t i) { matmul_row(a, b, out, i); });
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  run_rows_parallel(a.cols(), a.rows() * a.cols() * b.cols(),
                    [&](std::size_t i) { matmul_tn_row(a, b, out, i); });
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  run_rows_parallel(a.rows(), a.rows() * a.cols() * b.rows(),
                    [&](std::size_t i) { matmul_nt_row(a, b, out, i); });
  return out;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "squared_distances");
  Matrix out(a.rows(), b.rows());
  run_rows_parallel(a.rows(), a.rows() * a.cols() * b.rows(),
                    [&](std::size_t i) { sqdist_row(a, b, out, i); });
  return out;
}

Matrix covariance(const Matrix& x) {
  require(x.rows() > 0, "covariance");
  Matrix c = centered(x);
  Matrix cov = matmul_tn(c, c);
  for (auto& v : cov.values()) v /= static_cast<double>(x.rows());
  return cov;
}

}  // namespace fairshift::kernels
