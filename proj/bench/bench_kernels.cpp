// Serial vs OpenMP timings for the dense kernels.
//
//   bench_kernels [repeats]
//
// Prints one CSV line per kernel and size:
//   kernel,rows,inner,cols,threads,serial_ms,parallel_ms,speedup,identical

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include <omp.h>

#include "fairshift/kernels.hpp"

using fairshift::Matrix;
namespace k = fairshift::kernels;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = n(rng);
  return m;
}

double best_ms(const std::function<Matrix()>& f, int repeats, Matrix& out) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out = f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, std::size_t r, std::size_t inner, std::size_t c, int repeats,
            const std::function<Matrix()>& serial, const std::function<Matrix()>& parallel) {
  Matrix a, b;
  const double ts = best_ms(serial, repeats, a);
  const double tp = best_ms(parallel, repeats, b);
  std::cout << name << ',' << r << ',' << inner << ',' << c << ',' << omp_get_max_threads() << ',' << ts << ',' << tp
            << ',' << ts / tp << ',' << (a == b ? "yes" : "no") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::mt19937_64 rng(7);
  std::cout << "kernel,rows,inner,cols,threads,serial_ms,parallel_ms,speedup,identical\n";
  for (std::size_t n : {64, 256, 512}) {
    const Matrix a = random_matrix(n, n, rng);
    const Matrix b = random_matrix(n, n, rng);
    report("matmul", n, n, n, repeats, [&] { return k::serial::matmul(a, b); }, [&] { return k::matmul(a, b); });
    report("matmul_tn", n, n, n, repeats, [&] { return k::serial::matmul_tn(a, b); },
           [&] { return k::matmul_tn(a, b); });
    report("matmul_nt", n, n, n, repeats, [&] { return k::serial::matmul_nt(a, b); },
           [&] { return k::matmul_nt(a, b); });
  }
  for (std::size_t n : {50, 200, 1000}) {
    const Matrix a = random_matrix(n, 64, rng);
    const Matrix b = random_matrix(n, 64, rng);
    report("squared_distances", n, 64, n, repeats, [&] { return k::serial::squared_distances(a, b); },
           [&] { return k::squared_distances(a, b); });
  }
  for (std::size_t n : {1000, 10000}) {
    const Matrix x = random_matrix(n, 97, rng);
    report("covariance", n, 97, 97, repeats, [&] { return k::serial::covariance(x); },
           [&] { return k::covariance(x); });
  }
  return 0;
}
