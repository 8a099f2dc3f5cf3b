#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairshift/tabular.hpp"

namespace fairshift {

struct ShiftConfig {
  double gamma = 10.0;
  double percentile = 60.0;  // anchor b, as a percentile of the projection
  double test_fraction = 0.4;
  double val_fraction_of_train = 1.0 / 6.0;  // 5:1:4 overall at the defaults
  std::optional<int> asymmetric_group;  // tilt only this group's rows
  std::uint64_t seed = 0;

  void validate() const;
};

struct TiltDensities {
  std::vector<double> probabilities;  // sums to 1
  double anchor = 0.0;                // b
  double log_normalizer = 0.0;        // log Z, Z = sum_i exp(gamma (p_i - b))
};

struct SplitResult {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  std::vector<std::size_t> test_idx;
  std::vector<double> projection;  // first-principal-component score per row
  std::vector<double> densities;   // per-row test-sampling probability, sums to 1
  double anchor = 0.0;
  double log_normalizer = 0.0;
  double gamma = 0.0;
  bool anchor_within_group = false;  // true in asymmetric mode: b is the shifted group's percentile
};

struct PrincipalAxis {
  std::vector<double> axis;  // unit norm, largest-magnitude entry positive
  std::vector<double> mean;
  double eigenvalue = 0.0;
};

// Eigenvalues (descending) and matching unit eigenvectors (columns) of a
// symmetric matrix, by cyclic Jacobi rotations.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& sym, double tol = 1e-12, int max_sweeps = 100);

PrincipalAxis first_principal_axis(const Matrix& features);
std::vector<double> first_principal_projection(const Matrix& features);

// Linear-interpolation percentile (q in [0, 100]).
double percentile(std::vector<double> values, double q);

TiltDensities tilt_densities(const std::vector<double>& projection, double gamma, double percentile_q);

SplitResult split(const LabeledDataset& data, const ShiftConfig& cfg);

}  // namespace fairshift
