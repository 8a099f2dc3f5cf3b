#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fairshift/tabular.hpp"

namespace fairshift {

using Rng = std::mt19937_64;

// Asymmetric covariate shift with known densities.
//
// Group 0 is a two-component Gaussian mixture, identical in source and target.
// Group 1 is a single Gaussian cluster in the source and the same cluster
// translated by `shift` in the target. Labels follow one logistic rule in x
// for every split, so P(Y | X, A) is shared between source and target.
struct AsymmetricShiftModel {
  std::vector<double> group0_mean_a;
  std::vector<double> group0_mean_b;
  double group0_std = 1.0;
  std::vector<double> group1_mean;
  double group1_std = 0.6;
  std::vector<double> shift;
  double group1_fraction = 0.5;  // P(A = 1), same in source and target
  std::vector<double> label_weights;
  double label_bias = 0.0;

  // Default geometry for a shift vector of any dimension >= 1.
  static AsymmetricShiftModel with_shift(std::vector<double> shift);

  std::size_t dim() const { return shift.size(); }
  double label_probability(std::span<const double> x) const;
  double group_density(int group, bool target, std::span<const double> x) const;
  double source_density(std::span<const double> x) const;
  double target_density(std::span<const double> x) const;

  LabeledDataset sample(Rng& rng, std::size_t n_per_group, bool target) const;
};

struct SyntheticPair {
  LabeledDataset source;
  UnlabeledDataset target;
  std::vector<int> target_labels;  // held out; used for evaluation only
  AsymmetricShiftModel model;

  LabeledDataset labeled_target() const;
};

SyntheticPair make_synthetic_asymmetric(std::uint64_t seed, std::size_t n_per_group,
                                        const std::vector<double>& shift_vector);

// Source N(0, I); target is the source exponentially tilted along `direction`
// (unit vector) with strength gamma, i.e. N(gamma * direction, I). The density
// ratio is analytic: P^T(x)/P^S(x) = exp(gamma * <v, x> - gamma^2 / 2).
struct GaussianTiltModel {
  std::size_t dim = 2;
  double gamma = 0.0;
  std::vector<double> direction;  // unit norm
  std::vector<double> label_weights;
  double label_bias = 0.0;
  double group1_fraction = 0.5;

  static GaussianTiltModel make(std::size_t dim, double gamma);

  double label_probability(std::span<const double> x) const;
  // P^T(x) / P^S(x)
  double test_over_train(std::span<const double> x) const;
  double source_density(std::span<const double> x) const;
  double target_density(std::span<const double> x) const;

  LabeledDataset sample(Rng& rng, std::size_t n, bool target) const;
};

double gaussian_density(std::span<const double> x, std::span<const double> mean, double std);

}  // namespace fairshift
