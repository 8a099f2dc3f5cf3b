#include "fairshift/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fairshift {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> axis_vector(std::size_t dim, std::initializer_list<double> leading) {
  std::vector<double> v(dim, 0.0);
  std::size_t i = 0;
  for (double x : leading) {
    if (i >= dim) break;
    v[i++] = x;
  }
  return v;
}

void draw_gaussian(Rng& rng, std::span<const double> mean, double std, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < mean.size(); ++j) out[j] = mean[j] + std * normal(rng);
}

int draw_label(Rng& rng, double p) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < p ? 1 : 0;
}

}  // namespace

double gaussian_density(std::span<const double> x, std::span<const double> mean, double std) {
  double sq = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = (x[j] - mean[j]) / std;
    sq += d * d;
  }
  const double norm = std::pow(2.0 * std::numbers::pi * std * std, 0.5 * static_cast<double>(x.size()));
  return std::exp(-0.5 * sq) / norm;
}

AsymmetricShiftModel AsymmetricShiftModel::with_shift(std::vector<double> shift) {
  const std::size_t d = shift.size();
  AsymmetricShiftModel m;
  m.group0_mean_a = axis_vector(d, {-1.5, -0.5});
  m.group0_mean_b = axis_vector(d, {1.5, 0.5});
  m.group0_std = 1.0;
  m.group1_mean = axis_vector(d, {-1.5, 1.0});
  m.group1_std = 0.6;
  m.shift = std::move(shift);
  m.label_weights = axis_vector(d, {1.5, 1.0});
  m.label_bias = 0.0;
  return m;
}

double AsymmetricShiftModel::label_probability(std::span<const double> x) const {
  return sigmoid(dot(label_weights, x) + label_bias);
}

double AsymmetricShiftModel::group_density(int group, bool target, std::span<const double> x) const {
  if (group == 0)
    return 0.5 * gaussian_density(x, group0_mean_a, group0_std) + 0.5 * gaussian_density(x, group0_mean_b, group0_std);
  std::vector<double> mean = group1_mean;
  if (target)
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += shift[j];
  return gaussian_density(x, mean, group1_std);
}

double AsymmetricShiftModel::source_density(std::span<const double> x) const {
  return (1.0 - group1_fraction) * group_density(0, false, x) + group1_fraction * group_density(1, false, x);
}

double AsymmetricShiftModel::target_density(std::span<const double> x) const {
  return (1.0 - group1_fraction) * group_density(0, true, x) + group1_fraction * group_density(1, true, x);
}

LabeledDataset AsymmetricShiftModel::sample(Rng& rng, std::size_t n_per_group, bool target) const {
  const std::size_t d = dim();
  const std::size_t n = 2 * n_per_group;
  Matrix x(n, d);
  std::vector<int> groups(n), labels(n);
  std::bernoulli_distribution component(0.5);
  std::vector<double> mean1 = group1_mean;
  if (target)
    for (std::size_t j = 0; j < d; ++j) mean1[j] += shift[j];
  for (std::size_t i = 0; i < n; ++i) {
    const int g = i < n_per_group ? 0 : 1;
    if (g == 0) {
      draw_gaussian(rng, component(rng) ? group0_mean_a : group0_mean_b, group0_std, x.row(i));
    } else {
      draw_gaussian(rng, mean1, group1_std, x.row(i));
    }
    groups[i] = g;
    labels[i] = draw_label(rng, label_probability(x.row(i)));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> g2(n), y2(n);
  for (std::size_t i = 0; i < n; ++i) {
    g2[i] = groups[order[i]];
    y2[i] = labels[order[i]];
  }
  return LabeledDataset(x.select_rows(order), std::move(g2), std::move(y2),
                        std::vector<FeatureKind>(d, FeatureKind::kContinuous));
}

LabeledDataset SyntheticPair::labeled_target() const {
  return LabeledDataset(target.features(), target.groups(), target_labels, target.feature_kinds(),
                        target.feature_names());
}

SyntheticPair make_synthetic_asymmetric(std::uint64_t seed, std::size_t n_per_group,
                                        const std::vector<double>& shift_vector) {
  if (n_per_group < 10) throw DataError("make_synthetic_asymmetric needs n_per_group >= 10");
  if (shift_vector.empty()) throw DataError("make_synthetic_asymmetric needs a non-empty shift vector");
  const auto model = AsymmetricShiftModel::with_shift(shift_vector);
  Rng rng(seed);
  LabeledDataset source = model.sample(rng, n_per_group, /*target=*/false);
  LabeledDataset target = model.sample(rng, n_per_group, /*target=*/true);
  return SyntheticPair{std::move(source), UnlabeledDataset::from_labeled(target), target.labels(), model};
}

GaussianTiltModel GaussianTiltModel::make(std::size_t dim, double gamma) {
  GaussianTiltModel m;
  m.dim = dim;
  m.gamma = gamma;
  m.direction = axis_vector(dim, {1.0});
  m.label_weights = axis_vector(dim, {1.0, -1.5});
  m.label_bias = 0.25;
  return m;
}

double GaussianTiltModel::label_probability(std::span<const double> x) const {
  return sigmoid(dot(label_weights, x) + label_bias);
}

double GaussianTiltModel::test_over_train(std::span<const double> x) const {
  return std::exp(gamma * dot(direction, x) - 0.5 * gamma * gamma);
}

double GaussianTiltModel::source_density(std::span<const double> x) const {
  const std::vector<double> zero(dim, 0.0);
  return gaussian_density(x, zero, 1.0);
}

double GaussianTiltModel::target_density(std::span<const double> x) const {
  std::vector<double> mean(dim);
  for (std::size_t j = 0; j < dim; ++j) mean[j] = gamma * direction[j];
  return gaussian_density(x, mean, 1.0);
}

LabeledDataset GaussianTiltModel::sample(Rng& rng, std::size_t n, bool target) const {
  Matrix x(n, dim);
  std::vector<int> groups(n), labels(n);
  std::vector<double> mean(dim, 0.0);
  if (target)
    for (std::size_t j = 0; j < dim; ++j) mean[j] = gamma * direction[j];
  std::bernoulli_distribution group(group1_fraction);
  for (std::size_t i = 0; i < n; ++i) {
    draw_gaussian(rng, mean, 1.0, x.row(i));
    groups[i] = group(rng) ? 1 : 0;
    labels[i] = draw_label(rng, label_probability(x.row(i)));
  }
  return LabeledDataset(std::move(x), std::move(groups), std::move(labels),
                        std::vector<FeatureKind>(dim, FeatureKind::kContinuous));
}

}  // namespace fairshift
