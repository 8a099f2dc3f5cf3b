#include "fairshift/shift_split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairshift/kernels.hpp"
#include "fairshift/synthetic.hpp"

namespace fairshift {
namespace {

// Successive weighted draws with renormalization over the remaining pool.
std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<std::size_t>& pool,
                                                             std::vector<double> weights, std::size_t k,
                                                             Rng& rng) {
  std::vector<std::size_t> items = pool;
  std::vector<std::size_t> out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::size_t pick = items.size() - 1;
    if (total > 0.0) {
      const double u = unif(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        acc += weights[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(unif(rng) * static_cast<double>(items.size()));
      pick = std::min(pick, items.size() - 1);
    }
    out.push_back(items[pick]);
    items.erase(items.begin() + static_cast<long>(pick));
    weights.erase(weights.begin() + static_cast<long>(pick));
  }
  return out;
}

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

void ShiftConfig::validate() const {
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("ShiftConfig: gamma must be finite and >= 0");
  if (!(percentile > 0.0 && percentile < 100.0)) throw std::invalid_argument("ShiftConfig: percentile must be in (0,100)");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("ShiftConfig: test_fraction must be in (0,1)");
  if (!(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0))
    throw std::invalid_argument("ShiftConfig: val_fraction_of_train must be in (0,1)");
  if (asymmetric_group && *asymmetric_group != 0 && *asymmetric_group != 1)
    throw std::invalid_argument("ShiftConfig: asymmetric_group must be 0 or 1");
}

SymmetricEigen symmetric_eigen(const Matrix& sym, double tol, int max_sweeps) {
  const std::size_t d = sym.rows();
  if (sym.cols() != d) throw std::invalid_argument("symmetric_eigen: matrix must be square");
  Matrix a = sym;
  Matrix v(d, d);
  for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) (i == j ? scale : off) += a(i, j) * a(i, j);
    if (off <= tol * tol * std::max(scale, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t c = 0; c < d; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < d; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

PrincipalAxis first_principal_axis(const Matrix& features) {
  const std::size_t n = features.rows(), d = features.cols();
  if (n < 2) throw std::invalid_argument("first_principal_projection needs at least 2 rows");
  const Matrix cov = kernels::covariance(features);
  const auto eig = symmetric_eigen(cov);
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);
  if (!(eig.values[0] > 1e-14 * std::max(1.0, trace)))
    throw std::domain_error("first_principal_projection: zero covariance (all rows identical)");

  PrincipalAxis pa;
  pa.eigenvalue = eig.values[0];
  pa.axis.resize(d);
  std::size_t largest = 0;
  for (std::size_t j = 0; j < d; ++j) {
    pa.axis[j] = eig.vectors(j, 0);
    if (std::abs(pa.axis[j]) > std::abs(pa.axis[largest])) largest = j;
  }
  if (pa.axis[largest] < 0)
    for (auto& x : pa.axis) x = -x;
  pa.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) pa.mean[j] += features(i, j);
  for (auto& m : pa.mean) m /= static_cast<double>(n);
  return pa;
}

std::vector<double> first_principal_projection(const Matrix& features) {
  const auto pa = first_principal_axis(features);
  std::vector<double> proj(features.rows(), 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i)
    for (std::size_t j = 0; j < features.cols(); ++j) proj[i] += (features(i, j) - pa.mean[j]) * pa.axis[j];
  return proj;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty vector");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TiltDensities tilt_densities(const std::vector<double>& projection, double gamma, double percentile_q) {
  if (projection.empty()) throw std::invalid_argument("tilt_densities: empty projection");
  for (double p : projection)
    if (!std::isfinite(p)) throw std::invalid_argument("tilt_densities: non-finite projection value");
  TiltDensities out;
  out.anchor = percentile(projection, percentile_q);
  std::vector<double> expo(projection.size());
  double max_e = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < projection.size(); ++i) {
    expo[i] = gamma * (projection[i] - out.anchor);
    max_e = std::max(max_e, expo[i]);
  }
  double sum = 0.0;
  out.probabilities.resize(projection.size());
  for (std::size_t i = 0; i < projection.size(); ++i) {
    out.probabilities[i] = std::exp(expo[i] - max_e);
    sum += out.probabilities[i];
  }
  for (auto& p : out.probabilities) p /= sum;
  out.log_normalizer = max_e + std::log(sum);
  return out;
}

SplitResult split(const LabeledDataset& data, const ShiftConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  SplitResult res;
  res.gamma = cfg.gamma;
  res.projection = first_principal_projection(data.features());
  res.densities.assign(n, 0.0);

  Rng rng(cfg.seed);
  const std::size_t n_test = round_count(cfg.test_fraction * static_cast<double>(n));
  std::vector<std::size_t> test;

  if (!cfg.asymmetric_group) {
    const auto tilt = tilt_densities(res.projection, cfg.gamma, cfg.percentile);
    res.densities = tilt.probabilities;
    res.anchor = tilt.anchor;
    res.log_normalizer = tilt.log_normalizer;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    test = weighted_sample_without_replacement(all, tilt.probabilities, n_test, rng);
  } else {
    const int g = *cfg.asymmetric_group;
    std::vector<std::size_t> shifted, other;
    for (std::size_t i = 0; i < n; ++i) (data.groups()[i] == g ? shifted : other).push_back(i);
    if (shifted.empty()) throw DataError("split: asymmetric group " + std::to_string(g) + " is absent");
    std::vector<double> proj_g;
    for (auto i : shifted) proj_g.push_back(res.projection[i]);
    const auto tilt = tilt_densities(proj_g, cfg.gamma, cfg.percentile);
    res.anchor = tilt.anchor;
    res.log_normalizer = tilt.log_normalizer;
    res.anchor_within_group = true;
    const double share_g = static_cast<double>(shifted.size()) / static_cast<double>(n);
    for (std::size_t k = 0; k < shifted.size(); ++k) res.densities[shifted[k]] = share_g * tilt.probabilities[k];
    for (auto i : other) res.densities[i] = 1.0 / static_cast<double>(n);

    std::size_t k_shifted = std::min(shifted.size(), round_count(cfg.test_fraction * static_cast<double>(shifted.size())));
    std::size_t k_other = n_test >= k_shifted ? n_test - k_shifted : 0;
    if (k_other > other.size()) {
      k_shifted += k_other - other.size();
      k_other = other.size();
    }
    test = weighted_sample_without_replacement(shifted, tilt.probabilities, k_shifted, rng);
    const auto test_other =
        weighted_sample_without_replacement(other, std::vector<double>(other.size(), 1.0), k_other, rng);
    test.insert(test.end(), test_other.begin(), test_other.end());
  }

  std::vector<char> in_test(n, 0);
  for (auto i : test) in_test[i] = 1;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_test[i]) rest.push_back(i);
  std::shuffle(rest.begin(), rest.end(), rng);
  const std::size_t n_val = round_count(cfg.val_fraction_of_train * static_cast<double>(rest.size()));
  res.val_idx.assign(rest.begin(), rest.begin() + static_cast<long>(n_val));
  res.train_idx.assign(rest.begin() + static_cast<long>(n_val), rest.end());
  res.test_idx = std::move(test);
  std::sort(res.train_idx.begin(), res.train_idx.end());
  std::sort(res.val_idx.begin(), res.val_idx.end());
  std::sort(res.test_idx.begin(), res.test_idx.end());
  if (res.train_idx.empty() || res.val_idx.empty() || res.test_idx.empty())
    throw DataError("split: dataset too small, a partition came out empty");
  return res;
}

}  // namespace fairshift
