#include "fairshift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fairshift {
namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || b != c) throw MetricError("metrics: preds, labels and groups must have equal length");
  if (a == 0) throw MetricError("metrics: empty evaluation set");
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Histogram build_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  const std::size_t nb = hi > lo ? std::max<std::size_t>(bins, 1) : 1;
  h.counts.assign(nb, 0);
  double s = 0.0;
  for (double v : values) {
    s += v;
    std::size_t b = 0;
    if (nb > 1) {
      b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(nb));
      b = std::min(b, nb - 1);
    }
    ++h.counts[b];
  }
  h.mean = values.empty() ? 0.0 : s / static_cast<double>(values.size());
  return h;
}

}  // namespace

long long GroupConfusion::total() const {
  long long t = 0;
  for (const auto& g : counts)
    for (const auto& y : g)
      for (long long c : y) t += c;
  return t;
}

double GroupConfusion::positive_rate(int group, int label) const {
  const long long n = cell_total(group, label);
  if (n == 0)
    throw MetricError("equalized odds: empty cell (group=" + std::to_string(group) + ", label=" + std::to_string(label) + ")");
  return static_cast<double>(counts[group][label][1]) / static_cast<double>(n);
}

double GroupConfusion::accuracy(int group) const {
  const long long n = cell_total(group, 0) + cell_total(group, 1);
  if (n == 0) throw MetricError("accuracy parity: group " + std::to_string(group) + " is missing");
  return static_cast<double>(counts[group][0][0] + counts[group][1][1]) / static_cast<double>(n);
}

std::vector<int> hard_decisions(std::span<const double> probs, double threshold) {
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
  return out;
}

GroupConfusion group_confusion(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups) {
  check_lengths(preds.size(), labels.size(), groups.size());
  GroupConfusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if ((preds[i] | labels[i] | groups[i]) & ~1) throw MetricError("metrics: values must be 0 or 1");
    ++c.counts[groups[i]][labels[i]][preds[i]];
  }
  return c;
}

double equalized_odds_gap(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups,
                          EOddsConvention convention) {
  const auto c = group_confusion(preds, labels, groups);
  const double gap0 = std::abs(c.positive_rate(0, 0) - c.positive_rate(1, 0));
  const double gap1 = std::abs(c.positive_rate(0, 1) - c.positive_rate(1, 1));
  return convention == EOddsConvention::kMax ? std::max(gap0, gap1) : 0.5 * (gap0 + gap1);
}

double accuracy_parity(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups) {
  const auto c = group_confusion(preds, labels, groups);
  return std::abs(c.accuracy(0) - c.accuracy(1)) * 100.0;
}

RunMetrics evaluate_predictions(std::span<const double> probs, std::span<const int> labels,
                                std::span<const int> groups, EOddsConvention convention) {
  const auto preds = hard_decisions(probs);
  const auto c = group_confusion(preds, labels, groups);
  RunMetrics m;
  long long correct = 0;
  for (int g = 0; g < 2; ++g) correct += c.counts[g][0][0] + c.counts[g][1][1];
  const double accuracy = static_cast<double>(correct) / static_cast<double>(c.total());
  m.error_pct = 100.0 * (1.0 - accuracy);
  m.eodds = equalized_odds_gap(preds, labels, groups, convention);
  m.acc_parity_pct = accuracy_parity(preds, labels, groups);
  for (int g = 0; g < 2; ++g) m.group_error_pct[g] = 100.0 * (1.0 - c.accuracy(g));
  return m;
}

RunMetrics evaluate_model(const PredictorModel& model, const LabeledDataset& data, EOddsConvention convention) {
  const auto pred = model.predict(data.features());
  return evaluate_predictions(pred.probabilities, data.labels(), data.groups(), convention);
}

RatioDiagnostic epsilon_ratio_diagnostic(const PredictorModel& model_train, const PredictorModel& model_test,
                                         const LabeledDataset& eval_set, double threshold) {
  const auto p_train = model_train.predict(eval_set.features()).probabilities;
  const auto p_test = model_test.predict(eval_set.features()).probabilities;
  RatioDiagnostic d;
  d.threshold = threshold;
  const std::size_t n = eval_set.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r1 = p_test[i] / p_train[i];
    const double r0 = (1.0 - p_test[i]) / (1.0 - p_train[i]);
    d.class0.push_back(r0);
    d.class1.push_back(r1);
    d.true_class.push_back(eval_set.labels()[i] == 1 ? r1 : r0);
    d.exceed_count += (r0 > threshold) + (r1 > threshold);
  }
  d.exceed_fraction = static_cast<double>(d.exceed_count) / static_cast<double>(2 * n);
  return d;
}

FwRatioHistograms fw_ratio_histogram(const WeightNetwork& weight_net, const PredictorModel& encoder,
                                     const Matrix& source_features, const Matrix& target_features, std::size_t bins) {
  const auto fw_target = weight_net.evaluate(encoder.predict(target_features).representation);
  const auto fw_source = weight_net.evaluate(encoder.predict(source_features).representation);
  double lo = fw_target.front(), hi = fw_target.front();
  for (const auto* side : {&fw_target, &fw_source})
    for (double v : *side) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  FwRatioHistograms out;
  out.target = build_histogram(fw_target, lo, hi, bins);
  out.source = build_histogram(fw_source, lo, hi, bins);
  out.mean_fw_target = out.target.mean;
  double inv = 0.0;
  std::size_t above = 0, at_most = 0;
  for (double v : fw_source) {
    inv += 1.0 / v;
    above += v > 1.0;
  }
  for (double v : fw_target) at_most += v <= 1.0;
  out.mean_inv_fw_source = inv / static_cast<double>(fw_source.size());
  out.fraction_source_above_1 = static_cast<double>(above) / static_cast<double>(fw_source.size());
  out.fraction_target_at_most_1 = static_cast<double>(at_most) / static_cast<double>(fw_target.size());
  return out;
}

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw MetricError("rank_correlation: need two equal-length samples");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace fairshift
