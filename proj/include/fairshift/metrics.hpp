#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairshift/nn.hpp"
#include "fairshift/tabular.hpp"

namespace fairshift {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EOddsConvention { kMax, kMean };

// Counts indexed [group][true label][predicted label].
struct GroupConfusion {
  std::array<std::array<std::array<long long, 2>, 2>, 2> counts{};

  long long cell_total(int group, int label) const { return counts[group][label][0] + counts[group][label][1]; }
  long long total() const;
  // P(Y_hat = 1 | A = group, Y = label); throws if the cell is empty.
  double positive_rate(int group, int label) const;
  double accuracy(int group) const;
};

std::vector<int> hard_decisions(std::span<const double> probs, double threshold = 0.5);

GroupConfusion group_confusion(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups);

// max (or mean) over y in {0,1} of |P(Y_hat=1|A=0,Y=y) - P(Y_hat=1|A=1,Y=y)|.
double equalized_odds_gap(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups,
                          EOddsConvention convention = EOddsConvention::kMax);

// |acc(A=0) - acc(A=1)| in percentage points.
double accuracy_parity(std::span<const int> preds, std::span<const int> labels, std::span<const int> groups);

struct RunMetrics {
  double error_pct = 0.0;
  double eodds = 0.0;
  double acc_parity_pct = 0.0;
  std::array<double, 2> group_error_pct{};

  double accuracy_pct() const { return 100.0 - error_pct; }
};

RunMetrics evaluate_predictions(std::span<const double> probs, std::span<const int> labels,
                                std::span<const int> groups, EOddsConvention convention = EOddsConvention::kMax);
RunMetrics evaluate_model(const PredictorModel& model, const LabeledDataset& data,
                          EOddsConvention convention = EOddsConvention::kMax);

// Ratios P_test(y|x) / P_train(y|x) between a model trained only on training
// data and one trained only on test data, on a common evaluation set.
struct RatioDiagnostic {
  std::vector<double> class0;
  std::vector<double> class1;
  std::vector<double> true_class;
  double threshold = 5.0;
  std::size_t exceed_count = 0;   // over class0 and class1 ratios
  double exceed_fraction = 0.0;   // exceed_count / (2 n)
};

RatioDiagnostic epsilon_ratio_diagnostic(const PredictorModel& model_train, const PredictorModel& model_test,
                                         const LabeledDataset& eval_set, double threshold = 5.0);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  double mean = 0.0;
};

// F_w(g(X)) over target and source rows. Both histograms share one range; a
// zero-width range collapses to a single bin.
struct FwRatioHistograms {
  Histogram target;
  Histogram source;
  double mean_fw_target = 0.0;        // constraint C1 wants 1
  double mean_inv_fw_source = 0.0;    // constraint C2 wants 1
  double fraction_target_at_most_1 = 0.0;
  double fraction_source_above_1 = 0.0;
};

FwRatioHistograms fw_ratio_histogram(const WeightNetwork& weight_net, const PredictorModel& encoder,
                                     const Matrix& source_features, const Matrix& target_features,
                                     std::size_t bins = 20);

// Spearman rank correlation (average ranks for ties).
double rank_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace fairshift
