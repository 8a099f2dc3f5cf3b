#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairshift/config.hpp"
#include "fairshift/metrics.hpp"
#include "fairshift/shift_split.hpp"
#include "fairshift/synthetic.hpp"
#include "fairshift/trainer.hpp"

namespace fairshift {

// Where the data of one run comes from.
//   "synthetic"  asymmetric-shift generator; source and target are sampled
//                directly, so the split settings are not used
//   anything else is a CSV path, shift-split per run
struct ExperimentSpec {
  std::string dataset = "synthetic";
  std::filesystem::path schema;  // optional sidecar for CSV data
  std::size_t synthetic_n_per_group = 250;
  std::vector<double> synthetic_shift{1.5, -1.5};

  ShiftConfig shift;
  TrainConfig train;
  std::vector<Method> methods{Method::kOurs};
  std::vector<double> lambda1{1.0};
  std::vector<double> lambda2{0.01};
  std::vector<double> gamma{10.0};
  std::vector<std::size_t> m{50};
  std::size_t repetitions = 50;
  std::uint64_t base_seed = 0;
  EOddsConvention eodds = EOddsConvention::kMax;

  void validate() const;

  // Keys: dataset, schema, synthetic_n_per_group, synthetic_shift, methods,
  // lambda1, lambda2, gamma, m (lists are comma separated), repetitions,
  // base_seed, eodds (max|mean), percentile, test_fraction, asymmetric_group,
  // plus every TrainConfig key.
  static ExperimentSpec from_config(const KeyValueConfig& kv);
};

struct GridPoint {
  Method method = Method::kOurs;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gamma = 0.0;
  std::size_t m = 0;
};

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

struct RunRecord {
  GridPoint point;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  RunMetrics metrics;
  std::string message;  // failure reason
};

struct AggregateRow {
  GridPoint point;
  std::size_t n_runs = 0;    // successful runs
  std::size_t n_failed = 0;
  double error_pct_mean = 0.0;
  double error_pct_std = 0.0;
  double eodds_mean = 0.0;
  double eodds_std = 0.0;
  double acc_parity_pct_mean = 0.0;
  double acc_parity_pct_std = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // grid-major, repetition-minor
  std::vector<AggregateRow> aggregate;
  bool all_ok() const;
};

// Data for one run: labeled source, unlabeled target and the target labels.
struct RunData {
  LabeledDataset source;
  UnlabeledDataset target;
  LabeledDataset target_labeled;
};

// Loads the CSV dataset of the spec and z-scores it over the whole pool.
LabeledDataset load_pool(const ExperimentSpec& spec);

// Builds the source/target pair of one repetition. CSV data (a pool from
// load_pool) is split with the exponential tilt at the given gamma.
RunData prepare_run_data(const ExperimentSpec& spec, const LabeledDataset* pool, double gamma, std::uint64_t seed);

RunRecord run_single(const ExperimentSpec& spec, const LabeledDataset* pool, const GridPoint& point,
                     std::size_t rep);

// Runs every grid point `repetitions` times with seeds base_seed + rep. Runs
// execute in parallel; a failing run is recorded and the sweep continues.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(const std::vector<double>& v);
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

// runs.csv header:
//   method,lambda1,lambda2,gamma,m,rep,seed,status,error_pct,eodds,acc_parity_pct,
//   group0_error_pct,group1_error_pct,message
// aggregate.csv header:
//   method,lambda1,lambda2,gamma,m,n_runs,n_failed,error_pct_mean,error_pct_std,
//   eodds_mean,eodds_std,acc_parity_pct_mean,acc_parity_pct_std
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

// Metrics row: method,seed,gamma,error_pct,eodds,acc_parity_pct
std::string metrics_csv_header();
std::string metrics_csv_row(Method method, std::uint64_t seed, double gamma, const RunMetrics& m);

// Rows not dominated in (error_pct_mean, eodds_mean). Among exact duplicates
// the first is kept; input order is preserved.
std::vector<AggregateRow> pareto_frontier(const std::vector<AggregateRow>& rows);
std::vector<std::size_t> pareto_indices(const std::vector<std::pair<double, double>>& points);

// Variance of two risk estimates on Gaussian tilt data, for fixed pretrained
// models. Per repetition a fresh source sample of source_multiplier * m rows
// and a target sample of m rows are drawn; the estimates are
//   importance sampling: (1/n) sum_i z(x_i) CE_i with true ratios z = P^T/P^S
//   weighted entropy:    ER^S + lambda (1/m) sum_j exp(-P^S/P^T (x_j)) H_j
struct VarianceSpec {
  std::vector<double> gamma{0.0, 1.0, 2.0, 3.0};
  std::vector<std::size_t> m{20, 40, 80};
  std::size_t repetitions = 20;
  std::size_t model_seeds = 5;
  std::size_t dim = 2;
  std::size_t source_multiplier = 10;
  std::size_t pretrain_size = 500;
  double lambda = 1.0;
  std::uint64_t base_seed = 0;
  TrainConfig pretrain;  // ERM settings for the fixed models

  VarianceSpec();
  void validate() const;
  // Keys: gamma, m, repetitions, model_seeds, dim, source_multiplier,
  // pretrain_size, lambda, base_seed, plus TrainConfig keys for pretraining.
  static VarianceSpec from_config(const KeyValueConfig& kv);
};

struct VarianceRow {
  double gamma = 0.0;
  std::size_t m = 0;
  std::size_t model_seed = 0;
  double is_mean = 0.0;
  double is_std = 0.0;
  double we_mean = 0.0;
  double we_std = 0.0;
};

struct EstimatePair {
  double importance_sampling = 0.0;
  double weighted_entropy = 0.0;
};

EstimatePair draw_estimates(const PredictorModel& model, const GaussianTiltModel& tilt, std::size_t m,
                            std::size_t source_multiplier, double lambda, Rng& rng);

std::vector<VarianceRow> run_variance_study(const VarianceSpec& spec);

// variance.csv header: gamma,m,model_seed,reps,is_mean,is_std,we_mean,we_std,is_std_exceeds_we_std
void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows, std::size_t reps);

// Monte-Carlo terms of the generalization bound on Gaussian tilt data with
// expected cross-entropy under the true P(Y | X).
struct BoundEstimate {
  double source_risk = 0.0;
  double weighted_entropy = 0.0;  // E_T[exp(-P^S/P^T) H]
  double test_risk = 0.0;
  double gap = 0.0;               // source_risk + epsilon * weighted_entropy - test_risk
};

BoundEstimate estimate_bound(const PredictorModel& model, const GaussianTiltModel& tilt, std::size_t samples,
                             double epsilon, Rng& rng);

std::string format_double(double v);

}  // namespace fairshift
