#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairshift/config.hpp"
#include "fairshift/losses.hpp"
#include "fairshift/nn.hpp"
#include "fairshift/tabular.hpp"

namespace fairshift {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kOurs, kErm, kKliepIw, kLsifIw, kZsa, kUnweightedEntropy };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct TrainConfig {
  std::size_t pretrain_epochs = 15;   // stage 1, source risk only
  std::size_t adapt_epochs = 35;      // stage 2, min-max objective
  std::size_t batch_size = 32;
  std::size_t adapt_train_batch_size = 256;  // source rows per C2 estimate
  double lambda1 = 1.0;
  double lambda2 = 0.01;
  double c1 = 1.0;
  double c2 = 1.0;
  std::uint64_t seed = 0;
  double weight_decay = 1e-5;
  std::size_t m_cap = 50;  // target rows used for adaptation
  Method method = Method::kOurs;

  double base_lr = 1e-3;
  double clip_norm = 5.0;
  std::size_t hidden_width = 64;
  std::size_t representation_width = 64;
  std::size_t head_width = 32;
  double dropout_rate = 0.25;
  std::size_t weight_net_hidden = 32;
  std::size_t ratio_epochs = 200;  // importance-weighting baselines: full-batch ratio estimator steps
  double ratio_lr = 1e-2;
  double ratio_floor = 1e-3;

  std::size_t total_epochs() const { return pretrain_epochs + adapt_epochs; }
  PredictorConfig predictor_config(std::size_t input_dim) const;
  void validate() const;

  // Keys are the field names above; method takes to_string(Method) values.
  static TrainConfig from_config(const KeyValueConfig& kv);
  static TrainConfig from_config(const KeyValueConfig& kv, TrainConfig base);
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  int stage = 1;          // 1 = source risk only, 2 = adaptation
  LossBreakdown loss;
  std::uint64_t theta_checksum = 0;
  std::uint64_t w_checksum = 0;
  std::size_t wasserstein_skipped = 0;  // steps where a target group was absent
};

struct TrainedModel {
  PredictorModel predictor;
  std::optional<WeightNetwork> weight_net;  // F_w (ours) or s(X) (importance weighting)
  std::vector<EpochRecord> history;
  std::vector<double> source_weights;  // importance weights used by the IW baselines
  std::optional<InputNormalization> source_normalization;  // ZSA: statistics before adaptation
};

// Fired after every optimizer update with checksums of both players.
struct StepEvent {
  int stage = 1;
  char player = 't';  // 'w' for the weight network, 't' for the predictor
  std::size_t step = 0;
  std::uint64_t theta_checksum = 0;
  std::uint64_t w_checksum = 0;
};
using StepCallback = std::function<void(const StepEvent&)>;

TrainedModel train_erm(const LabeledDataset& source, const TrainConfig& cfg);
TrainedModel train_ours(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg,
                        const StepCallback& on_step = {});
TrainedModel train_unweighted_entropy(const LabeledDataset& source, const UnlabeledDataset& target,
                                      const TrainConfig& cfg);
// Source weights are s(X) floored at ratio_floor. KLIEP weights are first
// rescaled to mean 1 over the source rows, the constraint the penalized KLIEP
// loss only approximates.
TrainedModel train_importance_weighted(const LabeledDataset& source, const UnlabeledDataset& target,
                                       const TrainConfig& cfg);
TrainedModel train_zsa(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg);

// Dispatches on cfg.method.
TrainedModel train(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg);

// Ratio estimator s(X) ~ P^T(X)/P^S(X) fit with the KLIEP or LSIF loss
// (cfg.method selects which) over input features. Every epoch is one
// full-batch step over all source rows and the target adaptation subset.
WeightNetwork fit_ratio_estimator(const LabeledDataset& source, const UnlabeledDataset& target,
                                  const TrainConfig& cfg, std::vector<double>* loss_per_epoch = nullptr);

// Second phase of the importance-weighting baselines: instance-weighted source
// risk plus lambda * W_2 between target groups, for total_epochs() epochs.
TrainedModel train_weighted_erm(const LabeledDataset& source, const UnlabeledDataset* target,
                                const TrainConfig& cfg, const std::vector<double>& weights, double lambda);

struct LambdaDefaults {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};
// Known datasets: adult, arrhythmia, communities, drug, synthetic.
std::optional<LambdaDefaults> dataset_lambda_defaults(const std::string& dataset);

// One JSON object per epoch: epoch, stage, erm, weighted_entropy, wasserstein,
// c1_penalty, c2_penalty, total, theta_checksum, w_checksum, wasserstein_skipped.
void write_history_jsonl(std::ostream& out, const std::vector<EpochRecord>& history);

// Target rows used for adaptation: the first m_cap of a seeded permutation.
std::vector<std::size_t> adaptation_subset(std::size_t target_size, const TrainConfig& cfg);

}  // namespace fairshift
