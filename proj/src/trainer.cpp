#include "fairshift/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace fairshift {
namespace {

// Independent random streams derived from one seed.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kShuffleStream,
  kDropoutStream,
  kWeightInitStream,
  kSourceBatchStream,
  kSubsetStream,
  kRatioInitStream,
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * stream;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t batches_per_epoch(std::size_t n, std::size_t batch) { return (n + batch - 1) / batch; }

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
  return out;
}

// Uniform subset of size min(k, n) without replacement, in sorted order.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> pick(const std::vector<int>& v, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

AdamConfig adam_config(const TrainConfig& cfg, double lr) {
  AdamConfig a;
  a.base_lr = lr;
  a.weight_decay = cfg.weight_decay;
  a.clip_norm = cfg.clip_norm;
  return a;
}

void check_finite(double v, const char* what, std::size_t epoch, std::size_t step, const LossBreakdown& acc) {
  if (std::isfinite(v)) return;
  std::ostringstream os;
  os << "non-finite " << what << " at epoch " << epoch << ", step " << step << " (running sums: erm=" << acc.erm
     << " weighted_entropy=" << acc.weighted_entropy << " wasserstein=" << acc.wasserstein
     << " c1=" << acc.c1_penalty << " c2=" << acc.c2_penalty << ")";
  throw TrainingError(os.str());
}

LossBreakdown averaged(LossBreakdown acc, std::size_t steps) {
  const double s = static_cast<double>(std::max<std::size_t>(steps, 1));
  acc.erm /= s;
  acc.weighted_entropy /= s;
  acc.wasserstein /= s;
  acc.c1_penalty /= s;
  acc.c2_penalty /= s;
  acc.total /= s;
  return acc;
}

InputNormalization to_input_normalization(const NormalizationStats& s) { return {s.means, s.stds}; }

// Target rows selected for adaptation plus their group membership.
struct TargetBatch {
  Matrix features;
  std::vector<std::size_t> group0;
  std::vector<std::size_t> group1;
  bool both_groups() const { return !group0.empty() && !group1.empty(); }
};

TargetBatch make_target_batch(const UnlabeledDataset& target, const TrainConfig& cfg) {
  const auto idx = adaptation_subset(target.size(), cfg);
  TargetBatch tb;
  tb.features = target.features().select_rows(idx);
  for (std::size_t i = 0; i < idx.size(); ++i) (target.groups()[idx[i]] == 0 ? tb.group0 : tb.group1).push_back(i);
  return tb;
}

// Supervised loop over the source set shared by every trainer. Batches, dropout
// masks and the learning-rate schedule depend only on the seed and the source
// size, so trainers that add nothing to the loss follow the same trajectory.
class SourceLoop {
 public:
  SourceLoop(const LabeledDataset& source, const TrainConfig& cfg)
      : source_(source),
        cfg_(cfg),
        model_(cfg.predictor_config(source.dim()), stream_seed(cfg.seed, kInitStream)),
        spe_(batches_per_epoch(source.size(), cfg.batch_size)),
        opt_(model_.parameters(), adam_config(cfg, cfg.base_lr), CosineSchedule(cfg.base_lr, cfg.total_epochs() * spe_)),
        shuffle_rng_(stream_seed(cfg.seed, kShuffleStream)),
        dropout_rng_(stream_seed(cfg.seed, kDropoutStream)) {}

  SourceLoop(const SourceLoop&) = delete;
  SourceLoop& operator=(const SourceLoop&) = delete;

  PredictorModel& model() { return model_; }
  std::size_t steps_per_epoch() const { return spe_; }
  std::size_t step() const { return step_; }

  std::vector<std::vector<std::size_t>> next_epoch() {
    return shuffled_batches(source_.size(), cfg_.batch_size, shuffle_rng_);
  }

  // One predictor update. `extra` may add terms to the source risk by
  // returning a valid Var; `weights` switches to instance-weighted risk.
  template <typename Extra>
  void theta_step(const std::vector<std::size_t>& batch, const std::vector<double>* weights, Extra&& extra,
                  std::size_t epoch, LossBreakdown& acc) {
    const Matrix xb = source_.features().select_rows(batch);
    const std::vector<int> yb = pick(source_.labels(), batch);
    model_.zero_grad();
    Tape t;
    const auto f = model_.forward(t, xb, Mode::kTrain, &dropout_rng_);
    Var loss;
    if (weights) {
      Matrix w(batch.size(), 1);
      for (std::size_t i = 0; i < batch.size(); ++i) w[i] = (*weights)[batch[i]];
      loss = ad::weighted_cross_entropy(t, f.probabilities, yb, t.constant(std::move(w)));
    } else {
      loss = ad::cross_entropy_risk(t, f.probabilities, yb);
    }
    acc.erm += loss.scalar();
    Var more = extra(t, acc);
    Var total = more.valid() ? t.add(loss, more) : loss;
    acc.total += total.scalar();
    check_finite(total.scalar(), "predictor loss", epoch, step_, acc);
    t.backward(total);
    try {
      opt_.step();
    } catch (const std::domain_error& e) {
      throw TrainingError("epoch " + std::to_string(epoch) + ", step " + std::to_string(step_) + ": " + e.what());
    }
    ++step_;
  }

  EpochRecord record(std::size_t epoch, int stage, const LossBreakdown& acc) const {
    EpochRecord r;
    r.epoch = epoch;
    r.stage = stage;
    r.loss = averaged(acc, spe_);
    r.theta_checksum = parameter_checksum(std::as_const(model_).parameters());
    return r;
  }

 private:
  const LabeledDataset& source_;
  const TrainConfig& cfg_;
  PredictorModel model_;
  std::size_t spe_;
  OptimizerState opt_;
  Rng shuffle_rng_;
  Rng dropout_rng_;
  std::size_t step_ = 0;
};

struct NoExtra {
  Var operator()(Tape&, LossBreakdown&) const { return {}; }
};

void run_source_only_epochs(SourceLoop& loop, std::size_t first_epoch, std::size_t count,
                            const std::vector<double>* weights, std::vector<EpochRecord>& history) {
  for (std::size_t e = first_epoch; e < first_epoch + count; ++e) {
    LossBreakdown acc;
    for (const auto& batch : loop.next_epoch()) loop.theta_step(batch, weights, NoExtra{}, e, acc);
    history.push_back(loop.record(e, 1, acc));
  }
}

// lambda2 * W_2 between target group representations, or an invalid Var when
// the term is off or one group is missing from the target rows.
Var wasserstein_term(Tape& t, Var rep, const TargetBatch& tb, double lambda2, LossBreakdown& acc,
                     std::size_t& skipped) {
  if (lambda2 == 0.0) return {};
  if (!tb.both_groups()) {
    ++skipped;
    return {};
  }
  Var w2 = ad::wasserstein2(t, t.select_rows(rep, tb.group0), t.select_rows(rep, tb.group1));
  acc.wasserstein += w2.scalar();
  return t.scale(w2, lambda2);
}

Var add_valid(Tape& t, Var a, Var b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  return t.add(a, b);
}

void require_both_groups(const UnlabeledDataset& target, const char* who) {
  if (!target.has_group(0) || !target.has_group(1))
    throw TrainingError(std::string(who) + ": target data must contain both groups");
}

void check_inputs(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg) {
  cfg.validate();
  if (source.size() == 0) throw TrainingError("source data is empty");
  if (source.dim() != target.dim()) throw TrainingError("source and target feature dimensions differ");
  if (cfg.m_cap > target.size())
    throw TrainingError("m_cap (" + std::to_string(cfg.m_cap) + ") exceeds target size (" +
                        std::to_string(target.size()) + ")");
}

// Shared by train_ours and train_unweighted_entropy.
TrainedModel train_entropy_regularized(const LabeledDataset& source, const UnlabeledDataset& target,
                                       const TrainConfig& cfg, bool weighted, const StepCallback& on_step) {
  check_inputs(source, target, cfg);
  require_both_groups(target, weighted ? "train_ours" : "train_unweighted_entropy");

  SourceLoop loop(source, cfg);
  TrainedModel out;
  run_source_only_epochs(loop, 1, cfg.pretrain_epochs, nullptr, out.history);

  const TargetBatch tb = make_target_batch(target, cfg);
  std::optional<WeightNetwork> wnet;
  std::optional<OptimizerState> w_opt;
  if (weighted) {
    wnet.emplace(cfg.representation_width, cfg.weight_net_hidden, stream_seed(cfg.seed, kWeightInitStream));
    w_opt.emplace(wnet->parameters(), adam_config(cfg, cfg.base_lr),
                  CosineSchedule(cfg.base_lr, cfg.total_epochs() * loop.steps_per_epoch()),
                  cfg.pretrain_epochs * loop.steps_per_epoch());
  }
  Rng batch_rng(stream_seed(cfg.seed, kSourceBatchStream));
  auto checksums = [&](int stage, char player) {
    if (!on_step) return;
    StepEvent ev;
    ev.stage = stage;
    ev.player = player;
    ev.step = loop.step();
    ev.theta_checksum = parameter_checksum(std::as_const(loop.model()).parameters());
    if (wnet) ev.w_checksum = parameter_checksum(std::as_const(*wnet).parameters());
    on_step(ev);
  };

  for (std::size_t e = cfg.pretrain_epochs + 1; e <= cfg.total_epochs(); ++e) {
    LossBreakdown acc;
    std::size_t skipped = 0;
    for (const auto& batch : loop.next_epoch()) {
      if (weighted) {
        // w-player: ascend lambda1 * weighted entropy minus the constraint
        // penalty, with the predictor held fixed.
        const auto pred_t = loop.model().predict(tb.features);
        const auto big = draw_subset(source.size(), cfg.adapt_train_batch_size, batch_rng);
        const Matrix rep_s = loop.model().predict(source.features().select_rows(big)).representation;
        const auto h = conditional_entropy(pred_t.probabilities);
        wnet->zero_grad();
        Tape t;
        Var fw_t = wnet->forward(t, t.constant(pred_t.representation));
        Var fw_s = wnet->forward(t, t.constant(rep_s));
        Var we = ad::weighted_entropy_term(t, fw_t, t.constant(Matrix::column(h)));
        Var c1 = ad::constraint_c1(t, fw_t, cfg.c1);
        Var c2 = ad::constraint_c2(t, fw_s, cfg.c2);
        acc.c1_penalty += c1.scalar();
        acc.c2_penalty += c2.scalar();
        Var loss = t.sub(t.add(c1, c2), t.scale(we, cfg.lambda1));
        check_finite(loss.scalar(), "weight-network objective", e, loop.step(), acc);
        t.backward(loss);
        try {
          w_opt->step();
        } catch (const std::domain_error& err) {
          throw TrainingError("epoch " + std::to_string(e) + ": weight network: " + err.what());
        }
        checksums(2, 'w');
      }

      auto extra = [&](Tape& t, LossBreakdown& a) -> Var {
        if (cfg.lambda1 == 0.0 && cfg.lambda2 == 0.0) return {};
        const auto f = loop.model().forward(t, tb.features, Mode::kInference);
        Var entropy_term;
        if (cfg.lambda1 != 0.0) {
          Var h = ad::conditional_entropy(t, f.probabilities);
          Var we = weighted ? ad::weighted_entropy_term(
                                  t, t.stop_gradient(wnet->forward_frozen(t, f.representation)), h)
                            : t.mean(h);
          a.weighted_entropy += we.scalar();
          entropy_term = t.scale(we, cfg.lambda1);
        }
        return add_valid(t, entropy_term, wasserstein_term(t, f.representation, tb, cfg.lambda2, a, skipped));
      };
      loop.theta_step(batch, nullptr, extra, e, acc);
      checksums(2, 't');
    }
    EpochRecord r = loop.record(e, 2, acc);
    if (wnet) r.w_checksum = parameter_checksum(std::as_const(*wnet).parameters());
    r.wasserstein_skipped = skipped;
    out.history.push_back(r);
  }

  out.predictor = loop.model();
  out.weight_net = std::move(wnet);
  return out;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kErm: return "erm";
    case Method::kKliepIw: return "kliep_iw";
    case Method::kLsifIw: return "lsif_iw";
    case Method::kZsa: return "zsa";
    case Method::kUnweightedEntropy: return "unweighted_entropy";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kOurs, Method::kErm, Method::kKliepIw, Method::kLsifIw, Method::kZsa,
                   Method::kUnweightedEntropy})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected ours, erm, kliep_iw, lsif_iw, zsa or unweighted_entropy)");
}

PredictorConfig TrainConfig::predictor_config(std::size_t input_dim) const {
  PredictorConfig p;
  p.input_dim = input_dim;
  p.hidden_width = hidden_width;
  p.representation_width = representation_width;
  p.head_width = head_width;
  p.dropout_rate = dropout_rate;
  return p;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("TrainConfig: " + msg); };
  if (total_epochs() == 0) fail("pretrain_epochs + adapt_epochs must be >= 1");
  if (batch_size == 0 || adapt_train_batch_size == 0) fail("batch sizes must be >= 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) fail("lambda1 and lambda2 must be >= 0");
  if (!(c1 > 0.0) || !(c2 > 0.0)) fail("c1 and c2 must be > 0");
  if (m_cap < 2) fail("m_cap must be >= 2");
  if (!(base_lr > 0.0) || !(ratio_lr > 0.0)) fail("learning rates must be > 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (!(ratio_floor > 0.0)) fail("ratio_floor must be > 0");
  if (hidden_width == 0 || representation_width == 0 || head_width == 0 || weight_net_hidden == 0)
    fail("layer widths must be >= 1");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv) { return from_config(kv, TrainConfig{}); }

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv, TrainConfig c) {
  auto size = [&](const char* key, std::size_t& field) {
    const long long v = kv.get_int(key, static_cast<long long>(field));
    if (v < 0) throw std::invalid_argument(std::string("TrainConfig: ") + key + " must be >= 0");
    field = static_cast<std::size_t>(v);
  };
  auto real = [&](const char* key, double& field) { field = kv.get_double(key, field); };
  size("pretrain_epochs", c.pretrain_epochs);
  size("adapt_epochs", c.adapt_epochs);
  size("batch_size", c.batch_size);
  size("adapt_train_batch_size", c.adapt_train_batch_size);
  real("lambda1", c.lambda1);
  real("lambda2", c.lambda2);
  real("c1", c.c1);
  real("c2", c.c2);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  real("weight_decay", c.weight_decay);
  size("m_cap", c.m_cap);
  if (auto m = kv.get("method")) c.method = parse_method(*m);
  real("base_lr", c.base_lr);
  real("clip_norm", c.clip_norm);
  size("hidden_width", c.hidden_width);
  size("representation_width", c.representation_width);
  size("head_width", c.head_width);
  real("dropout_rate", c.dropout_rate);
  size("weight_net_hidden", c.weight_net_hidden);
  size("ratio_epochs", c.ratio_epochs);
  real("ratio_lr", c.ratio_lr);
  real("ratio_floor", c.ratio_floor);
  c.validate();
  return c;
}

std::optional<LambdaDefaults> dataset_lambda_defaults(const std::string& dataset) {
  if (dataset == "adult") return LambdaDefaults{1.0, 0.01};
  if (dataset == "arrhythmia") return LambdaDefaults{0.01, 0.005};
  if (dataset == "communities") return LambdaDefaults{0.005, 0.0001};
  if (dataset == "drug") return LambdaDefaults{0.1, 0.1};
  if (dataset == "synthetic") return LambdaDefaults{1.0, 0.1};
  return std::nullopt;
}

std::vector<std::size_t> adaptation_subset(std::size_t target_size, const TrainConfig& cfg) {
  Rng rng(stream_seed(cfg.seed, kSubsetStream));
  return draw_subset(target_size, cfg.m_cap, rng);
}

TrainedModel train_erm(const LabeledDataset& source, const TrainConfig& cfg) {
  cfg.validate();
  if (source.size() == 0) throw TrainingError("source data is empty");
  SourceLoop loop(source, cfg);
  TrainedModel out;
  run_source_only_epochs(loop, 1, cfg.total_epochs(), nullptr, out.history);
  out.predictor = loop.model();
  return out;
}

TrainedModel train_ours(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg,
                        const StepCallback& on_step) {
  return train_entropy_regularized(source, target, cfg, true, on_step);
}

TrainedModel train_unweighted_entropy(const LabeledDataset& source, const UnlabeledDataset& target,
                                      const TrainConfig& cfg) {
  return train_entropy_regularized(source, target, cfg, false, {});
}

WeightNetwork fit_ratio_estimator(const LabeledDataset& source, const UnlabeledDataset& target,
                                  const TrainConfig& cfg, std::vector<double>* loss_per_epoch) {
  check_inputs(source, target, cfg);
  const bool lsif = cfg.method == Method::kLsifIw;
  const Matrix xt = target.features().select_rows(adaptation_subset(target.size(), cfg));
  WeightNetwork s(source.dim(), cfg.weight_net_hidden, stream_seed(cfg.seed, kRatioInitStream));
  OptimizerState opt(s.parameters(), adam_config(cfg, cfg.ratio_lr), CosineSchedule(cfg.ratio_lr, cfg.ratio_epochs));
  for (std::size_t e = 1; e <= cfg.ratio_epochs; ++e) {
    s.zero_grad();
    Tape t;
    Var st = s.forward(t, t.constant(xt));
    Var ss = s.forward(t, t.constant(source.features()));
    Var loss = lsif ? ad::lsif_loss(t, st, ss) : ad::kliep_loss(t, st, ss);
    if (!std::isfinite(loss.scalar()))
      throw TrainingError("non-finite ratio-estimator loss at epoch " + std::to_string(e));
    if (loss_per_epoch) loss_per_epoch->push_back(loss.scalar());
    t.backward(loss);
    opt.step();
  }
  return s;
}

TrainedModel train_weighted_erm(const LabeledDataset& source, const UnlabeledDataset* target,
                                const TrainConfig& cfg, const std::vector<double>& weights, double lambda) {
  cfg.validate();
  if (weights.size() != source.size()) throw TrainingError("one weight per source row is required");
  if (lambda > 0.0) {
    if (!target) throw TrainingError("representation matching needs target data");
    check_inputs(source, *target, cfg);
    require_both_groups(*target, "train_importance_weighted");
  }
  SourceLoop loop(source, cfg);
  TrainedModel out;
  out.source_weights = weights;
  TargetBatch tb;
  if (lambda > 0.0) tb = make_target_batch(*target, cfg);
  for (std::size_t e = 1; e <= cfg.total_epochs(); ++e) {
    LossBreakdown acc;
    std::size_t skipped = 0;
    auto extra = [&](Tape& t, LossBreakdown& a) -> Var {
      if (lambda == 0.0) return {};
      const auto f = loop.model().forward(t, tb.features, Mode::kInference);
      return wasserstein_term(t, f.representation, tb, lambda, a, skipped);
    };
    for (const auto& batch : loop.next_epoch()) loop.theta_step(batch, &out.source_weights, extra, e, acc);
    EpochRecord r = loop.record(e, 1, acc);
    r.wasserstein_skipped = skipped;
    out.history.push_back(r);
  }
  out.predictor = loop.model();
  return out;
}

TrainedModel train_importance_weighted(const LabeledDataset& source, const UnlabeledDataset& target,
                                       const TrainConfig& cfg) {
  if (cfg.method != Method::kKliepIw && cfg.method != Method::kLsifIw)
    throw std::invalid_argument("train_importance_weighted needs method kliep_iw or lsif_iw");
  WeightNetwork s = fit_ratio_estimator(source, target, cfg);
  std::vector<double> weights = s.evaluate(source.features());
  if (cfg.method == Method::kKliepIw) {
    double mean = 0.0;
    for (double w : weights) mean += w;
    mean /= static_cast<double>(weights.size());
    for (double& w : weights) w /= mean;
  }
  for (double& w : weights) w = std::max(w, cfg.ratio_floor);
  TrainedModel out = train_weighted_erm(source, &target, cfg, weights, cfg.lambda2);
  out.weight_net = std::move(s);
  return out;
}

TrainedModel train_zsa(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg) {
  check_inputs(source, target, cfg);
  const auto source_norm = to_input_normalization(fit_zscore(source.features(), source.feature_kinds()));
  SourceLoop loop(source, cfg);
  loop.model().set_input_normalization(source_norm);
  TrainedModel out;
  run_source_only_epochs(loop, 1, cfg.total_epochs(), nullptr, out.history);
  out.predictor = loop.model();
  const Matrix xt = target.features().select_rows(adaptation_subset(target.size(), cfg));
  out.predictor.set_input_normalization(to_input_normalization(fit_zscore(xt, source.feature_kinds())));
  out.source_normalization = source_norm;
  return out;
}

TrainedModel train(const LabeledDataset& source, const UnlabeledDataset& target, const TrainConfig& cfg) {
  switch (cfg.method) {
    case Method::kOurs: return train_ours(source, target, cfg);
    case Method::kErm: return train_erm(source, cfg);
    case Method::kKliepIw:
    case Method::kLsifIw: return train_importance_weighted(source, target, cfg);
    case Method::kZsa: return train_zsa(source, target, cfg);
    case Method::kUnweightedEntropy: return train_unweighted_entropy(source, target, cfg);
  }
  throw std::invalid_argument("unknown method");
}

void write_history_jsonl(std::ostream& out, const std::vector<EpochRecord>& history) {
  for (const auto& r : history) {
    nlohmann::json j = {
        {"epoch", r.epoch},
        {"stage", r.stage},
        {"erm", r.loss.erm},
        {"weighted_entropy", r.loss.weighted_entropy},
        {"wasserstein", r.loss.wasserstein},
        {"c1_penalty", r.loss.c1_penalty},
        {"c2_penalty", r.loss.c2_penalty},
        {"total", r.loss.total},
        {"theta_checksum", r.theta_checksum},
        {"w_checksum", r.w_checksum},
        {"wasserstein_skipped", r.wasserstein_skipped},
    };
    out << j.dump() << '\n';
  }
}

}  // namespace fairshift
