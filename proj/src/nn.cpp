#include "fairshift/nn.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace fairshift {
namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = dist(rng);
  return m;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = unif(rng) >= rate ? keep_scale : 0.0;
  return m;
}

}  // namespace

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Parameter(uniform_matrix(in, out, bound, rng));
  bias = Parameter(uniform_matrix(1, out, bound, rng));
}

InputNormalization InputNormalization::identity(std::size_t d) {
  return InputNormalization{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

Matrix InputNormalization::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw std::invalid_argument("InputNormalization: width mismatch");
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - mean[c]) / std[c];
  return out;
}

PredictorModel::PredictorModel(const PredictorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.input_dim == 0) throw std::invalid_argument("PredictorModel: input_dim must be > 0");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0))
    throw std::invalid_argument("PredictorModel: dropout_rate must be in [0,1)");
  Rng rng(seed);
  layers_[0] = DenseLayer(cfg.input_dim, cfg.hidden_width, rng);
  layers_[1] = DenseLayer(cfg.hidden_width, cfg.representation_width, rng);
  layers_[2] = DenseLayer(cfg.representation_width, cfg.head_width, rng);
  layers_[3] = DenseLayer(cfg.head_width, 1, rng);
  norm_ = InputNormalization::identity(cfg.input_dim);
}

PredictorModel::PredictorModel(const PredictorConfig& cfg, std::array<DenseLayer, 4> layers, InputNormalization norm)
    : cfg_(cfg), layers_(std::move(layers)), norm_(std::move(norm)) {
  const std::size_t widths[5] = {cfg.input_dim, cfg.hidden_width, cfg.representation_width, cfg.head_width, 1};
  for (std::size_t l = 0; l < 4; ++l)
    if (layers_[l].in_dim() != widths[l] || layers_[l].out_dim() != widths[l + 1])
      throw std::invalid_argument("PredictorModel: layer shapes do not match config");
  if (norm_.mean.size() != cfg.input_dim || norm_.std.size() != cfg.input_dim)
    throw std::invalid_argument("PredictorModel: normalization width mismatch");
}

template <typename Self, typename Bind>
PredictorModel::Forward PredictorModel::run(Self& self, Tape& tape, const Matrix& batch, Mode mode, Rng* rng,
                                            Bind bind) {
  if (batch.cols() != self.cfg_.input_dim)
    throw std::invalid_argument("PredictorModel::forward: batch width " + std::to_string(batch.cols()) +
                                " != input_dim " + std::to_string(self.cfg_.input_dim));
  const bool dropout = mode == Mode::kTrain && self.cfg_.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw std::invalid_argument("PredictorModel::forward: training mode needs an rng");

  auto dense = [&](Var x, auto& layer) {
    return tape.add_row_bias(tape.matmul(x, bind(layer.weight)), bind(layer.bias));
  };
  auto drop = [&](Var x) {
    if (!dropout) return x;
    return tape.mul(x, tape.constant(dropout_mask(x.rows(), x.cols(), self.cfg_.dropout_rate, *rng)));
  };

  Var x = tape.constant(self.norm_.apply(batch));
  Var h1 = drop(tape.relu(dense(x, self.layers_[0])));
  Var rep = tape.relu(dense(h1, self.layers_[1]));
  Var h3 = drop(tape.relu(dense(drop(rep), self.layers_[2])));
  Var logits = dense(h3, self.layers_[3]);
  Var probs = tape.clamp(tape.sigmoid(logits), kProbFloor, kProbCeil);
  return Forward{rep, probs};
}

PredictorModel::Forward PredictorModel::forward(Tape& tape, const Matrix& batch, Mode mode, Rng* dropout_rng) {
  return run(*this, tape, batch, mode, dropout_rng, [&](Parameter& p) { return tape.param(p); });
}

PredictorModel::Forward PredictorModel::forward_frozen(Tape& tape, const Matrix& batch) const {
  return run(*this, tape, batch, Mode::kInference, nullptr, [&](const Parameter& p) { return tape.constant(p.value); });
}

PredictorModel::Prediction PredictorModel::predict(const Matrix& batch) const {
  Tape tape;
  const auto out = forward_frozen(tape, batch);
  const Matrix& p = out.probabilities.value();
  return Prediction{out.representation.value(), std::vector<double>(p.values().begin(), p.values().end())};
}

std::vector<Parameter*> PredictorModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> PredictorModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

void PredictorModel::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

void PredictorModel::zero_output_layer() {
  layers_[3].weight.value.fill(0.0);
  layers_[3].bias.value.fill(0.0);
}

void PredictorModel::set_input_normalization(InputNormalization norm) {
  if (norm.mean.size() != cfg_.input_dim || norm.std.size() != cfg_.input_dim)
    throw std::invalid_argument("set_input_normalization: width mismatch");
  for (double s : norm.std)
    if (!(s > 0.0)) throw std::invalid_argument("set_input_normalization: std must be positive");
  norm_ = std::move(norm);
}

WeightNetwork::WeightNetwork(std::size_t input_dim, std::size_t hidden_width, std::uint64_t seed) {
  if (input_dim == 0 || hidden_width == 0) throw std::invalid_argument("WeightNetwork: widths must be > 0");
  Rng rng(seed);
  first_ = DenseLayer(input_dim, hidden_width, rng);
  second_ = DenseLayer(hidden_width, 1, rng);
}

WeightNetwork::WeightNetwork(DenseLayer first, DenseLayer second) : first_(std::move(first)), second_(std::move(second)) {
  if (first_.out_dim() != second_.in_dim() || second_.out_dim() != 1)
    throw std::invalid_argument("WeightNetwork: layer shapes do not chain to a scalar output");
}

template <typename Self, typename Bind>
Var WeightNetwork::run(Self& self, Tape& tape, Var input, Bind bind) {
  if (input.cols() != self.first_.in_dim()) throw std::invalid_argument("WeightNetwork::forward: width mismatch");
  Var h = tape.relu(tape.add_row_bias(tape.matmul(input, bind(self.first_.weight)), bind(self.first_.bias)));
  Var z = tape.add_row_bias(tape.matmul(h, bind(self.second_.weight)), bind(self.second_.bias));
  return tape.exp(tape.clamp(z, -kLogitClamp, kLogitClamp));
}

Var WeightNetwork::forward(Tape& tape, Var input) {
  return run(*this, tape, input, [&](Parameter& p) { return tape.param(p); });
}

Var WeightNetwork::forward_frozen(Tape& tape, Var input) const {
  return run(*this, tape, input, [&](const Parameter& p) { return tape.constant(p.value); });
}

std::vector<double> WeightNetwork::evaluate(const Matrix& input) const {
  Tape tape;
  const Var out = forward_frozen(tape, tape.constant(input));
  const auto v = out.value().values();
  return {v.begin(), v.end()};
}

std::vector<Parameter*> WeightNetwork::parameters() {
  return {&first_.weight, &first_.bias, &second_.weight, &second_.bias};
}

std::vector<const Parameter*> WeightNetwork::parameters() const {
  return {&first_.weight, &first_.bias, &second_.weight, &second_.bias};
}

void WeightNetwork::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

double CosineSchedule::lr(std::size_t step) const {
  if (total_steps_ == 0 || step >= total_steps_) return 0.0;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps_);
  return base_lr_ * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

OptimizerState::OptimizerState(std::vector<Parameter*> params, AdamConfig cfg, CosineSchedule schedule,
                               std::size_t schedule_start)
    : params_(std::move(params)), cfg_(cfg), schedule_(schedule), schedule_pos_(schedule_start) {
  for (auto* p : params_) {
    first_moment_.emplace_back(p->value.rows(), p->value.cols());
    second_moment_.emplace_back(p->value.rows(), p->value.cols());
  }
}

double global_grad_norm(const std::vector<Parameter*>& params) {
  double sq = 0.0;
  for (const auto* p : params)
    for (double g : p->grad.values()) sq += g * g;
  return std::sqrt(sq);
}

void OptimizerState::step() {
  for (const auto* p : params_) {
    if (!p->grad.same_shape(p->value)) throw std::invalid_argument("optimizer: gradient shape mismatch");
    for (double g : p->grad.values())
      if (!std::isfinite(g)) throw std::domain_error("optimizer: non-finite gradient entry");
  }
  last_norm_ = global_grad_norm(params_);
  const double clip_scale = (cfg_.clip_norm > 0.0 && last_norm_ > cfg_.clip_norm) ? cfg_.clip_norm / last_norm_ : 1.0;
  last_lr_ = schedule_.lr(schedule_pos_);
  ++schedule_pos_;
  ++updates_;
  const double t = static_cast<double>(updates_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Matrix& m = first_moment_[k];
    Matrix& v = second_moment_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] * clip_scale;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= last_lr_ * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.value[i]);
    }
  }
}

std::uint64_t parameter_checksum(const std::vector<const Parameter*>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* p : params) {
    for (double v : p->value.values()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

}  // namespace fairshift
