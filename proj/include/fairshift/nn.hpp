#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairshift/autodiff.hpp"
#include "fairshift/synthetic.hpp"

namespace fairshift {

inline constexpr double kProbFloor = 1e-7;
inline constexpr double kProbCeil = 1.0 - 1e-7;

enum class Mode { kTrain, kInference };

struct DenseLayer {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Rng& rng);
  std::size_t in_dim() const { return weight.value.rows(); }
  std::size_t out_dim() const { return weight.value.cols(); }
};

// Fixed affine map x' = (x - mean) / std applied before the first layer.
// Identity unless set; the ZSA baseline re-estimates it from target data.
struct InputNormalization {
  std::vector<double> mean;
  std::vector<double> std;

  static InputNormalization identity(std::size_t d);
  Matrix apply(const Matrix& x) const;
};

struct PredictorConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_width = 64;
  std::size_t representation_width = 64;  // k
  std::size_t head_width = 32;
  double dropout_rate = 0.25;
};

// F = h o g: layers 1-2 form the encoder g, layers 3-4 the classifier h.
class PredictorModel {
 public:
  struct Forward {
    Var representation;  // layer-2 activations, b x k
    Var probabilities;   // P(Y_hat = 1 | x), b x 1, clamped to [1e-7, 1 - 1e-7]
  };
  struct Prediction {
    Matrix representation;
    std::vector<double> probabilities;
  };

  PredictorModel() = default;
  PredictorModel(const PredictorConfig& cfg, std::uint64_t seed);
  PredictorModel(const PredictorConfig& cfg, std::array<DenseLayer, 4> layers, InputNormalization norm);

  // Records a differentiable pass. Training mode draws dropout masks from rng.
  Forward forward(Tape& tape, const Matrix& batch, Mode mode, Rng* dropout_rng = nullptr);
  // Inference pass; parameters enter the tape as constants.
  Forward forward_frozen(Tape& tape, const Matrix& batch) const;
  Prediction predict(const Matrix& batch) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();
  void zero_output_layer();

  const PredictorConfig& config() const { return cfg_; }
  const std::array<DenseLayer, 4>& layers() const { return layers_; }
  const InputNormalization& input_normalization() const { return norm_; }
  void set_input_normalization(InputNormalization norm);

 private:
  template <typename Self, typename Bind>
  static Forward run(Self& self, Tape& tape, const Matrix& batch, Mode mode, Rng* rng, Bind bind);

  PredictorConfig cfg_;
  std::array<DenseLayer, 4> layers_;
  InputNormalization norm_;
};

// F_w: two dense layers with a strictly positive output exp(clamp(z, -10, 10)).
class WeightNetwork {
 public:
  static constexpr double kLogitClamp = 10.0;

  WeightNetwork() = default;
  WeightNetwork(std::size_t input_dim, std::size_t hidden_width, std::uint64_t seed);
  WeightNetwork(DenseLayer first, DenseLayer second);

  Var forward(Tape& tape, Var input);               // tracks parameters
  Var forward_frozen(Tape& tape, Var input) const;  // parameters as constants
  std::vector<double> evaluate(const Matrix& input) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();
  std::size_t input_dim() const { return first_.in_dim(); }
  const DenseLayer& first() const { return first_; }
  const DenseLayer& second() const { return second_; }

 private:
  template <typename Self, typename Bind>
  static Var run(Self& self, Tape& tape, Var input, Bind bind);

  DenseLayer first_;
  DenseLayer second_;
};

// eta_t = base * (1 + cos(pi * t / total)) / 2, reaching 0 at t = total.
class CosineSchedule {
 public:
  CosineSchedule() = default;
  CosineSchedule(double base_lr, std::size_t total_steps) : base_lr_(base_lr), total_steps_(total_steps) {}
  double lr(std::size_t step) const;
  std::size_t total_steps() const { return total_steps_; }
  double base_lr() const { return base_lr_; }

 private:
  double base_lr_ = 1e-3;
  std::size_t total_steps_ = 1;
};

struct AdamConfig {
  double base_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
  double clip_norm = 5.0;     // global gradient norm
};

// Adam with global-norm clipping, decoupled weight decay and a cosine schedule.
class OptimizerState {
 public:
  OptimizerState(std::vector<Parameter*> params, AdamConfig cfg, CosineSchedule schedule,
                 std::size_t schedule_start = 0);

  // Applies one update from the gradients currently stored in the parameters.
  // Throws std::domain_error on non-finite gradient entries.
  void step();

  std::size_t schedule_position() const { return schedule_pos_; }
  std::size_t update_count() const { return updates_; }
  double last_lr() const { return last_lr_; }
  double last_grad_norm() const { return last_norm_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  CosineSchedule schedule_;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
  std::size_t schedule_pos_ = 0;
  std::size_t updates_ = 0;
  double last_lr_ = 0.0;
  double last_norm_ = 0.0;
};

double global_grad_norm(const std::vector<Parameter*>& params);

// FNV-1a over the raw bytes of the parameter values.
std::uint64_t parameter_checksum(const std::vector<const Parameter*>& params);

}  // namespace fairshift
