#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "fairshift/checkpoint.hpp"
#include "fairshift/losses.hpp"
#include "fairshift/nn.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace fairshift;

namespace {

Matrix random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = n(rng);
  return m;
}

PredictorModel small_model(std::size_t d, std::uint64_t seed) {
  PredictorConfig cfg;
  cfg.input_dim = d;
  return PredictorModel(cfg, seed);
}

}  // namespace

TEST_CASE("forward matches the reference implementation") {
  const auto model = small_model(5, 3);
  const Matrix x = random_batch(10, 5, 4);
  const auto p = model.predict(x);
  const auto ref = oracle::reference_forward(model, x);
  REQUIRE(p.representation.same_shape(ref.representation));
  CHECK(p.representation.cols() == 64);
  for (std::size_t i = 0; i < ref.representation.size(); ++i)
    CHECK(p.representation[i] == doctest::Approx(ref.representation[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < 10; ++i) CHECK(p.probabilities[i] == doctest::Approx(ref.probabilities[i]).epsilon(1e-12));
}

TEST_CASE("zero output layer gives probability one half") {
  auto model = small_model(3, 1);
  model.zero_output_layer();
  for (double p : model.predict(random_batch(8, 3, 2)).probabilities) CHECK(p == 0.5);
}

TEST_CASE("duplicated row gives identical outputs in inference mode") {
  const auto model = small_model(4, 2);
  Matrix x(6, 4);
  const Matrix one = random_batch(1, 4, 9);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = one(0, j);
  const auto p = model.predict(x).probabilities;
  for (double v : p) CHECK(v == p[0]);
  CHECK(model.predict(x).probabilities == p);
}

TEST_CASE("probabilities stay inside the clamp range") {
  const auto model = small_model(3, 5);
  for (double v : model.predict(random_batch(200, 3, 6, 1e4)).probabilities) {
    CHECK(v >= kProbFloor);
    CHECK(v <= kProbCeil);
  }
}

TEST_CASE("width mismatch and missing dropout rng are errors") {
  auto model = small_model(3, 5);
  Tape t;
  CHECK_THROWS_AS(model.forward(t, random_batch(2, 4, 1), Mode::kInference), std::invalid_argument);
  CHECK_THROWS_AS(model.forward(t, random_batch(2, 3, 1), Mode::kTrain, nullptr), std::invalid_argument);
}

TEST_CASE("training mode applies dropout, inference does not") {
  auto model = small_model(3, 8);
  const Matrix x = random_batch(16, 3, 1);
  Rng rng(1);
  Tape t;
  const auto train = model.forward(t, x, Mode::kTrain, &rng);
  const auto infer = model.forward(t, x, Mode::kInference);
  CHECK_FALSE(train.probabilities.value() == infer.probabilities.value());
  std::size_t zeros = 0;
  for (double v : train.representation.value().values()) zeros += v == 0.0;
  CHECK(zeros > 0);
}

TEST_CASE("seeded initialization is reproducible") {
  const Matrix x = random_batch(5, 4, 1);
  CHECK(small_model(4, 42).predict(x).probabilities == small_model(4, 42).predict(x).probabilities);
  CHECK_FALSE(small_model(4, 42).predict(x).probabilities == small_model(4, 43).predict(x).probabilities);
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  auto model = small_model(4, 11);
  const Matrix x = random_batch(12, 4, 12);
  std::vector<int> y;
  for (std::size_t i = 0; i < 12; ++i) y.push_back(x(i, 1) > 0 ? 1 : 0);
  auto value = [&] {
    const auto r = oracle::reference_forward(model, x);
    double s = 0.0;
    for (std::size_t i = 0; i < 12; ++i) s -= std::log(y[i] ? r.probabilities[i] : 1.0 - r.probabilities[i]);
    return s / 12.0;
  };
  auto gradient = [&] {
    Tape t;
    t.backward(ad::cross_entropy_risk(t, model.forward(t, x, Mode::kInference).probabilities, y));
  };
  auto pattern = [&] { return oracle::reference_forward(model, x).pattern; };
  std::mt19937_64 rng(1);
  const auto r = gradcheck::check<std::vector<signed char>>(model.parameters(), value, gradient, pattern, rng, 100);
  CHECK(r.directions == 100);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("gradient linearity and independent blocks") {
  auto model = small_model(3, 2);
  WeightNetwork w(64, 8, 3);
  const Matrix x = random_batch(6, 3, 4);
  const std::vector<int> y{0, 1, 1, 0, 1, 0};
  auto grads = [&](double seed) {
    model.zero_grad();
    w.zero_grad();
    Tape t;
    t.backward(ad::cross_entropy_risk(t, model.forward(t, x, Mode::kInference).probabilities, y), seed);
    std::vector<Matrix> g;
    for (auto* p : model.parameters()) g.push_back(p->grad);
    return g;
  };
  const auto g1 = grads(1.0);
  const auto g2 = grads(2.0);
  for (std::size_t k = 0; k < g1.size(); ++k)
    for (std::size_t i = 0; i < g1[k].size(); ++i) CHECK(g2[k][i] == 2.0 * g1[k][i]);
  for (auto* p : w.parameters())
    for (double v : p->grad.values()) CHECK(v == 0.0);
}

TEST_CASE("stop gradient blocks the adjoint") {
  Tape t;
  Parameter a(Matrix(1, 1, 3.0)), b(Matrix(1, 1, 4.0));
  Var va = t.param(a), vb = t.param(b);
  Var s = t.stop_gradient(va);
  CHECK(s.value() == va.value());
  t.backward(t.sum(t.mul(s, vb)));
  CHECK(a.grad(0, 0) == 0.0);
  CHECK(b.grad(0, 0) == 3.0);

  Tape t2;
  a.zero_grad();
  Var x = t2.param(a);
  Var ss = t2.stop_gradient(t2.stop_gradient(x));
  Var s1 = t2.stop_gradient(x);
  CHECK(ss.value() == s1.value());
  t2.backward(t2.sum(t2.add(ss, s1)));
  CHECK(a.grad(0, 0) == 0.0);
}

TEST_CASE("theta gradient has no path through a frozen weight network") {
  auto model = small_model(3, 21);
  WeightNetwork w(64, 16, 22);
  const Matrix x = random_batch(9, 3, 23);
  const auto frozen = w.evaluate(model.predict(x).representation);
  auto value = [&] {
    const auto r = oracle::reference_forward(model, x);
    double s = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
      const double p = r.probabilities[i];
      s += std::exp(-frozen[i]) * (-p * std::log(p) - (1 - p) * std::log(1 - p));
    }
    return s / 9.0;
  };
  auto gradient = [&] {
    w.zero_grad();
    Tape t;
    const auto f = model.forward(t, x, Mode::kInference);
    Var fw = t.stop_gradient(w.forward(t, f.representation));
    t.backward(ad::weighted_entropy_term(t, fw, ad::conditional_entropy(t, f.probabilities)));
  };
  auto pattern = [&] { return oracle::reference_forward(model, x).pattern; };
  std::mt19937_64 rng(2);
  const auto r = gradcheck::check<std::vector<signed char>>(model.parameters(), value, gradient, pattern, rng, 100);
  CHECK(r.max_rel_error < 1e-4);
  for (auto* p : w.parameters())
    for (double v : p->grad.values()) CHECK(v == 0.0);
}

TEST_CASE("weight network output is positive and finite") {
  WeightNetwork w(6, 32, 4);
  const Matrix x = random_batch(100000, 6, 5, 10.0);
  for (double v : w.evaluate(x)) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
  const auto ref = oracle::reference_weight_net(w, random_batch(20, 6, 6));
  const auto got = w.evaluate(random_batch(20, 6, 6));
  for (std::size_t i = 0; i < 20; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("cosine schedule endpoints and monotonicity") {
  const CosineSchedule s(1e-3, 100);
  CHECK(s.lr(0) == 1e-3);
  CHECK(s.lr(100) == 0.0);
  CHECK(s.lr(150) == 0.0);
  CHECK(s.lr(50) == doctest::Approx(5e-4));
  for (std::size_t t = 1; t <= 100; ++t) CHECK(s.lr(t) <= s.lr(t - 1));
}

namespace {

// Reference Adam for a single parameter block with clipping by `scale`.
struct AdamOracle {
  std::vector<double> m, v;
  std::size_t t = 0;
  void step(std::vector<double>& x, const std::vector<double>& g, double scale, double lr, const AdamConfig& c) {
    if (m.empty()) m = v = std::vector<double>(x.size(), 0.0);
    ++t;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g[i] * scale;
      m[i] = c.beta1 * m[i] + (1 - c.beta1) * gi;
      v[i] = c.beta2 * v[i] + (1 - c.beta2) * gi * gi;
      const double mh = m[i] / (1 - std::pow(c.beta1, static_cast<double>(t)));
      const double vh = v[i] / (1 - std::pow(c.beta2, static_cast<double>(t)));
      x[i] -= lr * (mh / (std::sqrt(vh) + c.eps) + c.weight_decay * x[i]);
    }
  }
};

}  // namespace

TEST_CASE("optimizer clips the global norm to 5") {
  Parameter p(Matrix::from_rows({{1.0, -2.0}}));
  AdamConfig cfg;
  cfg.weight_decay = 1e-3;
  OptimizerState opt({&p}, cfg, CosineSchedule(0.1, 10));
  AdamOracle ref;
  std::vector<double> x{1.0, -2.0};

  p.grad = Matrix::from_rows({{30.0, 40.0}});  // norm 50
  opt.step();
  CHECK(opt.last_grad_norm() == doctest::Approx(50.0));
  ref.step(x, {30.0, 40.0}, 0.1, CosineSchedule(0.1, 10).lr(0), cfg);

  p.grad = Matrix::from_rows({{0.3, -0.4}});  // norm 0.5, not clipped
  opt.step();
  ref.step(x, {0.3, -0.4}, 1.0, CosineSchedule(0.1, 10).lr(1), cfg);
  CHECK(p.value(0, 0) == doctest::Approx(x[0]).epsilon(1e-12));
  CHECK(p.value(0, 1) == doctest::Approx(x[1]).epsilon(1e-12));

  AdamOracle unclipped;
  std::vector<double> y{1.0, -2.0};
  unclipped.step(y, {30.0, 40.0}, 1.0, 0.1, cfg);
  unclipped.step(y, {0.3, -0.4}, 1.0, CosineSchedule(0.1, 10).lr(1), cfg);
  CHECK(std::abs(y[0] - x[0]) > 1e-6);
}

TEST_CASE("optimizer fixed point, schedule endpoint and non-finite gradients") {
  Parameter p(Matrix::from_rows({{0.5, 1.5}}));
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  OptimizerState opt({&p}, cfg, CosineSchedule(1e-2, 3));
  const Matrix before = p.value;
  opt.step();
  CHECK(p.value == before);

  Parameter q(Matrix::from_rows({{0.5, 1.5}}));
  OptimizerState end({&q}, cfg, CosineSchedule(1e-2, 3), 3);
  q.grad = Matrix::from_rows({{1.0, -1.0}});
  end.step();
  CHECK(end.last_lr() == 0.0);
  CHECK(q.value == before);

  q.grad = Matrix::from_rows({{std::nan(""), 0.0}});
  CHECK_THROWS_AS(end.step(), std::domain_error);
}

TEST_CASE("checkpoint round trip is exact") {
  auto model = small_model(5, 31);
  InputNormalization norm{{0.1, 0.2, 0.3, 0.4, 0.5}, {1.0, 2.0, 3.0, 4.0, 1.0 / 3.0}};
  model.set_input_normalization(norm);
  WeightNetwork w(64, 32, 32);
  const auto path = std::filesystem::temp_directory_path() / "fairshift_ckpt_test.json";
  save_checkpoint(path, Checkpoint{model, w});
  const Checkpoint back = load_checkpoint(path);
  CHECK(parameter_checksum(back.predictor.parameters()) == parameter_checksum(std::as_const(model).parameters()));
  REQUIRE(back.weight_network.has_value());
  CHECK(parameter_checksum(back.weight_network->parameters()) == parameter_checksum(std::as_const(w).parameters()));
  const Matrix x = random_batch(7, 5, 1);
  CHECK(back.predictor.predict(x).probabilities == model.predict(x).probabilities);
  CHECK(back.predictor.input_normalization().std == norm.std);

  const Checkpoint no_w = checkpoint_from_json(checkpoint_to_json(Checkpoint{model, std::nullopt}));
  CHECK_FALSE(no_w.weight_network.has_value());
  CHECK_THROWS(checkpoint_from_json("{\"format\": \"other\"}"));
}
