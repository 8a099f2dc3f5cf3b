#include "fairshift/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace fairshift {
namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_positive(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error(std::string(what) + ": values must be finite and > 0");
}

}  // namespace

double cross_entropy_risk(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size() || probs.empty())
    throw std::invalid_argument("cross_entropy_risk: size mismatch or empty");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) s += labels[i] == 1 ? -std::log(probs[i]) : -std::log1p(-probs[i]);
  return s / static_cast<double>(probs.size());
}

std::vector<double> conditional_entropy(std::span<const double> probs) {
  std::vector<double> h(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    h[i] = -p * std::log(p) - (1.0 - p) * std::log1p(-p);
  }
  return h;
}

double weighted_entropy_term(std::span<const double> fw, std::span<const double> entropies) {
  if (fw.size() != entropies.size() || fw.empty())
    throw std::invalid_argument("weighted_entropy_term: size mismatch or empty");
  double s = 0.0;
  for (std::size_t i = 0; i < fw.size(); ++i) {
    if (!std::isfinite(fw[i])) throw std::domain_error("weighted_entropy_term: non-finite weight");
    s += std::exp(-fw[i]) * entropies[i];
  }
  return s / static_cast<double>(fw.size());
}

ConstraintPenalty constraint_penalty(std::span<const double> fw_test, std::span<const double> fw_train, double c1,
                                     double c2) {
  require_positive(fw_test, "constraint_penalty");
  require_positive(fw_train, "constraint_penalty");
  const double d1 = mean_of(fw_test) - 1.0;
  double inv = 0.0;
  for (double x : fw_train) inv += 1.0 / x;
  const double d2 = inv / static_cast<double>(fw_train.size()) - 1.0;
  return ConstraintPenalty{c1 * d1 * d1, c2 * d2 * d2};
}

double kliep_loss(std::span<const double> s_test, std::span<const double> s_train) {
  require_positive(s_test, "kliep_loss");
  require_positive(s_train, "kliep_loss");
  double nll = 0.0;
  for (double s : s_test) nll -= std::log(s);
  const double d = mean_of(s_train) - 1.0;
  return nll / static_cast<double>(s_test.size()) + d * d;
}

double lsif_loss(std::span<const double> s_test, std::span<const double> s_train) {
  require_positive(s_test, "lsif_loss");
  require_positive(s_train, "lsif_loss");
  double sq = 0.0;
  for (double s : s_train) sq += s * s;
  return -mean_of(s_test) + 0.5 * sq / static_cast<double>(s_train.size());
}

double theorem1_gap(double source_risk, double weighted_entropy, double epsilon, double test_risk) {
  return source_risk + epsilon * weighted_entropy - test_risk;
}

namespace ad {

Var cross_entropy_risk(Tape& t, Var probs, std::span<const int> labels) {
  return t.mean(t.binary_nll(probs, labels));
}

Var weighted_cross_entropy(Tape& t, Var probs, std::span<const int> labels, Var weights) {
  return t.mean(t.mul(t.binary_nll(probs, labels), weights));
}

Var conditional_entropy(Tape& t, Var probs) { return t.binary_entropy(probs); }

Var weighted_entropy_term(Tape& t, Var fw, Var entropies) {
  for (double w : fw.value().values())
    if (!std::isfinite(w)) throw std::domain_error("weighted_entropy_term: non-finite weight");
  return t.mean(t.mul(t.exp(t.scale(fw, -1.0)), entropies));
}

Var constraint_c1(Tape& t, Var fw_test, double c1) {
  return t.scale(t.square(t.add_scalar(t.mean(fw_test), -1.0)), c1);
}

Var constraint_c2(Tape& t, Var fw_train, double c2) {
  for (double w : fw_train.value().values())
    if (!(w > 0.0)) throw std::domain_error("constraint_penalty: F_w must be > 0");
  return t.scale(t.square(t.add_scalar(t.mean(t.reciprocal(fw_train)), -1.0)), c2);
}

Var constraint_penalty(Tape& t, Var fw_test, Var fw_train, double c1, double c2) {
  for (double w : fw_test.value().values())
    if (!(w > 0.0)) throw std::domain_error("constraint_penalty: F_w must be > 0");
  return t.add(constraint_c1(t, fw_test, c1), constraint_c2(t, fw_train, c2));
}

Var kliep_loss(Tape& t, Var s_test, Var s_train) {
  for (const Var& v : {s_test, s_train})
    for (double s : v.value().values())
      if (!(s > 0.0)) throw std::domain_error("kliep_loss: s must be > 0");
  Var nll = t.scale(t.mean(t.log(s_test)), -1.0);
  return t.add(nll, t.square(t.add_scalar(t.mean(s_train), -1.0)));
}

Var lsif_loss(Tape& t, Var s_test, Var s_train) {
  for (const Var& v : {s_test, s_train})
    for (double s : v.value().values())
      if (!(s > 0.0)) throw std::domain_error("lsif_loss: s must be > 0");
  return t.add(t.scale(t.mean(s_test), -1.0), t.scale(t.mean(t.square(s_train)), 0.5));
}

Var wasserstein2(Tape& t, Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const CouplingPlan plan = wasserstein2_plan(av, bv);
  const double w = std::sqrt(std::max(0.0, plan.cost));
  return t.custom({a, b}, Matrix(1, 1, w), [av, bv, plan = plan.plan, w](const Matrix& g) {
    Matrix ga(av.rows(), av.cols()), gb(bv.rows(), bv.cols());
    if (w > 1e-12) {
      const double scale = g[0] / w;
      for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < bv.rows(); ++j) {
          const double pij = plan(i, j);
          if (pij == 0.0) continue;
          for (std::size_t c = 0; c < av.cols(); ++c) {
            const double diff = av(i, c) - bv(j, c);
            ga(i, c) += scale * pij * diff;
            gb(j, c) -= scale * pij * diff;
          }
        }
    }
    return std::vector<Matrix>{std::move(ga), std::move(gb)};
  });
}

}  // namespace ad

}  // namespace fairshift
