#pragma once

#include <span>
#include <vector>

#include "fairshift/autodiff.hpp"
#include "fairshift/transport.hpp"

namespace fairshift {

// Per-epoch averages of the objective pieces. total is the predictor's
// objective erm + lambda1 * weighted_entropy + lambda2 * wasserstein; the
// constraint penalties belong to the weight network's objective and are
// reported separately.
struct LossBreakdown {
  double erm = 0.0;
  double weighted_entropy = 0.0;
  double wasserstein = 0.0;
  double c1_penalty = 0.0;
  double c2_penalty = 0.0;
  double total = 0.0;
};

// Plain value versions. Natural log throughout.

double cross_entropy_risk(std::span<const double> probs, std::span<const int> labels);
std::vector<double> conditional_entropy(std::span<const double> probs);
// (1/m) sum_i exp(-fw_i) * H_i
double weighted_entropy_term(std::span<const double> fw, std::span<const double> entropies);

struct ConstraintPenalty {
  double c1_term = 0.0;  // c1 * (mean(fw_test) - 1)^2
  double c2_term = 0.0;  // c2 * (mean(1 / fw_train) - 1)^2
  double total() const { return c1_term + c2_term; }
};
ConstraintPenalty constraint_penalty(std::span<const double> fw_test, std::span<const double> fw_train, double c1,
                                     double c2);

double kliep_loss(std::span<const double> s_test, std::span<const double> s_train);
double lsif_loss(std::span<const double> s_test, std::span<const double> s_train);

// (R^S + epsilon * E_T[exp(-P^S/P^T) H]) - R^T. The weighted term is passed
// already averaged over target samples.
double theorem1_gap(double source_risk, double weighted_entropy, double epsilon, double test_risk);

inline constexpr double kDefaultEpsilon = 5.0;

// Differentiable versions recorded on a tape. Probabilities and F_w outputs
// are b x 1 nodes; results are 1 x 1 unless stated otherwise.
namespace ad {

Var cross_entropy_risk(Tape& t, Var probs, std::span<const int> labels);
// (1/n) sum_i w_i * nll_i with w an n x 1 node.
Var weighted_cross_entropy(Tape& t, Var probs, std::span<const int> labels, Var weights);
Var conditional_entropy(Tape& t, Var probs);  // b x 1
Var weighted_entropy_term(Tape& t, Var fw, Var entropies);
Var constraint_c1(Tape& t, Var fw_test, double c1);
Var constraint_c2(Tape& t, Var fw_train, double c2);
Var constraint_penalty(Tape& t, Var fw_test, Var fw_train, double c1, double c2);
Var kliep_loss(Tape& t, Var s_test, Var s_train);
Var lsif_loss(Tape& t, Var s_test, Var s_train);
// W_2 between the rows of a and b. The adjoint uses the optimal plan at the
// current point: dW/da_i = sum_j plan_ij (a_i - b_j) / W (zero when W = 0).
Var wasserstein2(Tape& t, Var a, Var b);

}  // namespace ad

}  // namespace fairshift
