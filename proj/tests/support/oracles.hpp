#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "fairshift/matrix.hpp"
#include "fairshift/nn.hpp"

namespace oracle {

using fairshift::Matrix;

inline double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return s;
}

// Minimum over all permutations of (1/n) sum_i |a_i - b_pi(i)|^2.
inline double brute_force_w2_squared(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sq_dist(a, i, b, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// Dense two-phase simplex with Bland's rule for min c^T x, A x = rhs, x >= 0.
// Returns the optimal objective. Small problems only.
inline double simplex_min(std::vector<std::vector<double>> A, std::vector<double> rhs, const std::vector<double>& c) {
  const double eps = 1e-12;
  std::size_t m = A.size();
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < m; ++i)
    if (rhs[i] < 0) {
      for (double& v : A[i]) v = -v;
      rhs[i] = -rhs[i];
    }
  // Tableau columns: n structural, m artificial, 1 rhs.
  const std::size_t W = n + m + 1;
  std::vector<std::vector<double>> T(m, std::vector<double>(W, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][W - 1] = rhs[i];
    basis[i] = n + i;
  }
  auto pivot = [&](std::size_t r, std::size_t col) {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (std::size_t i = 0; i < T.size(); ++i) {
      if (i == r || T[i][col] == 0.0) continue;
      const double f = T[i][col];
      for (std::size_t j = 0; j < W; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };
  auto run = [&](const std::vector<double>& cost, std::size_t allowed_cols) {
    for (;;) {
      // reduced cost of column j: cost_j - sum_i cost_basis(i) T[i][j]
      std::size_t enter = W;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        double rc = cost[j];
        for (std::size_t i = 0; i < T.size(); ++i) rc -= cost[basis[i]] * T[i][j];
        if (rc < -1e-10) {
          enter = j;
          break;
        }
      }
      if (enter == W) return;
      std::size_t leave = T.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < T.size(); ++i)
        if (T[i][enter] > eps) {
          const double ratio = T[i][W - 1] / T[i][enter];
          if (ratio < best - 1e-15 ||
              (leave != T.size() && std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      if (leave == T.size()) throw std::runtime_error("simplex: unbounded");
      pivot(leave, enter);
    }
  };
  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = 1.0;
  run(phase1, n + m);
  // Drive artificials out of the basis or drop redundant rows.
  for (std::size_t i = 0; i < T.size();) {
    if (basis[i] < n) {
      ++i;
      continue;
    }
    if (std::abs(T[i][W - 1]) > 1e-9) throw std::runtime_error("simplex: infeasible");
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(T[i][j]) > 1e-9) {
        col = j;
        break;
      }
    if (col == n) {
      T.erase(T.begin() + static_cast<long>(i));
      basis.erase(basis.begin() + static_cast<long>(i));
      --m;
    } else {
      pivot(i, col);
      ++i;
    }
  }
  std::vector<double> full_cost(W - 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) full_cost[j] = c[j];
  run(full_cost, n);
  double obj = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) obj += full_cost[basis[i]] * T[i][W - 1];
  return obj;
}

// Transport LP between uniform measures on the rows of a and b with squared
// Euclidean cost; returns the optimal cost (W_2 squared).
inline double lp_w2_squared(const Matrix& a, const Matrix& b) {
  const std::size_t na = a.rows(), nb = b.rows();
  std::vector<std::vector<double>> A;
  std::vector<double> rhs, c(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) c[i * nb + j] = sq_dist(a, i, b, j);
  for (std::size_t i = 0; i < na; ++i) {
    std::vector<double> row(na * nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j) row[i * nb + j] = 1.0;
    A.push_back(row);
    rhs.push_back(1.0 / static_cast<double>(na));
  }
  for (std::size_t j = 0; j < nb; ++j) {
    std::vector<double> row(na * nb, 0.0);
    for (std::size_t i = 0; i < na; ++i) row[i * nb + j] = 1.0;
    A.push_back(row);
    rhs.push_back(1.0 / static_cast<double>(nb));
  }
  return simplex_min(A, rhs, c);
}

// Plain-loop forward pass of the predictor in inference mode. Also records the
// sign of every ReLU pre-activation and whether the output clamp is active, so
// finite-difference checks can skip steps that cross a kink.
struct ReferenceForward {
  Matrix representation;
  std::vector<double> probabilities;
  std::vector<signed char> pattern;
};

inline Matrix dense(const Matrix& x, const fairshift::DenseLayer& l) {
  Matrix out(x.rows(), l.out_dim());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t o = 0; o < l.out_dim(); ++o) {
      double s = l.bias.value(0, o);
      for (std::size_t i = 0; i < l.in_dim(); ++i) s += x(r, i) * l.weight.value(i, o);
      out(r, o) = s;
    }
  return out;
}

inline Matrix relu_recording(Matrix z, std::vector<signed char>& pattern) {
  for (double& v : z.values()) {
    pattern.push_back(v > 0.0 ? 1 : 0);
    v = std::max(v, 0.0);
  }
  return z;
}

inline ReferenceForward reference_forward(const fairshift::PredictorModel& model, const Matrix& batch) {
  ReferenceForward out;
  const auto& L = model.layers();
  Matrix x = model.input_normalization().apply(batch);
  Matrix h1 = relu_recording(dense(x, L[0]), out.pattern);
  out.representation = relu_recording(dense(h1, L[1]), out.pattern);
  Matrix h3 = relu_recording(dense(out.representation, L[2]), out.pattern);
  Matrix z = dense(h3, L[3]);
  for (double v : z.values()) {
    double p = 1.0 / (1.0 + std::exp(-v));
    out.pattern.push_back(p < fairshift::kProbFloor ? -1 : (p > fairshift::kProbCeil ? 2 : 0));
    out.probabilities.push_back(std::clamp(p, fairshift::kProbFloor, fairshift::kProbCeil));
  }
  return out;
}

inline std::vector<double> reference_weight_net(const fairshift::WeightNetwork& w, const Matrix& input,
                                                std::vector<signed char>* pattern = nullptr) {
  std::vector<signed char> local;
  auto& pat = pattern ? *pattern : local;
  Matrix h = relu_recording(dense(input, w.first()), pat);
  Matrix z = dense(h, w.second());
  std::vector<double> out;
  for (double v : z.values()) {
    const double lim = fairshift::WeightNetwork::kLogitClamp;
    pat.push_back(v < -lim ? -1 : (v > lim ? 2 : 0));
    out.push_back(std::exp(std::clamp(v, -lim, lim)));
  }
  return out;
}

// Logistic regression by plain gradient descent, used as a separability oracle.
inline double logistic_train_error(const Matrix& x, const std::vector<int>& y, int iters = 2000, double lr = 0.5) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x(i, j);
      const double r = 1.0 / (1.0 + std::exp(-z)) - y[i];
      for (std::size_t j = 0; j < d; ++j) gw[j] += r * x(i, j);
      gb += r;
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= lr * gw[j] / static_cast<double>(n);
    b -= lr * gb / static_cast<double>(n);
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x(i, j);
    wrong += (z >= 0.0 ? 1 : 0) != y[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace oracle
