#include "fairshift/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairshift/kernels.hpp"

namespace fairshift {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CouplingPlan make_plan(std::size_t a, std::size_t b) {
  CouplingPlan p;
  p.plan = Matrix(a, b);
  p.row_marginal.assign(a, 1.0 / static_cast<double>(a));
  p.col_marginal.assign(b, 1.0 / static_cast<double>(b));
  return p;
}

// Min-cost flow for the uniform transportation problem with integer masses.
Matrix transport_flow(const Matrix& cost) {
  const std::size_t A = cost.rows(), B = cost.cols(), V = A + B;
  std::vector<long long> flow(A * B, 0);
  std::vector<long long> supply(A, static_cast<long long>(B));
  std::vector<long long> demand(B, static_cast<long long>(A));
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<long> prev(V);
  std::vector<char> done(V);
  long long remaining = static_cast<long long>(A * B);

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < A; ++i)
      if (supply[i] > 0) dist[i] = 0.0;

    for (;;) {
      std::size_t u = V;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (u == V || dist[v] < dist[u])) u = v;
      if (u == V) break;
      done[u] = 1;
      if (u < A) {
        for (std::size_t j = 0; j < B; ++j) {
          const std::size_t v = A + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, cost(u, j) + pot[u] - pot[v]);
          if (dist[u] + rc < dist[v]) {
            dist[v] = dist[u] + rc;
            prev[v] = static_cast<long>(u);
          }
        }
      } else {
        const std::size_t j = u - A;
        for (std::size_t i = 0; i < A; ++i) {
          if (done[i] || flow[i * B + j] == 0) continue;
          const double rc = std::max(0.0, -cost(i, j) + pot[u] - pot[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = static_cast<long>(u);
          }
        }
      }
    }

    std::size_t sink = V;
    for (std::size_t j = 0; j < B; ++j)
      if (demand[j] > 0 && dist[A + j] < kInf && (sink == V || dist[A + j] < dist[sink])) sink = A + j;
    if (sink == V) throw std::logic_error("optimal_coupling: no augmenting path");

    long long delta = demand[sink - A];
    std::size_t v = sink;
    while (prev[v] >= 0) {
      const auto u = static_cast<std::size_t>(prev[v]);
      if (u >= A) delta = std::min(delta, flow[v * B + (u - A)]);  // backward arc right -> left
      v = u;
    }
    const std::size_t source = v;
    delta = std::min(delta, supply[source]);

    v = sink;
    while (prev[v] >= 0) {
      const auto u = static_cast<std::size_t>(prev[v]);
      if (u < A) {
        flow[u * B + (v - A)] += delta;
      } else {
        flow[v * B + (u - A)] -= delta;
      }
      v = u;
    }
    supply[source] -= delta;
    demand[sink - A] -= delta;
    remaining -= delta;

    const double cap = dist[sink];
    for (std::size_t w = 0; w < V; ++w) pot[w] += std::min(dist[w], cap);
  }

  Matrix plan(A, B);
  const double total = static_cast<double>(A * B);
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j) plan(i, j) = static_cast<double>(flow[i * B + j]) / total;
  return plan;
}

}  // namespace

std::vector<std::size_t> solve_assignment(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (n == 0 || cost.cols() != n) throw std::invalid_argument("solve_assignment: cost must be square and non-empty");
  // Hungarian method with potentials, 1-based internally.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

CouplingPlan optimal_coupling(const Matrix& cost) {
  const std::size_t a = cost.rows(), b = cost.cols();
  if (a == 0 || b == 0) throw std::invalid_argument("optimal_coupling: empty point set");
  for (double c : cost.values())
    if (!std::isfinite(c)) throw std::invalid_argument("optimal_coupling: non-finite cost");
  CouplingPlan out = make_plan(a, b);
  if (a == b) {
    const auto assignment = solve_assignment(cost);
    for (std::size_t i = 0; i < a; ++i) out.plan(i, assignment[i]) = 1.0 / static_cast<double>(a);
  } else {
    out.plan = transport_flow(cost);
  }
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) out.cost += out.plan(i, j) * cost(i, j);
  return out;
}

CouplingPlan wasserstein2_plan(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("wasserstein2: empty point set");
  if (a.cols() != b.cols()) throw std::invalid_argument("wasserstein2: point dimension mismatch");
  return optimal_coupling(kernels::squared_distances(a, b));
}

double wasserstein2(const Matrix& a, const Matrix& b) {
  return std::sqrt(std::max(0.0, wasserstein2_plan(a, b).cost));
}

}  // namespace fairshift
