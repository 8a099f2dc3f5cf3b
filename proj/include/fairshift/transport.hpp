#pragma once

#include <vector>

#include "fairshift/matrix.hpp"

namespace fairshift {

// Transport plan between two uniform empirical measures.
struct CouplingPlan {
  Matrix plan;  // a x b, nonnegative
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
  double cost = 0.0;  // sum_ij plan_ij * cost_ij
};

// Minimum-cost assignment for a square cost matrix; returns column per row.
std::vector<std::size_t> solve_assignment(const Matrix& cost);

// Exact optimal coupling with marginals 1/a and 1/b. Uses the assignment
// solver when a == b, otherwise min-cost flow on integer masses (b per row
// point, a per column point) by successive shortest paths.
CouplingPlan optimal_coupling(const Matrix& cost);

// W_2 between the uniform empirical measures on the rows of a and b,
// Euclidean ground metric. Returns W_2 itself, not its square.
double wasserstein2(const Matrix& a, const Matrix& b);
CouplingPlan wasserstein2_plan(const Matrix& a, const Matrix& b);

}  // namespace fairshift
