#pragma once

// Linear assignment on a square cost matrix.

#include "mvsde/types.hpp"

#include <vector>

namespace mvsde {

struct Assignment {
  // Row i is matched to column column_of[i].
  std::vector<Eigen::Index> column_of;
  // Sum of cost(i, column_of[i]) accumulated in row order.
  double cost = 0.0;
};

// Exact minimum-cost assignment (Hungarian method with potentials, O(N^3)).
Assignment solve_assignment(const Matrix& cost);

// Greedy: repeatedly match the globally cheapest remaining pair. An upper
// bound on the optimum.
Assignment greedy_assignment(const Matrix& cost);

// Cost of a given matching, summed in row order.
double assignment_cost(const Matrix& cost, const std::vector<Eigen::Index>& column_of);

}  // namespace mvsde
