#include "mvsde/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mvsde {

double assignment_cost(const Matrix& cost, const std::vector<Eigen::Index>& column_of) {
  double s = 0.0;
  for (std::size_t i = 0; i < column_of.size(); ++i) s += cost(static_cast<Eigen::Index>(i), column_of[i]);
  return s;
}

Assignment solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw InvalidArgument("assignment: cost matrix must be square");
  if (!cost.allFinite()) throw InvalidArgument("assignment: cost matrix must be finite");
  const Eigen::Index n = cost.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based shortest augmenting path formulation; row 0 / column 0 are
  // sentinels. match[j] is the row currently assigned to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<Eigen::Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    match[0] = i;
    Eigen::Index j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = match[j0];
      double delta = kInf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw InternalConsistencyError("assignment: no augmenting column");
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.column_of.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index j = 1; j <= n; ++j) a.column_of[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  a.cost = assignment_cost(cost, a.column_of);
  return a;
}

Assignment greedy_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw InvalidArgument("assignment: cost matrix must be square");
  const Eigen::Index n = cost.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n * n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Column-major flat index; ties resolved by index for determinism.
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return cost.data()[a] < cost.data()[b]; });
  std::vector<char> row_used(n, 0), col_used(n, 0);
  Assignment out;
  out.column_of.assign(static_cast<std::size_t>(n), 0);
  Eigen::Index matched = 0;
  for (Eigen::Index flat : order) {
    const Eigen::Index i = flat % n;
    const Eigen::Index j = flat / n;
    if (row_used[i] || col_used[j]) continue;
    row_used[i] = col_used[j] = 1;
    out.column_of[static_cast<std::size_t>(i)] = j;
    if (++matched == n) break;
  }
  out.cost = assignment_cost(cost, out.column_of);
  return out;
}

}  // namespace mvsde
