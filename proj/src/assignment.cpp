#include "mnlrank/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mnlrank {

std::vector<int> solve_assignment(const Grid<double>& weights) {
  const int n = weights.rows();
  const int m = weights.cols();
  if (n > m) throw std::invalid_argument("solve_assignment: more rows than columns");
  if (n == 0) return {};

  double finite_span = 0.0;
  for (double w : weights.values()) {
    if (std::isnan(w) || w == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("solve_assignment: weights must be finite or +infinity");
    }
    if (std::isfinite(w)) finite_span = std::max(finite_span, std::abs(w));
  }
  const double sentinel = 4.0 * (n + 1) * (finite_span + 1.0);

  // Minimise cost = -weight with the O(n^2 m) potential-based Hungarian method.
  // Index 0 is a virtual row/column; real rows are 1..n and columns 1..m.
  auto cost = [&](int r, int c) {
    const double w = weights(r - 1, c - 1);
    return std::isfinite(w) ? -w : -sentinel;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  for (int row = 1; row <= n; ++row) {
    owner[0] = row;
    int col0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = owner[col0];
      double delta = inf;
      int col1 = 0;
      for (int c = 1; c <= m; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0, c) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= m; ++c) {
        if (used[c]) {
          u[owner[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const int col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> result(static_cast<std::size_t>(n), -1);
  for (int c = 1; c <= m; ++c) {
    if (owner[c] != 0) result[owner[c] - 1] = c - 1;
  }
  return result;
}

double assignment_value(const Grid<double>& weights, const std::vector<int>& columns) {
  double total = 0.0;
  for (int r = 0; r < weights.rows(); ++r) total += weights(r, columns[r]);
  return total;
}

}  // namespace mnlrank
