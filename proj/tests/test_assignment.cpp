#include <gtest/gtest.h>

#include <limits>
#include <set>
#include <stdexcept>

#include "mnlrank/assignment.hpp"
#include "test_support.hpp"

using namespace mnlrank;

namespace {

Grid<double> grid_from(const std::vector<std::vector<double>>& rows) {
  Grid<double> g(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), 0.0);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) g(r, c) = rows[r][c];
  }
  return g;
}

bool distinct(const std::vector<int>& cols) {
  return std::set<int>(cols.begin(), cols.end()).size() == cols.size();
}

}  // namespace

TEST(SolveAssignment, SingleRowTakesArgmax) {
  const auto g = grid_from({{0.1, 0.7, 0.3}});
  EXPECT_EQ(solve_assignment(g), (std::vector<int>{1}));
}

TEST(SolveAssignment, TwoByTwoExample) {
  const auto g = grid_from({{0.9, 0.2}, {0.5, 0.6}});
  EXPECT_EQ(solve_assignment(g), (std::vector<int>{0, 1}));
}

TEST(SolveAssignment, TwoByThreeExample) {
  const auto g = grid_from({{1, 2, 3}, {3, 2, 1}});
  const auto a = solve_assignment(g);
  EXPECT_EQ(a, (std::vector<int>{2, 0}));
  EXPECT_DOUBLE_EQ(assignment_value(g, a), 6.0);
}

TEST(SolveAssignment, MatchesBruteForceOnRandomMatrices) {
  SimulationRng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(7 - k)));
    Grid<double> g(k, j, 0.0);
    for (double& w : g.values()) w = rng.uniform() * 2.0 - 0.5;
    const auto a = solve_assignment(g);
    ASSERT_EQ(static_cast<int>(a.size()), k);
    ASSERT_TRUE(distinct(a));
    EXPECT_NEAR(assignment_value(g, a), test::brute_force_assignment_value(g), 1e-12);
  }
}

TEST(SolveAssignment, InfiniteWeightsArePreferred) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto g = grid_from({{0.9, inf, 0.1}, {inf, 0.2, 0.3}});
  EXPECT_EQ(solve_assignment(g), (std::vector<int>{1, 0}));

  Grid<double> all_inf(3, 5, inf);
  const auto a = solve_assignment(all_inf);
  EXPECT_TRUE(distinct(a));
  for (int c : a) EXPECT_LT(c, 5);
}

TEST(SolveAssignment, CountsOfInfiniteCellsAreMaximised) {
  // Two unexplored cells can be used together only by avoiding the large finite weight.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto g = grid_from({{inf, 100.0}, {inf, inf}});
  const auto a = solve_assignment(g);
  EXPECT_EQ(a, (std::vector<int>{0, 1}));
}

TEST(SolveAssignment, RejectsBadInput) {
  EXPECT_THROW(solve_assignment(grid_from({{1.0}, {2.0}})), std::invalid_argument);
  EXPECT_THROW(solve_assignment(grid_from({{std::nan(""), 1.0}})), std::invalid_argument);
  EXPECT_THROW(solve_assignment(grid_from({{-std::numeric_limits<double>::infinity(), 1.0}})),
               std::invalid_argument);
}
