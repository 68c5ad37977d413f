#pragma once

#include <vector>

#include "mnlrank/grid.hpp"

namespace mnlrank {

// Maximum-weight assignment of every row (slot) to a distinct column (item),
// rows <= cols. Returns the chosen column per row.
//
// +infinity weights are treated as a large finite sentinel that dominates any
// sum of finite weights, so assignments use as many +infinity cells as
// possible and then maximise the finite remainder.
std::vector<int> solve_assignment(const Grid<double>& weights);

double assignment_value(const Grid<double>& weights, const std::vector<int>& columns);

}  // namespace mnlrank
