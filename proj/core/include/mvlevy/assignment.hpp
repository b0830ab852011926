#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvlevy {

struct Assignment {
  double total_cost = 0.0;
  std::vector<std::size_t> col_of_row;
};

/// Minimum-cost perfect matching on a dense n x n row-major cost matrix
/// (shortest augmenting paths with potentials, O(n^3)).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace mvlevy
