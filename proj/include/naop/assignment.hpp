#pragma once

#include <cstddef>
#include <vector>

namespace naop {

/// Dense row-major cost matrix.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> cost;

    CostMatrix() = default;
    CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), cost(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return cost[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

struct Assignment {
    std::vector<int> row_to_col;  // -1 for unassigned rows
    double total_cost = 0.0;
};

/// Minimum-cost one-to-one matching of min(rows, cols) pairs (shortest
/// augmenting paths with potentials, O(n^3)). Throws on non-finite costs.
Assignment solve_assignment(const CostMatrix& cost);

}  // namespace naop
