#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "topobar/bifiltration.hpp"
#include "topobar/persistence.hpp"

namespace topobar {

double overlap(const Interval& a, const Interval& b);

// Measure of the symmetric difference of two finite intervals.
double delta(const Interval& a, const Interval& b);

// Square (n1 + n2) matching cost matrix:
//   [ delta(I_i, J_j)   | mu(I_i) on diagonal ]
//   [ mu(J_j) diagonal  | 0                   ]
// Off-diagonal entries of the two diagonal blocks hold `sentinel`, a finite
// value larger than any feasible total.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major n x n
  double sentinel = 0.0;

  double operator()(std::size_t r, std::size_t c) const { return values[r * n + c]; }
};

CostMatrix matching_cost_matrix(const Barcode& a, const Barcode& b);

struct Assignment {
  std::vector<std::size_t> col_of_row;
  double cost = 0.0;
};

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// Hungarian method with potentials, O(rows^2 cols).
Assignment solve_assignment(std::size_t rows, std::size_t cols, std::span<const double> cost);

// Square minimum-cost assignment by Jonker-Volgenant: column reduction,
// reduction transfer, then shortest augmenting paths for the free rows.
Assignment solve_assignment_jv(std::size_t n, std::span<const double> cost);

// Matching distance: the minimum over partial matchings of the summed
// symmetric differences of matched pairs plus the lengths of unmatched
// intervals. Solved as a maximum-overlap assignment (Jonker-Volgenant)
// between the intervals that overlap something on the other side.
double barcode_distance(const Barcode& a, const Barcode& b);

// Same value, by solving the full square cost matrix with the Hungarian
// method.
double assignment_distance(const Barcode& a, const Barcode& b);

// Enumerates every partial matching. Throws InputError when the two
// barcodes hold more than kBruteForceLimit intervals together.
inline constexpr std::size_t kBruteForceLimit = 10;
double brute_force_distance(const Barcode& a, const Barcode& b);

// Sum of barcode distances over all keys; panels must have identical keys.
double panel_distance(const BarcodePanel& a, const BarcodePanel& b);

}  // namespace topobar
