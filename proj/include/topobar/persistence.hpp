#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "topobar/complex.hpp"

namespace topobar {

// Death value given to classes that never die.
inline constexpr double kDefaultCap = 1.1;

struct Interval {
  double birth = 0.0;
  double death = 0.0;

  double length() const { return death - birth; }
  bool alive_at(double t) const { return birth <= t && t < death; }
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

struct Barcode {
  int dim = 0;
  std::vector<Interval> intervals;  // sorted by (birth, death)

  std::size_t size() const { return intervals.size(); }
  bool empty() const { return intervals.empty(); }
  std::size_t alive_at(double t) const;
  double total_length() const;
  friend bool operator==(const Barcode&, const Barcode&) = default;
};

struct BarcodePair {
  Barcode dim0{0, {}};
  Barcode dim1{1, {}};
};

// Persistence over the two-element field by boundary-matrix reduction.
// Simplices are ordered by (entry, dim, vertices). Intervals of length zero
// are dropped and essential classes end at `cap`.
BarcodePair compute_barcodes(const FilteredComplex& complex, double cap = kDefaultCap);

struct BettiNumbers {
  std::size_t b0 = 0;
  std::size_t b1 = 0;
  friend bool operator==(const BettiNumbers&, const BettiNumbers&) = default;
};

// Betti numbers of the sublevel complex {entry <= t}, from component
// counting and the rank of the triangle boundary matrix. Shares no code with
// compute_barcodes.
BettiNumbers betti_at(const FilteredComplex& complex, double t);

void canonicalize(Barcode& barcode);

}  // namespace topobar
