#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "topobar/image_io.hpp"

namespace topobar {

using VertexId = std::uint32_t;

enum class Direction : std::uint8_t { increasing, decreasing };

std::string_view to_string(Direction d);

// A vertex, edge or triangle. Unused slots of verts are zero.
struct Simplex {
  std::array<VertexId, 3> verts{};
  std::uint8_t dim = 0;

  static Simplex vertex(VertexId a) { return {{a, 0, 0}, 0}; }
  static Simplex edge(VertexId a, VertexId b);
  static Simplex triangle(VertexId a, VertexId b, VertexId c);

  std::span<const VertexId> vertices() const { return {verts.data(), static_cast<std::size_t>(dim) + 1}; }
  // Codimension-one faces; empty for a vertex.
  std::vector<Simplex> facets() const;

  friend auto operator<=>(const Simplex&, const Simplex&) = default;
};

// Unfiltered complex: vertices, then edges, then triangles, each block in
// lexicographic order.
struct SimplicialComplex {
  std::size_t vertex_count = 0;
  std::vector<Simplex> simplices;

  std::size_t count(int dim) const;
};

struct FilteredComplex {
  std::size_t vertex_count = 0;  // size of the ambient vertex numbering
  std::vector<Simplex> simplices;
  std::vector<double> entry;  // entry[i] is when simplices[i] appears
  Direction direction = Direction::increasing;

  std::size_t size() const { return simplices.size(); }
  std::size_t count(int dim) const;
  bool empty() const { return simplices.empty(); }
};

// Pixels are vertices (ROI index), 8-adjacent pairs are edges and mutually
// adjacent triples are triangles.
SimplicialComplex build_complex(const RoiImage& roi);

// Sublevel filtration by the vertex function. A decreasing filtration uses
// 1 - f so that every entry value stays in [0,1].
FilteredComplex filter_complex(const SimplicialComplex& complex, std::span<const double> vertex_values,
                               Direction direction);

// Full subcomplex on the kept vertices; entry values are unchanged.
FilteredComplex restrict_complex(const FilteredComplex& complex, const std::function<bool(VertexId)>& keep);

// Throws InvariantError unless every face of every simplex is present with
// entry no later than the simplex itself.
void check_filtration(const FilteredComplex& complex);

}  // namespace topobar
