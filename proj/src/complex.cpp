#include "topobar/complex.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace topobar {

std::string_view to_string(Direction d) { return d == Direction::increasing ? "increasing" : "decreasing"; }

Simplex Simplex::edge(VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  return {{a, b, 0}, 1};
}

Simplex Simplex::triangle(VertexId a, VertexId b, VertexId c) {
  std::array<VertexId, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  return {v, 2};
}

std::vector<Simplex> Simplex::facets() const {
  switch (dim) {
    case 1:
      return {vertex(verts[0]), vertex(verts[1])};
    case 2:
      return {edge(verts[0], verts[1]), edge(verts[0], verts[2]), edge(verts[1], verts[2])};
    default:
      return {};
  }
}

namespace {

template <typename Range>
std::size_t count_dim(const Range& simplices, int dim) {
  return static_cast<std::size_t>(
      std::count_if(simplices.begin(), simplices.end(), [dim](const Simplex& s) { return s.dim == dim; }));
}

}  // namespace

std::size_t SimplicialComplex::count(int dim) const { return count_dim(simplices, dim); }
std::size_t FilteredComplex::count(int dim) const { return count_dim(simplices, dim); }

SimplicialComplex build_complex(const RoiImage& roi) {
  SimplicialComplex out;
  out.vertex_count = roi.size();
  std::vector<Simplex> edges, triangles;

  for (std::size_t i = 0; i < roi.size(); ++i) {
    out.simplices.push_back(Simplex::vertex(static_cast<VertexId>(i)));
    const auto [r, c] = roi.pixels[i];
    // Forward neighbours only, so each edge is produced once.
    for (auto [dr, dc] : {std::pair{0, 1}, {1, -1}, {1, 0}, {1, 1}}) {
      const long j = roi.index_of(r + dr, c + dc);
      if (j >= 0) edges.push_back(Simplex::edge(static_cast<VertexId>(i), static_cast<VertexId>(j)));
    }
    // Every mutually adjacent triple lies in exactly one 2x2 block; key the
    // block by its top-left pixel.
    const long block[4] = {static_cast<long>(i), roi.index_of(r, c + 1), roi.index_of(r + 1, c),
                           roi.index_of(r + 1, c + 1)};
    for (int skip = 0; skip < 4; ++skip) {
      VertexId tri[3];
      int n = 0;
      for (int k = 0; k < 4; ++k) {
        if (k == skip) continue;
        if (block[k] < 0) break;
        tri[n++] = static_cast<VertexId>(block[k]);
      }
      if (n == 3) triangles.push_back(Simplex::triangle(tri[0], tri[1], tri[2]));
    }
  }
  // Blocks whose top-left pixel is outside the ROI still hold L-shaped
  // triples of the three remaining pixels.
  for (int r = -1; r < roi.image_height; ++r) {
    for (int c = -1; c < roi.image_width; ++c) {
      if (roi.index_of(r, c) >= 0) continue;
      const long b = roi.index_of(r, c + 1), d = roi.index_of(r + 1, c), e = roi.index_of(r + 1, c + 1);
      if (b >= 0 && d >= 0 && e >= 0) {
        triangles.push_back(
            Simplex::triangle(static_cast<VertexId>(b), static_cast<VertexId>(d), static_cast<VertexId>(e)));
      }
    }
  }

  std::sort(edges.begin(), edges.end());
  std::sort(triangles.begin(), triangles.end());
  out.simplices.insert(out.simplices.end(), edges.begin(), edges.end());
  out.simplices.insert(out.simplices.end(), triangles.begin(), triangles.end());
  return out;
}

FilteredComplex filter_complex(const SimplicialComplex& complex, std::span<const double> vertex_values,
                               Direction direction) {
  if (vertex_values.size() != complex.vertex_count) {
    throw InputError("filter_complex: expected " + std::to_string(complex.vertex_count) + " vertex values, got " +
                     std::to_string(vertex_values.size()));
  }
  std::vector<double> g(vertex_values.begin(), vertex_values.end());
  for (double& v : g) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("filter_complex: vertex value outside [0,1]");
    if (direction == Direction::decreasing) v = 1.0 - v;
  }
  FilteredComplex out;
  out.vertex_count = complex.vertex_count;
  out.simplices = complex.simplices;
  out.direction = direction;
  out.entry.reserve(out.simplices.size());
  for (const Simplex& s : out.simplices) {
    double value = 0.0;
    for (VertexId v : s.vertices()) value = std::max(value, g[v]);
    out.entry.push_back(value);
  }
  return out;
}

FilteredComplex restrict_complex(const FilteredComplex& complex, const std::function<bool(VertexId)>& keep) {
  std::vector<std::uint8_t> kept(complex.vertex_count);
  for (std::size_t v = 0; v < complex.vertex_count; ++v) kept[v] = keep(static_cast<VertexId>(v)) ? 1 : 0;
  FilteredComplex out;
  out.vertex_count = complex.vertex_count;
  out.direction = complex.direction;
  for (std::size_t i = 0; i < complex.size(); ++i) {
    const Simplex& s = complex.simplices[i];
    const auto verts = s.vertices();
    if (std::all_of(verts.begin(), verts.end(), [&](VertexId v) { return v < kept.size() && kept[v]; })) {
      out.simplices.push_back(s);
      out.entry.push_back(complex.entry[i]);
    }
  }
  return out;
}

void check_filtration(const FilteredComplex& complex) {
  if (complex.entry.size() != complex.simplices.size()) throw InvariantError("entry/simplex count mismatch");
  std::unordered_map<std::uint64_t, double> edge_entry;
  std::unordered_map<VertexId, double> vertex_entry;
  const auto key = [](const Simplex& e) { return (std::uint64_t{e.verts[0]} << 32) | e.verts[1]; };
  for (std::size_t i = 0; i < complex.size(); ++i) {
    const Simplex& s = complex.simplices[i];
    if (!std::isfinite(complex.entry[i])) throw InvariantError("non-finite entry value");
    if (s.dim == 0) vertex_entry[s.verts[0]] = complex.entry[i];
    if (s.dim == 1) edge_entry[key(s)] = complex.entry[i];
  }
  for (std::size_t i = 0; i < complex.size(); ++i) {
    const Simplex& s = complex.simplices[i];
    for (const Simplex& f : s.facets()) {
      double face_entry = 0;
      if (f.dim == 0) {
        const auto it = vertex_entry.find(f.verts[0]);
        if (it == vertex_entry.end()) throw InvariantError("complex is not closed under faces");
        face_entry = it->second;
      } else {
        const auto it = edge_entry.find(key(f));
        if (it == edge_entry.end()) throw InvariantError("complex is not closed under faces");
        face_entry = it->second;
      }
      if (face_entry > complex.entry[i]) throw InvariantError("filtration is not monotone");
    }
  }
}

}  // namespace topobar
