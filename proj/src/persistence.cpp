#include "topobar/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "topobar/union_find.hpp"

namespace topobar {

std::size_t Barcode::alive_at(double t) const {
  return static_cast<std::size_t>(
      std::count_if(intervals.begin(), intervals.end(), [t](const Interval& i) { return i.alive_at(t); }));
}

double Barcode::total_length() const {
  double sum = 0;
  for (const Interval& i : intervals) sum += i.length();
  return sum;
}

void canonicalize(Barcode& barcode) { std::sort(barcode.intervals.begin(), barcode.intervals.end()); }

namespace {

using Column = std::vector<std::uint32_t>;  // sorted filtration positions

constexpr std::uint32_t kNone = static_cast<std::uint32_t>(-1);

std::uint64_t edge_key(VertexId a, VertexId b) { return (std::uint64_t{a} << 32) | b; }

// target += source over GF(2); both sorted.
void add_column(Column& target, const Column& source, Column& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

// Reduces `col` against already reduced columns; returns its pivot or kNone.
std::uint32_t reduce(Column& col, const std::vector<std::uint32_t>& owner_of_pivot,
                     const std::vector<Column>& reduced, Column& scratch) {
  while (!col.empty()) {
    const std::uint32_t low = col.back();
    const std::uint32_t owner = owner_of_pivot[low];
    if (owner == kNone) return low;
    add_column(col, reduced[owner], scratch);
  }
  return kNone;
}

}  // namespace

BarcodePair compute_barcodes(const FilteredComplex& complex, double cap) {
  check_filtration(complex);
  const std::size_t n = complex.size();

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ea = complex.entry[a], eb = complex.entry[b];
    if (ea != eb) return ea < eb;
    const Simplex& sa = complex.simplices[a];
    const Simplex& sb = complex.simplices[b];
    if (sa.dim != sb.dim) return sa.dim < sb.dim;
    return sa.verts < sb.verts;
  });

  std::vector<std::uint32_t> vertex_pos(complex.vertex_count, kNone);
  std::unordered_map<std::uint64_t, std::uint32_t> edge_pos;
  edge_pos.reserve(complex.count(1));
  for (std::uint32_t p = 0; p < n; ++p) {
    const Simplex& s = complex.simplices[order[p]];
    if (s.dim == 0) vertex_pos[s.verts[0]] = p;
    if (s.dim == 1) edge_pos.emplace(edge_key(s.verts[0], s.verts[1]), p);
  }
  const auto entry_at = [&](std::uint32_t p) { return complex.entry[order[p]]; };
  const auto dim_at = [&](std::uint32_t p) { return complex.simplices[order[p]].dim; };

  std::vector<Column> reduced(n);
  std::vector<std::uint32_t> owner_of_pivot(n, kNone);
  std::vector<std::uint8_t> cleared(n, 0);
  Column scratch;

  BarcodePair out;
  const auto emit = [&](int dim, double birth, double death) {
    if (!(death > birth)) return;
    (dim == 0 ? out.dim0 : out.dim1).intervals.push_back({birth, death});
  };

  // Triangles first: their pivots are positive edges whose own columns are
  // known to reduce to zero and can be skipped below.
  for (std::uint32_t p = 0; p < n; ++p) {
    if (dim_at(p) != 2) continue;
    const Simplex& s = complex.simplices[order[p]];
    Column col;
    for (const Simplex& f : s.facets()) col.push_back(edge_pos.at(edge_key(f.verts[0], f.verts[1])));
    std::sort(col.begin(), col.end());
    const std::uint32_t low = reduce(col, owner_of_pivot, reduced, scratch);
    if (low == kNone) continue;
    owner_of_pivot[low] = p;
    cleared[low] = 1;
    reduced[p] = std::move(col);
    emit(1, entry_at(low), entry_at(p));
  }

  for (std::uint32_t p = 0; p < n; ++p) {
    if (dim_at(p) != 1 || cleared[p]) continue;
    const Simplex& s = complex.simplices[order[p]];
    Column col{vertex_pos[s.verts[0]], vertex_pos[s.verts[1]]};
    std::sort(col.begin(), col.end());
    const std::uint32_t low = reduce(col, owner_of_pivot, reduced, scratch);
    if (low == kNone) {
      // Positive edge never killed by a triangle.
      emit(1, entry_at(p), cap);
      continue;
    }
    owner_of_pivot[low] = p;
    reduced[p] = std::move(col);
    emit(0, entry_at(low), entry_at(p));
  }

  for (std::uint32_t p = 0; p < n; ++p) {
    if (dim_at(p) == 0 && owner_of_pivot[p] == kNone) emit(0, entry_at(p), cap);
  }

  canonicalize(out.dim0);
  canonicalize(out.dim1);
  return out;
}

namespace {

// Rank over GF(2) of a matrix given as bit-packed columns.
std::size_t gf2_rank(std::vector<std::vector<std::uint64_t>> columns, std::size_t rows) {
  std::size_t rank = 0;
  const std::size_t words = (rows + 63) / 64;
  for (std::size_t row = 0; row < rows && rank < columns.size(); ++row) {
    const std::size_t w = row / 64;
    const std::uint64_t bit = std::uint64_t{1} << (row % 64);
    std::size_t pivot = rank;
    while (pivot < columns.size() && !(columns[pivot][w] & bit)) ++pivot;
    if (pivot == columns.size()) continue;
    std::swap(columns[rank], columns[pivot]);
    for (std::size_t c = rank + 1; c < columns.size(); ++c) {
      if (columns[c][w] & bit) {
        for (std::size_t k = 0; k < words; ++k) columns[c][k] ^= columns[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace

BettiNumbers betti_at(const FilteredComplex& complex, double t) {
  std::vector<VertexId> vertices;
  std::vector<Simplex> edges, triangles;
  for (std::size_t i = 0; i < complex.size(); ++i) {
    if (complex.entry[i] > t) continue;
    const Simplex& s = complex.simplices[i];
    if (s.dim == 0) vertices.push_back(s.verts[0]);
    if (s.dim == 1) edges.push_back(s);
    if (s.dim == 2) triangles.push_back(s);
  }
  if (vertices.empty()) return {};

  std::unordered_map<VertexId, std::size_t> vertex_index;
  for (std::size_t i = 0; i < vertices.size(); ++i) vertex_index[vertices[i]] = i;
  UnionFind components(vertices.size());
  std::unordered_map<std::uint64_t, std::size_t> edge_index;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    components.unite(vertex_index.at(edges[i].verts[0]), vertex_index.at(edges[i].verts[1]));
    edge_index[edge_key(edges[i].verts[0], edges[i].verts[1])] = i;
  }

  const std::size_t words = (edges.size() + 63) / 64;
  std::vector<std::vector<std::uint64_t>> boundary(triangles.size(), std::vector<std::uint64_t>(words, 0));
  for (std::size_t c = 0; c < triangles.size(); ++c) {
    for (const Simplex& f : triangles[c].facets()) {
      const std::size_t row = edge_index.at(edge_key(f.verts[0], f.verts[1]));
      boundary[c][row / 64] ^= std::uint64_t{1} << (row % 64);
    }
  }

  BettiNumbers b;
  b.b0 = components.components();
  const std::size_t cycles = edges.size() + b.b0 - vertices.size();  // dim ker of the edge boundary
  b.b1 = cycles - gf2_rank(std::move(boundary), edges.size());
  return b;
}

}  // namespace topobar
