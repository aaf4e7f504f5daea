#include "topobar/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace topobar {

double overlap(const Interval& a, const Interval& b) {
  return std::max(0.0, std::min(a.death, b.death) - std::max(a.birth, b.birth));
}

double delta(const Interval& a, const Interval& b) {
  return std::max(0.0, a.length() + b.length() - 2.0 * overlap(a, b));
}

namespace {

void require_finite(const Barcode& b) {
  for (const Interval& i : b.intervals) {
    if (!std::isfinite(i.birth) || !std::isfinite(i.death)) {
      throw InvariantError("matching distance needs capped (finite) intervals");
    }
  }
}

}  // namespace

CostMatrix matching_cost_matrix(const Barcode& a, const Barcode& b) {
  require_finite(a);
  require_finite(b);
  const std::size_t n1 = a.size(), n2 = b.size();
  CostMatrix m;
  m.n = n1 + n2;
  m.sentinel = a.total_length() + b.total_length() + 1.0;
  m.values.assign(m.n * m.n, m.sentinel);
  const auto set = [&](std::size_t r, std::size_t c, double v) { m.values[r * m.n + c] = v; };
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) set(i, j, delta(a.intervals[i], b.intervals[j]));
    set(i, n2 + i, a.intervals[i].length());
  }
  for (std::size_t j = 0; j < n2; ++j) {
    set(n1 + j, j, b.intervals[j].length());
    for (std::size_t i = 0; i < n1; ++i) set(n1 + j, n2 + i, 0.0);
  }
  return m;
}

Assignment solve_assignment(std::size_t rows, std::size_t cols, std::span<const double> cost) {
  if (rows > cols) throw InputError("solve_assignment: more rows than columns");
  if (cost.size() != rows * cols) throw InputError("solve_assignment: cost size mismatch");
  Assignment out;
  out.col_of_row.assign(rows, 0);
  if (rows == 0) return out;

  // 1-based shortest augmenting paths; column 0 is the virtual root.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), min_slack(cols + 1);
  std::vector<std::size_t> row_of_col(cols + 1, 0), way(cols + 1, 0);
  std::vector<std::uint8_t> used(cols + 1);
  for (std::size_t i = 1; i <= rows; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double step = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double reduced = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < step) {
          step = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += step;
          v[j] -= step;
        } else {
          min_slack[j] -= step;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= cols; ++j) {
    if (row_of_col[j] != 0) out.col_of_row[row_of_col[j] - 1] = j - 1;
  }
  for (std::size_t i = 0; i < rows; ++i) out.cost += cost[i * cols + out.col_of_row[i]];
  return out;
}

Assignment solve_assignment_jv(std::size_t n, std::span<const double> cost) {
  if (cost.size() != n * n) throw InputError("solve_assignment_jv: cost size mismatch");
  Assignment out;
  out.col_of_row.assign(n, 0);
  if (n == 0) return out;
  if (n == 1) {
    out.cost = cost[0];
    return out;
  }
  constexpr long kFree = -1;
  const auto c = [&](std::size_t i, std::size_t j) { return cost[i * n + j]; };
  std::vector<double> v(n), dist(n);
  std::vector<long> row_sol(n, kFree), col_sol(n, kFree);
  std::vector<std::size_t> matches(n, 0), pred(n), collist(n);
  std::vector<std::size_t> free_rows;

  // Column reduction, scanning columns last to first.
  for (std::size_t j = n; j-- > 0;) {
    std::size_t imin = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (c(i, j) < c(imin, j)) imin = i;
    }
    v[j] = c(imin, j);
    if (++matches[imin] == 1) {
      row_sol[imin] = static_cast<long>(j);
      col_sol[j] = static_cast<long>(imin);
    } else if (v[j] < v[static_cast<std::size_t>(row_sol[imin])]) {
      const auto j1 = static_cast<std::size_t>(row_sol[imin]);
      row_sol[imin] = static_cast<long>(j);
      col_sol[j] = static_cast<long>(imin);
      col_sol[j1] = kFree;
    }
  }

  // Reduction transfer from rows holding a single column.
  for (std::size_t i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      free_rows.push_back(i);
    } else if (matches[i] == 1) {
      const auto j1 = static_cast<std::size_t>(row_sol[i]);
      double slack = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != j1) slack = std::min(slack, c(i, j) - v[j]);
      }
      v[j1] -= slack;
    }
  }

  // Shortest augmenting path from each free row (Dijkstra on reduced costs).
  for (const std::size_t free_row : free_rows) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = c(free_row, j) - v[j];
      pred[j] = free_row;
      collist[j] = j;
    }
    std::size_t low = 0, up = 0, last = 0;
    long end_of_path = kFree;
    double min = 0;
    while (end_of_path == kFree) {
      if (up == low) {
        // Next batch of columns at the minimum distance.
        last = low;
        min = dist[collist[up++]];
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = collist[k];
          if (dist[j] <= min) {
            if (dist[j] < min) {
              up = low;
              min = dist[j];
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (std::size_t k = low; k < up; ++k) {
          if (col_sol[collist[k]] == kFree) {
            end_of_path = static_cast<long>(collist[k]);
            break;
          }
        }
      }
      if (end_of_path != kFree) break;
      const std::size_t j1 = collist[low++];
      const auto i = static_cast<std::size_t>(col_sol[j1]);
      const double h = c(i, j1) - v[j1] - min;
      for (std::size_t k = up; k < n; ++k) {
        const std::size_t j = collist[k];
        const double cand = c(i, j) - v[j] - h;
        if (cand < dist[j]) {
          pred[j] = i;
          if (cand == min) {
            if (col_sol[j] == kFree) {
              end_of_path = static_cast<long>(j);
              break;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
          dist[j] = cand;
        }
      }
    }
    // Columns scanned before the last batch get their prices raised.
    for (std::size_t k = 0; k < last; ++k) {
      const std::size_t j = collist[k];
      v[j] += dist[j] - min;
    }
    std::size_t row = 0;
    do {
      row = pred[static_cast<std::size_t>(end_of_path)];
      col_sol[static_cast<std::size_t>(end_of_path)] = static_cast<long>(row);
      const long next = row_sol[row];
      row_sol[row] = end_of_path;
      end_of_path = next;
    } while (row != free_row);
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.col_of_row[i] = static_cast<std::size_t>(row_sol[i]);
    out.cost += c(i, out.col_of_row[i]);
  }
  return out;
}

double assignment_distance(const Barcode& a, const Barcode& b) {
  const CostMatrix m = matching_cost_matrix(a, b);
  const Assignment best = solve_assignment(m.n, m.n, m.values);
  for (std::size_t r = 0; r < m.n; ++r) {
    if (m(r, best.col_of_row[r]) >= m.sentinel) throw InvariantError("assignment used a forbidden cell");
  }
  return best.cost;
}

double barcode_distance(const Barcode& a, const Barcode& b) {
  require_finite(a);
  require_finite(b);

  // Matching two intervals costs |I| + |J| - 2 overlap, never more than
  // leaving both unmatched, so the optimum maximizes total overlap. Only
  // intervals that overlap something on the other side can contribute.
  std::vector<std::size_t> rows, cols;
  std::vector<std::uint8_t> col_used(b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (overlap(a.intervals[i], b.intervals[j]) > 0.0) {
        any = true;
        col_used[j] = 1;
      }
    }
    if (any) rows.push_back(i);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (col_used[j]) cols.push_back(j);
  }

  std::vector<std::uint8_t> matched_a(a.size(), 0), matched_b(b.size(), 0);
  double distance = 0.0;
  if (!rows.empty()) {
    // Square problem; padding rows or columns overlap nothing.
    const std::size_t n = std::max(rows.size(), cols.size());
    std::vector<double> cost(n * n, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        cost[r * n + c] = -overlap(a.intervals[rows[r]], b.intervals[cols[c]]);
      }
    }
    const Assignment best = solve_assignment_jv(n, cost);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t c = best.col_of_row[r];
      if (c >= cols.size()) continue;
      const Interval& ia = a.intervals[rows[r]];
      const Interval& ib = b.intervals[cols[c]];
      if (overlap(ia, ib) <= 0.0) continue;
      matched_a[rows[r]] = 1;
      matched_b[cols[c]] = 1;
      distance += delta(ia, ib);
    }
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!matched_a[i]) distance += a.intervals[i].length();
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!matched_b[j]) distance += b.intervals[j].length();
  }
  return distance;
}

double brute_force_distance(const Barcode& a, const Barcode& b) {
  if (a.size() + b.size() > kBruteForceLimit) {
    throw InputError("brute_force_distance: at most " + std::to_string(kBruteForceLimit) + " intervals in total");
  }
  require_finite(a);
  require_finite(b);
  std::vector<std::uint8_t> taken(b.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Interval i of `a` is either left unmatched or paired with a free J.
  std::function<void(std::size_t, double)> visit = [&](std::size_t i, double partial) {
    if (i == a.size()) {
      double total = partial;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (!taken[j]) total += b.intervals[j].length();
      }
      best = std::min(best, total);
      return;
    }
    visit(i + 1, partial + a.intervals[i].length());
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      visit(i + 1, partial + delta(a.intervals[i], b.intervals[j]));
      taken[j] = 0;
    }
  };
  visit(0, 0.0);
  return best;
}

double panel_distance(const BarcodePanel& a, const BarcodePanel& b) {
  if (a.mode != b.mode || a.size() != b.size()) {
    throw InputError("panels " + a.image_id + " and " + b.image_id + " have different layouts");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.barcodes[k].first != b.barcodes[k].first) {
      throw InputError("panel key mismatch: " + a.barcodes[k].first.name() + " vs " + b.barcodes[k].first.name());
    }
    sum += barcode_distance(a.barcodes[k].second, b.barcodes[k].second);
  }
  return sum;
}

}  // namespace topobar
