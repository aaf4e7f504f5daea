#include "topobar/learn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "topobar/matching.hpp"
#include "topobar/parallel.hpp"

namespace topobar {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvariantError("format_double failed");
  return std::string(buf, ptr);
}

void DistanceMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (values.rows() != n || values.cols() != n) throw InvariantError("distance matrix is not square over its ids");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values(i, i) != 0.0) throw InvariantError("distance matrix has a nonzero diagonal entry");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(values(i, j)) || values(i, j) < 0.0) {
        throw InvariantError("distance matrix has a negative or non-finite entry");
      }
      if (std::abs(values(i, j) - values(j, i)) > 1e-9) throw InvariantError("distance matrix is not symmetric");
    }
  }
}

namespace {

std::vector<std::string> ids_of(const std::vector<BarcodePanel>& panels) {
  std::vector<std::string> ids;
  for (const auto& p : panels) ids.push_back(p.image_id);
  return ids;
}

}  // namespace

FeatureMatrix feature_vectors(const std::vector<BarcodePanel>& panels, const std::vector<BarcodePanel>& comparison) {
  FeatureMatrix f;
  f.row_ids = ids_of(panels);
  f.col_ids = ids_of(comparison);
  f.values.resize(static_cast<Eigen::Index>(panels.size()), static_cast<Eigen::Index>(comparison.size()));
  const std::size_t cols = comparison.size();
  parallel_for(panels.size() * cols, [&](std::size_t cell) {
    const std::size_t x = cell / cols, j = cell % cols;
    f.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(j)) = panel_distance(panels[x], comparison[j]);
  });
  return f;
}

DistanceMatrix distance_matrix(const std::vector<BarcodePanel>& panels) {
  DistanceMatrix d;
  d.ids = ids_of(panels);
  const std::size_t n = panels.size();
  d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double v = panel_distance(panels[i], panels[j]);
    d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    d.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  });
  return d;
}

FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.col_ids = features.col_ids;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), features.values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row_ids.push_back(features.row_ids.at(rows[r]));
    out.values.row(static_cast<Eigen::Index>(r)) = features.values.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

FeatureMatrix as_features(const DistanceMatrix& d) { return {d.ids, d.ids, d.values}; }

void standardize_columns(FeatureMatrix& features) {
  auto& m = features.values;
  if (m.rows() == 0) return;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mean = m.col(c).mean();
    const double var = (m.col(c).array() - mean).square().mean();
    if (var > 0) {
      m.col(c) = (m.col(c).array() - mean) / std::sqrt(var);
    } else {
      m.col(c).setZero();
    }
  }
}

Embedding cmds_embed(const DistanceMatrix& d, int k) {
  if (k < 1) throw InputError("cmds_embed: need at least one axis");
  const Eigen::Index n = d.values.rows();
  if (n != d.values.cols()) throw InputError("cmds_embed: matrix is not square");
  if (n < k) throw InputError("cmds_embed: fewer points than requested axes");

  const Eigen::MatrixXd squared = d.values.array().square().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd gram = -0.5 * centering * squared * centering;
  gram = 0.5 * (gram + gram.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw InvariantError("cmds_embed: eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const double scale = std::max(1.0, std::abs(evals(n - 1)));
  const double tol = 1e-9 * scale * static_cast<double>(n);

  Embedding out;
  std::vector<Eigen::Index> axes;
  for (Eigen::Index i = n - 1; i >= 0 && static_cast<int>(axes.size()) < k; --i) {
    if (evals(i) > tol) axes.push_back(i);
  }
  out.truncated = static_cast<int>(axes.size()) < k;
  out.coords.resize(n, static_cast<Eigen::Index>(axes.size()));
  out.eigenvalues.resize(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const auto col = static_cast<Eigen::Index>(a);
    out.eigenvalues(col) = evals(axes[a]);
    Eigen::VectorXd axis = solver.eigenvectors().col(axes[a]) * std::sqrt(evals(axes[a]));
    // Sign convention: first clearly nonzero coordinate is positive.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(axis(i)) > 1e-12) {
        if (axis(i) < 0) axis = -axis;
        break;
      }
    }
    out.coords.col(col) = axis;
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const Eigen::MatrixXd& values) {
  std::string text = "id";
  for (const auto& id : col_ids) text += "," + id;
  text += "\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    text += row_ids.at(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < values.cols(); ++c) text += "," + format_double(values(r, c));
    text += "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& d) {
  d.validate();
  write_matrix_csv(path, d.ids, d.ids, d.values);
}

DistanceMatrix read_distance_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  auto header = split(line);
  if (header.empty() || header.front() != "id") throw FormatError(path.string() + " line 1: header must start with id");
  DistanceMatrix d;
  d.ids.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(d.ids.size());
  d.values.resize(n, n);
  Eigen::Index row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (row >= n || static_cast<Eigen::Index>(cells.size()) != n + 1) {
      throw FormatError(path.string() + " line " + std::to_string(line_no) + ": wrong number of cells");
    }
    if (cells[0] != d.ids[static_cast<std::size_t>(row)]) {
      throw FormatError(path.string() + " line " + std::to_string(line_no) + ": row id does not match header");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::string& cell = cells[static_cast<std::size_t>(c) + 1];
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(path.string() + " line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      d.values(row, c) = v;
    }
    ++row;
  }
  if (row != n) throw FormatError(path.string() + ": expected " + std::to_string(n) + " rows");
  try {
    d.validate();
  } catch (const InvariantError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return d;
}

void write_embedding_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                         const Embedding& embedding) {
  static const char* axis_names[] = {"x", "y", "z"};
  std::vector<std::string> cols;
  for (Eigen::Index a = 0; a < embedding.coords.cols(); ++a) {
    cols.push_back(a < 3 ? axis_names[a] : "axis" + std::to_string(a + 1));
  }
  write_matrix_csv(path, ids, cols, embedding.coords);
}

}  // namespace topobar
