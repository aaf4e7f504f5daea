#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topobar/bifiltration.hpp"

namespace topobar {

// Rows are images under study, columns the comparison set.
struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Eigen::MatrixXd values;
};

struct DistanceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;

  std::size_t size() const { return ids.size(); }
  // Throws InvariantError unless square, symmetric to 1e-9, nonnegative
  // and zero on the diagonal.
  void validate() const;
};

// F(x, j) = panel_distance(panels[x], comparison[j]).
FeatureMatrix feature_vectors(const std::vector<BarcodePanel>& panels, const std::vector<BarcodePanel>& comparison);

// Pairwise panel distances; computes the upper triangle once and mirrors it.
DistanceMatrix distance_matrix(const std::vector<BarcodePanel>& panels);

// Keeps the selected rows and every column.
FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<std::size_t>& rows);
FeatureMatrix as_features(const DistanceMatrix& d);

// Per-column z-scores; constant columns become zero.
void standardize_columns(FeatureMatrix& features);

struct Embedding {
  Eigen::MatrixXd coords;       // n x axes
  Eigen::VectorXd eigenvalues;  // the eigenvalues used, descending
  bool truncated = false;       // fewer positive eigenvalues than requested axes
};

// Classical multidimensional scaling.
Embedding cmds_embed(const DistanceMatrix& d, int k);

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const Eigen::MatrixXd& values);
void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& d);
DistanceMatrix read_distance_csv(const std::filesystem::path& path);
void write_embedding_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                         const Embedding& embedding);

// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace topobar
