#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topobar/learn.hpp"

namespace topobar {

// exp(-|u - v|^2 / (2 sigma^2))
double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                  double sigma);

struct SvmParams {
  double sigma = 1.0;
  double C = 1.0;
  double tolerance = 1e-3;  // KKT violation at which SMO stops
};

// One binary C-SVC: decision(x) = sum_i coef_i K(sv_i, x) - rho, positive
// for class `first`.
struct BinaryMachine {
  std::size_t first = 0;
  std::size_t second = 0;
  std::vector<std::size_t> support;  // rows of KernelModel::vectors
  std::vector<double> coef;          // alpha_i * y_i
  double rho = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct KernelModel {
  double sigma = 1.0;
  double C = 1.0;
  std::vector<std::string> classes;  // sorted; index order breaks vote ties
  Eigen::MatrixXd vectors;           // training rows
  std::vector<BinaryMachine> machines;  // one per class pair (a < b)

  double decision(const BinaryMachine& m, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::string predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::string to_json() const;
};

KernelModel svm_train(const Eigen::MatrixXd& features, const std::vector<std::string>& labels, const SvmParams& params);

struct ClassAccuracy {
  std::string label;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct LoocvResult {
  double sigma = 0.0;
  double C = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<ClassAccuracy> per_class;  // sorted by label
  std::vector<std::string> predictions;  // empty string: fold could not be trained

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

// Leave-one-out: train on n-1 rows, predict the held-out row. A fold whose
// training rows hold a single class counts as an error.
LoocvResult loocv(const Eigen::MatrixXd& features, const std::vector<std::string>& labels, const SvmParams& params);

// Powers of two 2^lo .. 2^hi.
std::vector<double> power_grid(int lo, int hi);

// Exhaustive LOOCV over sigma x C. Ties go to smaller C, then smaller sigma.
LoocvResult grid_sweep(const Eigen::MatrixXd& features, const std::vector<std::string>& labels,
                       const std::vector<double>& sigma_grid, const std::vector<double>& c_grid,
                       double tolerance = 1e-3);

}  // namespace topobar
