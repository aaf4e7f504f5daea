#include "topobar/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "topobar/errors.hpp"
#include "topobar/parallel.hpp"

namespace topobar {

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                  double sigma) {
  if (!(sigma > 0)) throw InputError("rbf_kernel: sigma must be positive");
  if (u.size() != v.size()) throw InputError("rbf_kernel: vectors differ in length");
  return std::exp(-(u - v).squaredNorm() / (2.0 * sigma * sigma));
}

namespace {

constexpr double kTau = 1e-12;

struct BinarySolution {
  std::vector<double> alpha;
  double rho = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// SMO with second-order working set selection on
//   min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= C,  Q_ij = y_i y_j K_ij.
BinarySolution solve_binary(const Eigen::MatrixXd& k, const std::vector<int>& y, double C, double eps) {
  const std::size_t n = y.size();
  BinarySolution s;
  s.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  const auto diag = [&](std::size_t i) { return k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)); };
  const auto up = [&](std::size_t t) { return y[t] > 0 ? s.alpha[t] < C : s.alpha[t] > 0; };
  const auto low = [&](std::size_t t) { return y[t] > 0 ? s.alpha[t] > 0 : s.alpha[t] < C; };
  const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);

  for (; s.iterations < max_iter; ++s.iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    if (i == n) break;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!low(t)) continue;
      const double score = -y[t] * grad[t];
      gmin = std::min(gmin, score);
      const double b = gmax - score;
      if (b > 0) {
        double a = diag(i) + diag(t) - 2.0 * y[i] * y[t] * q(i, t);
        if (a <= 0) a = kTau;
        if (-(b * b) / a < best) {
          best = -(b * b) / a;
          j = t;
        }
      }
    }
    if (gmax - gmin < eps || j == n) break;

    const double old_i = s.alpha[i], old_j = s.alpha[j];
    if (y[i] != y[j]) {
      double quad = diag(i) + diag(j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double step = (-grad[i] - grad[j]) / quad;
      const double diff = s.alpha[i] - s.alpha[j];
      s.alpha[i] += step;
      s.alpha[j] += step;
      if (diff > 0) {
        if (s.alpha[j] < 0) {
          s.alpha[j] = 0;
          s.alpha[i] = diff;
        }
      } else if (s.alpha[i] < 0) {
        s.alpha[i] = 0;
        s.alpha[j] = -diff;
      }
      if (diff > 0) {
        if (s.alpha[i] > C) {
          s.alpha[i] = C;
          s.alpha[j] = C - diff;
        }
      } else if (s.alpha[j] > C) {
        s.alpha[j] = C;
        s.alpha[i] = C + diff;
      }
    } else {
      double quad = diag(i) + diag(j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double step = (grad[i] - grad[j]) / quad;
      const double sum = s.alpha[i] + s.alpha[j];
      s.alpha[i] -= step;
      s.alpha[j] += step;
      if (sum > C) {
        if (s.alpha[i] > C) {
          s.alpha[i] = C;
          s.alpha[j] = sum - C;
        }
      } else if (s.alpha[j] < 0) {
        s.alpha[j] = 0;
        s.alpha[i] = sum;
      }
      if (sum > C) {
        if (s.alpha[j] > C) {
          s.alpha[j] = C;
          s.alpha[i] = sum - C;
        }
      } else if (s.alpha[i] < 0) {
        s.alpha[i] = 0;
        s.alpha[j] = sum;
      }
    }
    const double di = s.alpha[i] - old_i, dj = s.alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }

  // rho: mean over free variables, else midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (s.alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (s.alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  s.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  for (std::size_t t = 0; t < n; ++t) s.objective += s.alpha[t] * (grad[t] - 1.0) / 2.0;
  return s;
}

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
  std::vector<std::string> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

std::vector<std::size_t> class_indices(const std::vector<std::string>& labels, const std::vector<std::string>& classes) {
  std::vector<std::size_t> out;
  for (const auto& l : labels) {
    out.push_back(static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
  }
  return out;
}

// One machine per pair of classes present in `train`; support indices are
// rows of the gram matrix.
std::vector<BinaryMachine> train_machines(const Eigen::MatrixXd& gram, const std::vector<std::size_t>& train,
                                          const std::vector<std::size_t>& cls, std::size_t n_classes, double C,
                                          double eps) {
  std::vector<std::uint8_t> present(n_classes, 0);
  for (std::size_t r : train) present[cls[r]] = 1;
  std::vector<BinaryMachine> machines;
  for (std::size_t a = 0; a < n_classes; ++a) {
    for (std::size_t b = a + 1; b < n_classes; ++b) {
      if (!present[a] || !present[b]) continue;
      std::vector<std::size_t> rows;
      std::vector<int> y;
      for (std::size_t r : train) {
        if (cls[r] == a || cls[r] == b) {
          rows.push_back(r);
          y.push_back(cls[r] == a ? 1 : -1);
        }
      }
      Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t p = 0; p < rows.size(); ++p) {
        for (std::size_t q = 0; q < rows.size(); ++q) {
          k(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
              gram(static_cast<Eigen::Index>(rows[p]), static_cast<Eigen::Index>(rows[q]));
        }
      }
      const BinarySolution sol = solve_binary(k, y, C, eps);
      BinaryMachine m;
      m.first = a;
      m.second = b;
      m.rho = sol.rho;
      m.objective = sol.objective;
      m.iterations = sol.iterations;
      for (std::size_t p = 0; p < rows.size(); ++p) {
        if (sol.alpha[p] > 0) {
          m.support.push_back(rows[p]);
          m.coef.push_back(sol.alpha[p] * y[p]);
        }
      }
      machines.push_back(std::move(m));
    }
  }
  return machines;
}

// One-vs-one vote; exact ties go to the lower class index.
std::size_t vote(const std::vector<BinaryMachine>& machines, const std::vector<double>& decisions,
                 std::size_t n_classes) {
  std::vector<std::size_t> votes(n_classes, 0);
  for (std::size_t m = 0; m < machines.size(); ++m) {
    ++votes[decisions[m] >= 0 ? machines[m].first : machines[m].second];
  }
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  return d;
}

Eigen::MatrixXd gram_from(const Eigen::MatrixXd& sq, double sigma) {
  if (!(sigma > 0)) throw InputError("sigma must be positive");
  return (-sq.array() / (2.0 * sigma * sigma)).exp().matrix();
}

void check_training_input(const Eigen::MatrixXd& features, const std::vector<std::string>& labels, double C) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InputError("feature rows and labels differ in count");
  }
  if (!(C > 0)) throw InputError("C must be positive");
}

LoocvResult loocv_from_gram(const Eigen::MatrixXd& gram, const std::vector<std::string>& labels,
                            const std::vector<std::string>& classes, const std::vector<std::size_t>& cls,
                            const SvmParams& params) {
  const std::size_t n = labels.size();
  LoocvResult res;
  res.sigma = params.sigma;
  res.C = params.C;
  res.total = n;
  res.predictions.assign(n, {});
  for (std::size_t held = 0; held < n; ++held) {
    std::vector<std::size_t> train;
    for (std::size_t r = 0; r < n; ++r) {
      if (r != held) train.push_back(r);
    }
    const auto machines = train_machines(gram, train, cls, classes.size(), params.C, params.tolerance);
    if (machines.empty()) continue;  // single-class fold
    std::vector<double> decisions;
    for (const auto& m : machines) {
      double f = -m.rho;
      for (std::size_t s = 0; s < m.support.size(); ++s) {
        f += m.coef[s] * gram(static_cast<Eigen::Index>(m.support[s]), static_cast<Eigen::Index>(held));
      }
      decisions.push_back(f);
    }
    res.predictions[held] = classes[vote(machines, decisions, classes.size())];
  }
  for (const auto& c : classes) res.per_class.push_back({c, 0, 0});
  for (std::size_t r = 0; r < n; ++r) {
    auto& pc = res.per_class[cls[r]];
    ++pc.total;
    if (res.predictions[r] == labels[r]) {
      ++pc.correct;
      ++res.correct;
    }
  }
  return res;
}

}  // namespace

double KernelModel::decision(const BinaryMachine& m, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double f = -m.rho;
  for (std::size_t s = 0; s < m.support.size(); ++s) {
    f += m.coef[s] * rbf_kernel(vectors.row(static_cast<Eigen::Index>(m.support[s])).transpose(), x, sigma);
  }
  return f;
}

std::string KernelModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  std::vector<double> decisions;
  for (const auto& m : machines) decisions.push_back(decision(m, x));
  return classes[vote(machines, decisions, classes.size())];
}

std::string KernelModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["kernel"] = "rbf";
  doc["sigma"] = sigma;
  doc["C"] = C;
  doc["classes"] = classes;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
    rows.push_back(std::vector<double>(vectors.row(r).begin(), vectors.row(r).end()));
  }
  doc["vectors"] = std::move(rows);
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const auto& m : machines) {
    ms.push_back({{"positive", classes[m.first]},
                  {"negative", classes[m.second]},
                  {"support", m.support},
                  {"coef", m.coef},
                  {"rho", m.rho}});
  }
  doc["machines"] = std::move(ms);
  return doc.dump(2);
}

KernelModel svm_train(const Eigen::MatrixXd& features, const std::vector<std::string>& labels, const SvmParams& params) {
  check_training_input(features, labels, params.C);
  KernelModel model;
  model.sigma = params.sigma;
  model.C = params.C;
  model.classes = sorted_classes(labels);
  if (model.classes.size() < 2) throw InputError("svm_train needs at least two classes");
  model.vectors = features;
  const auto cls = class_indices(labels, model.classes);
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  model.machines = train_machines(gram_from(squared_distances(features), params.sigma), all, cls,
                                  model.classes.size(), params.C, params.tolerance);
  return model;
}

LoocvResult loocv(const Eigen::MatrixXd& features, const std::vector<std::string>& labels, const SvmParams& params) {
  check_training_input(features, labels, params.C);
  if (labels.size() < 2) throw InputError("loocv needs at least two samples");
  const auto classes = sorted_classes(labels);
  return loocv_from_gram(gram_from(squared_distances(features), params.sigma), labels, classes,
                         class_indices(labels, classes), params);
}

std::vector<double> power_grid(int lo, int hi) {
  std::vector<double> grid;
  for (int e = lo; e <= hi; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

LoocvResult grid_sweep(const Eigen::MatrixXd& features, const std::vector<std::string>& labels,
                       const std::vector<double>& sigma_grid, const std::vector<double>& c_grid, double tolerance) {
  if (sigma_grid.empty() || c_grid.empty()) throw InputError("grid_sweep: empty parameter grid");
  check_training_input(features, labels, *std::min_element(c_grid.begin(), c_grid.end()));
  if (labels.size() < 2) throw InputError("grid_sweep needs at least two samples");
  const auto classes = sorted_classes(labels);
  const auto cls = class_indices(labels, classes);
  const Eigen::MatrixXd sq = squared_distances(features);

  std::vector<std::pair<double, double>> points;  // (sigma, C)
  for (double s : sigma_grid) {
    for (double c : c_grid) points.emplace_back(s, c);
  }
  std::vector<LoocvResult> results(points.size());
  std::map<double, Eigen::MatrixXd> grams;
  for (double s : sigma_grid) grams.emplace(s, gram_from(sq, s));
  parallel_for(points.size(), [&](std::size_t p) {
    results[p] = loocv_from_gram(grams.at(points[p].first), labels, classes, cls,
                                 {points[p].first, points[p].second, tolerance});
  });

  const LoocvResult* best = &results[0];
  for (const auto& r : results) {
    const bool better = r.correct > best->correct ||
                        (r.correct == best->correct && (r.C < best->C || (r.C == best->C && r.sigma < best->sigma)));
    if (better) best = &r;
  }
  return *best;
}

}  // namespace topobar
