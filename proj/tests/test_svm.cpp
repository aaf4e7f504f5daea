#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "topobar/svm.hpp"

using namespace topobar;

namespace {

struct Blobs {
  Eigen::MatrixXd x;
  std::vector<std::string> y;
};

Blobs blobs(std::uint64_t seed, int per_class, double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  Blobs b{Eigen::MatrixXd(2 * per_class, 2), {}};
  for (int i = 0; i < 2 * per_class; ++i) {
    const double c = i % 2 ? separation : -separation;
    b.x(i, 0) = c + g(rng);
    b.x(i, 1) = g(rng);
    b.y.push_back(i % 2 ? "pos" : "neg");
  }
  return b;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

}  // namespace

TEST_CASE("rbf kernel") {
  const Eigen::VectorXd u = vec({1, 2, 3});
  CHECK(rbf_kernel(u, u, 0.7) == 1.0);
  const double sigma = 0.8;
  const Eigen::VectorXd v = u + vec({sigma * std::sqrt(2.0), 0, 0});
  CHECK(rbf_kernel(u, v, sigma) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(rbf_kernel(u, v, 1e6) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rbf_kernel(u, v, 0.0), InputError);
  CHECK_THROWS_AS(rbf_kernel(u, v, -1.0), InputError);
  CHECK_THROWS_AS(rbf_kernel(u, vec({1}), 1.0), InputError);
}

TEST_CASE("kernel matrix is positive semidefinite") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x(25, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    Eigen::MatrixXd k(25, 25);
    for (int i = 0; i < 25; ++i) {
      for (int j = 0; j < 25; ++j) k(i, j) = rbf_kernel(x.row(i).transpose(), x.row(j).transpose(), 1.5);
    }
    CHECK((k - k.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("two-point problem matches the hand-solved dual") {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  const KernelModel m = svm_train(x, {"A", "B"}, {1.0, 1e6, 1e-3});
  REQUIRE(m.machines.size() == 1);
  // Dual optimum: alpha = 1 / (1 - K12) with K12 = exp(-2); rho = 0.
  const double alpha = 1.0 / (1.0 - std::exp(-2.0));
  const auto& bm = m.machines[0];
  REQUIRE(bm.coef.size() == 2);
  CHECK(std::abs(bm.coef[0]) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(std::abs(bm.coef[1]) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(std::abs(bm.rho) <= 1e-9);
  CHECK(std::abs(m.decision(bm, vec({0.0}))) <= 1e-9);
  CHECK(m.decision(bm, vec({-1.0})) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.predict(vec({-1.0})) == "A");
  CHECK(m.predict(vec({1.0})) == "B");
  CHECK(m.predict(vec({-0.1})) == "A");
  CHECK(m.predict(vec({0.1})) == "B");
}

TEST_CASE("conflicting duplicates still train") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 0, 3, 3;
  const std::vector<std::string> y{"a", "b", "a", "b"};
  const KernelModel m = svm_train(x, y, {1.0, 10.0, 1e-3});
  CHECK(std::isfinite(m.machines[0].objective));
  CHECK(loocv(x, y, {1.0, 10.0, 1e-3}).accuracy() < 1.0);
}

TEST_CASE("separable blobs are fit perfectly") {
  const Blobs b = blobs(5, 10, 2.0);
  const KernelModel m = svm_train(b.x, b.y, {1.0, 100.0, 1e-3});
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) CHECK(m.predict(b.x.row(i).transpose()) == b.y[i]);
  CHECK(loocv(blobs(9, 20, 2.0).x, blobs(9, 20, 2.0).y, {1.0, 10.0, 1e-3}).accuracy() >= 0.95);
}

TEST_CASE("swapping labels negates the decision function") {
  const Blobs b = blobs(13, 8, 1.0);
  std::vector<std::string> swapped;
  for (const auto& l : b.y) swapped.push_back(l == "pos" ? "neg" : "pos");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  // At the default tolerance the two solver paths differ slightly, so signs
  // are compared away from the boundary; a tight tolerance pins the values.
  const KernelModel m = svm_train(b.x, b.y, {0.8, 5.0, 1e-3});
  const KernelModel s = svm_train(b.x, swapped, {0.8, 5.0, 1e-3});
  const KernelModel mt = svm_train(b.x, b.y, {0.8, 5.0, 1e-10});
  const KernelModel st = svm_train(b.x, swapped, {0.8, 5.0, 1e-10});
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd p = vec({u(rng), u(rng)});
    const double dm = m.decision(m.machines[0], p), ds = s.decision(s.machines[0], p);
    if (std::abs(dm) > 0.01) CHECK((dm > 0) == (ds < 0));
    CHECK(mt.decision(mt.machines[0], p) == doctest::Approx(-st.decision(st.machines[0], p)).epsilon(1e-6));
  }
}

TEST_CASE("multiclass one-vs-one") {
  Eigen::MatrixXd x(9, 1);
  x << 0, 0.1, 0.2, 5, 5.1, 5.2, 10, 10.1, 10.2;
  const std::vector<std::string> y{"c", "c", "c", "a", "a", "a", "b", "b", "b"};
  const KernelModel m = svm_train(x, y, {1.0, 10.0, 1e-3});
  CHECK(m.classes == std::vector<std::string>{"a", "b", "c"});
  CHECK(m.machines.size() == 3);
  CHECK(m.predict(vec({0.05})) == "c");
  CHECK(m.predict(vec({5.05})) == "a");
  CHECK(m.predict(vec({10.05})) == "b");
  CHECK(m.to_json().find("\"sigma\"") != std::string::npos);
  CHECK_THROWS_AS(svm_train(x, std::vector<std::string>(9, "a"), {1.0, 1.0, 1e-3}), InputError);
  CHECK_THROWS_AS(svm_train(x, y, {1.0, 0.0, 1e-3}), InputError);
}

TEST_CASE("training is reproducible") {
  const Blobs b = blobs(17, 10, 0.5);
  const KernelModel m1 = svm_train(b.x, b.y, {1.0, 3.0, 1e-3});
  const KernelModel m2 = svm_train(b.x, b.y, {1.0, 3.0, 1e-3});
  CHECK(m1.to_json() == m2.to_json());
}

TEST_CASE("loocv degenerate folds") {
  Eigen::MatrixXd x(6, 1);
  x << 0, 0.1, 0.2, 0.3, 0.4, 10;
  const std::vector<std::string> y{"a", "a", "a", "a", "a", "b"};
  const LoocvResult r = loocv(x, y, {1.0, 10.0, 1e-3});
  CHECK(r.correct == 5);
  CHECK(r.accuracy() == doctest::Approx(5.0 / 6.0));
  CHECK(r.predictions[5].empty());
  REQUIRE(r.per_class.size() == 2);
  CHECK(r.per_class[0].label == "a");
  CHECK(r.per_class[0].accuracy() == 1.0);
  CHECK(r.per_class[1].accuracy() == 0.0);

  Eigen::MatrixXd two(2, 1);
  two << 0, 1;
  CHECK(loocv(two, {"a", "b"}, {1.0, 1.0, 1e-3}).accuracy() == 0.0);
  CHECK_THROWS_AS(loocv(two.topRows(1), {"a"}, {1.0, 1.0, 1e-3}), InputError);
}

TEST_CASE("loocv is invariant under sample permutation") {
  const Blobs b = blobs(19, 12, 1.0);
  const LoocvResult base = loocv(b.x, b.y, {1.0, 4.0, 1e-3});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(b.x.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd x(b.x.rows(), b.x.cols());
    std::vector<std::string> y;
    for (std::size_t i = 0; i < order.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = b.x.row(order[i]);
      y.push_back(b.y[static_cast<std::size_t>(order[i])]);
    }
    CHECK(loocv(x, y, {1.0, 4.0, 1e-3}).correct == base.correct);
  }
}

TEST_CASE("grid sweep") {
  CHECK(power_grid(-2, 1) == std::vector<double>{0.25, 0.5, 1.0, 2.0});
  const Blobs b = blobs(23, 10, 2.0);

  const LoocvResult single = grid_sweep(b.x, b.y, {2.0}, {8.0});
  CHECK(single.sigma == 2.0);
  CHECK(single.C == 8.0);
  CHECK(single.correct == loocv(b.x, b.y, {2.0, 8.0, 1e-3}).correct);

  const auto sigmas = power_grid(-2, 3), cs = power_grid(-1, 4);
  const LoocvResult best = grid_sweep(b.x, b.y, sigmas, cs);
  for (double s : sigmas) {
    for (double c : cs) CHECK(best.correct >= loocv(b.x, b.y, {s, c, 1e-3}).correct);
  }
  // The winner is the smallest C, then smallest sigma, among the best.
  for (double s : sigmas) {
    for (double c : cs) {
      if (loocv(b.x, b.y, {s, c, 1e-3}).correct != best.correct) continue;
      CHECK((c > best.C || (c == best.C && s >= best.sigma)));
    }
  }
  std::vector<double> rs(sigmas.rbegin(), sigmas.rend()), rc(cs.rbegin(), cs.rend());
  const LoocvResult reversed = grid_sweep(b.x, b.y, rs, rc);
  CHECK(reversed.sigma == best.sigma);
  CHECK(reversed.C == best.C);
  CHECK_THROWS_AS(grid_sweep(b.x, b.y, {}, cs), InputError);
}
