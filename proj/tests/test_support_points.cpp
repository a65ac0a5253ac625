#include <doctest.h>

#include <cmath>

#include "sbi/support_points.hpp"

using namespace sbi;

namespace {

SampleMatrix normal_sample(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleMatrix s(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = normal(rng);
  return s;
}

SampleMatrix column(std::initializer_list<double> v) {
  SampleMatrix s(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) s(i++, 0) = x;
  return s;
}

// Direct transcription of the objective with explicit loops.
double objective_loops(const SampleMatrix& x, const SampleMatrix& y) {
  const double n = static_cast<double>(x.rows()), big_n = static_cast<double>(y.rows());
  double cross = 0.0, self = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index m = 0; m < y.rows(); ++m) cross += (y.row(m) - x.row(i)).norm();
    for (Eigen::Index j = 0; j < x.rows(); ++j) self += (x.row(i) - x.row(j)).norm();
  }
  return 2.0 / (n * big_n) * cross - self / (n * n);
}

}  // namespace

TEST_CASE("objective on a hand example") {
  CHECK(sp_objective(column({0.0, 2.0}), column({1.0})) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("objective with one point has no self term") {
  const SampleMatrix y = normal_sample(30, 3, 1);
  SampleMatrix x(1, 3);
  x << 0.2, -0.1, 0.4;
  double expected = 0.0;
  for (Eigen::Index m = 0; m < y.rows(); ++m) expected += (y.row(m) - x.row(0)).norm();
  expected *= 2.0 / 30.0;
  CHECK(sp_objective(x, y) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("objective matches the loop transcription and is translation invariant") {
  const SampleMatrix y = normal_sample(40, 2, 2);
  const SampleMatrix x = normal_sample(7, 2, 3);
  CHECK(sp_objective(x, y) == doctest::Approx(objective_loops(x, y)).epsilon(1e-12));
  Eigen::RowVector2d shift(5.0, -3.0);
  const SampleMatrix xs = x.rowwise() + shift;
  const SampleMatrix ys = y.rowwise() + shift;
  CHECK(sp_objective(xs, ys) == doctest::Approx(sp_objective(x, y)).epsilon(1e-12));
  CHECK_THROWS(sp_objective(SampleMatrix(0, 2), y));
}

TEST_CASE("single-point update is a Weiszfeld step") {
  const SampleMatrix y = normal_sample(25, 3, 4);
  SampleMatrix x(1, 3);
  x << 0.5, 0.5, 0.5;
  Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(3);
  double den = 0.0;
  for (Eigen::Index m = 0; m < y.rows(); ++m) {
    const double w = 1.0 / (y.row(m) - x.row(0)).norm();
    num += w * y.row(m);
    den += w;
  }
  const SampleMatrix next = ccp_step(x, y);
  CHECK((next.row(0) - num / den).norm() < 1e-12);
}

TEST_CASE("update formula with repulsion") {
  const SampleMatrix y = normal_sample(20, 2, 5);
  const SampleMatrix x = normal_sample(3, 2, 6);
  const SampleMatrix next = ccp_step(x, y);
  const double ratio = 20.0 / 3.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(2);
    double den = 0.0;
    for (Eigen::Index m = 0; m < y.rows(); ++m) {
      const double w = 1.0 / std::max((y.row(m) - x.row(i)).norm(), 1e-10);
      num += w * y.row(m);
      den += w;
    }
    for (Eigen::Index j = 0; j < 3; ++j)
      if (j != i) num += ratio * (x.row(i) - x.row(j)) / std::max((x.row(i) - x.row(j)).norm(), 1e-10);
    CHECK((next.row(i) - num / den).norm() < 1e-12);
  }
}

TEST_CASE("a stationary point does not move") {
  const SampleMatrix y = column({-2.0, -1.0, 1.0, 2.0});
  const SampleMatrix x = column({0.0});
  CHECK(std::abs(ccp_step(x, y)(0, 0)) < 1e-10);
}

TEST_CASE("objective never increases over 50 sweeps") {
  for (int d : {1, 2, 5, 10}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SampleMatrix y = normal_sample(400, d, 100 + seed);
      SampleMatrix x = random_subsample(y, 20, seed);
      double prev = sp_objective(x, y);
      for (int it = 0; it < 50; ++it) {
        x = ccp_step(x, y);
        const double cur = sp_objective(x, y);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
      }
    }
  }
}

TEST_CASE("support points beat random subsamples of a normal sample") {
  int wins = 0;
  const int trials = 20;
  for (int s = 0; s < trials; ++s) {
    const SampleMatrix y = normal_sample(10000, 1, 500 + s);
    SpConfig cfg;
    cfg.n = 50;
    cfg.seed = static_cast<std::uint64_t>(s);
    const double sp = sp_objective(support_points(y, cfg).points, y);
    double baseline = 0.0;
    for (int r = 0; r < 100; ++r) baseline += sp_objective(random_subsample(y, 50, 1000 + r), y);
    wins += sp < baseline / 100.0;
  }
  CHECK(wins >= 19);
}

TEST_CASE("one point lands on a median") {
  SpConfig cfg;
  cfg.n = 1;
  cfg.max_iterations = 2000;
  const SpResult r = support_points(column({1.0, 2.0, 3.0, 10.0}), cfg);
  CHECK(r.points(0, 0) >= 2.0 - 1e-6);
  CHECK(r.points(0, 0) <= 3.0 + 1e-6);
}

TEST_CASE("n = N starts at the optimum and stays bounded") {
  const SampleMatrix y = normal_sample(60, 2, 7);
  SpConfig cfg;
  cfg.n = 60;
  cfg.record_objective = true;
  const SpResult r = support_points(y, cfg);
  const double start = r.objective.front();
  Rng rng(8);
  std::normal_distribution<double> normal(0.0, 0.05);
  const SampleMatrix init = random_subsample(y, 60, 0);
  for (int k = 0; k < 10; ++k) {
    SampleMatrix p = init;
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += normal(rng);
    CHECK(start <= sp_objective(p, y));
  }
  CHECK(r.points.rowwise().norm().maxCoeff() <= 2.0 * y.rowwise().norm().maxCoeff());
}

TEST_CASE("rotation and translation carry through") {
  const SampleMatrix y = normal_sample(500, 2, 9);
  const double a = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Eigen::RowVector2d shift(3.0, -1.0);
  const SampleMatrix y2 = (y * rot.transpose()).rowwise() + shift;
  SpConfig cfg;
  cfg.n = 10;
  cfg.seed = 4;
  cfg.tolerance = 1e-10;
  cfg.max_iterations = 1000;
  const SampleMatrix p = support_points(y, cfg).points;
  const SampleMatrix q = support_points(y2, cfg).points;
  const SampleMatrix expected = (p * rot.transpose()).rowwise() + shift;
  CHECK((q - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("iteration cap reports non-convergence") {
  const SampleMatrix y = normal_sample(1000, 2, 10);
  SpConfig cfg;
  cfg.n = 30;
  cfg.max_iterations = 2;
  const SpResult r = support_points(y, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
  CHECK(r.points.rows() == 30);
}

TEST_CASE("random subsample draws distinct rows") {
  SampleMatrix y(50, 1);
  for (int i = 0; i < 50; ++i) y(i, 0) = i;
  const SampleMatrix s = random_subsample(y, 50, 3);
  std::vector<double> v(s.data(), s.data() + 50);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 50; ++i) CHECK(v[static_cast<std::size_t>(i)] == i);
  CHECK_THROWS(random_subsample(y, 51, 3));
  SpConfig bad;
  bad.n = 0;
  CHECK_THROWS(support_points(y, bad));
}
