#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbi/metrics.hpp"

using namespace sbi;

namespace {

SampleMatrix column(std::initializer_list<double> v) {
  SampleMatrix s(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) s(i++, 0) = x;
  return s;
}

SampleMatrix normal_sample(int n, int d, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(mean, sd);
  SampleMatrix s(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = normal(rng);
  return s;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("median heuristic on small sets") {
  CHECK(median_heuristic(column({0.0, 1.0})) == 1.0);
  CHECK(median_heuristic(column({0.0, 1.0, 3.0})) == 2.0);
  // duplicates contribute zero distances, which are excluded
  CHECK(median_heuristic(column({0.0, 0.0, 1.0})) == 1.0);
  CHECK_THROWS(median_heuristic(column({2.0, 2.0})));
}

TEST_CASE("median heuristic scales with the data") {
  const SampleMatrix s = normal_sample(100, 3, 0.0, 1.0, 1);
  CHECK(median_heuristic(2.5 * s) == doctest::Approx(2.5 * median_heuristic(s)).epsilon(1e-12));
}

TEST_CASE("mmd2 hand value and identities") {
  CHECK(mmd2(column({0.0}), column({1.0})) == doctest::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-14));
  const SampleMatrix a = normal_sample(300, 2, 0.0, 1.0, 2);
  CHECK(mmd2(a, a) == 0.0);
  CHECK_THROWS_AS(mmd2(a, normal_sample(10, 3, 0.0, 1.0, 3)), DimensionError);
}

TEST_CASE("mmd2 between independent draws of one distribution is small") {
  CHECK(mmd2(normal_sample(5000, 1, 0.0, 1.0, 4), normal_sample(5000, 1, 0.0, 1.0, 5)) < 0.005);
}

TEST_CASE("ed2 hand value, identity and symmetry") {
  CHECK(ed2(column({0.0, 2.0}), column({1.0})) == doctest::Approx(1.0).epsilon(1e-15));
  const SampleMatrix a = normal_sample(200, 3, 0.0, 1.0, 6);
  const SampleMatrix b = normal_sample(150, 3, 0.5, 1.0, 7);
  CHECK(ed2(a, a) == 0.0);
  CHECK(ed2(a, b) == doctest::Approx(ed2(b, a)).epsilon(1e-12));
  CHECK(mmd2(a, b) == doctest::Approx(mmd2(b, a)).epsilon(1e-12));
}

TEST_CASE("distances are permutation invariant and non-negative") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const SampleMatrix a = normal_sample(20, 2, 0.0, 1.0, 100 + t);
    const SampleMatrix b = normal_sample(25, 2, 0.1, 1.2, 200 + t);
    SampleMatrix p = a;
    std::vector<Eigen::Index> order(20);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i = 0; i < 20; ++i) p.row(i) = a.row(order[static_cast<std::size_t>(i)]);
    CHECK(mmd2(p, b) == doctest::Approx(mmd2(a, b)).epsilon(1e-12));
    CHECK(ed2(p, b) == doctest::Approx(ed2(a, b)).epsilon(1e-12));
    CHECK(mmd2(a, b) >= 0.0);
    CHECK(ed2(a, b) >= 0.0);
  }
}

TEST_CASE("c2st on samples of the same distribution is near chance") {
  const double acc = c2st(normal_sample(1000, 1, 0.0, 1.0, 9), normal_sample(1000, 1, 0.0, 1.0, 10), 1);
  CHECK(acc >= 0.45);
  CHECK(acc <= 0.55);
}

TEST_CASE("c2st on unit-shifted normals approaches the Bayes rate") {
  // Phi(0.5)
  const double bayes = 0.5 * std::erfc(-0.5 / std::sqrt(2.0));
  const double acc = c2st(normal_sample(5000, 1, 0.0, 1.0, 11), normal_sample(5000, 1, 1.0, 1.0, 12), 2);
  CHECK(std::abs(acc - bayes) <= 0.03);
}

TEST_CASE("c2st separates disjoint supports") {
  Rng rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleMatrix a(500, 2), b(500, 2);
  for (int i = 0; i < 500; ++i)
    for (int j = 0; j < 2; ++j) {
      a(i, j) = u(rng);
      b(i, j) = 10.0 + u(rng);
    }
  CHECK(c2st(a, b, 3) >= 0.99);
}

TEST_CASE("c2st is deterministic and validates its inputs") {
  const SampleMatrix a = normal_sample(200, 2, 0.0, 1.0, 14);
  const SampleMatrix b = normal_sample(200, 2, 0.3, 1.0, 15);
  CHECK(c2st(a, b, 7) == c2st(a, b, 7));
  CHECK_THROWS(c2st(a.topRows(49), b, 7));
  CHECK_THROWS(c2st(normal_sample(600, 2, 0.0, 1.0, 1), normal_sample(55, 2, 0.0, 1.0, 2), 7));
}

TEST_CASE("quantile interpolates between order statistics") {
  Vec v(5);
  v << 4.0, 0.0, 3.0, 1.0, 2.0;
  CHECK(quantile(v, 0.0) == 0.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.0);
  CHECK(quantile(v, 0.15) == doctest::Approx(0.6));
  CHECK_THROWS(quantile(v, 1.5));
}

TEST_CASE("loc_disp at a point mass on the truth") {
  Vec truth(2);
  truth << 0.3, -0.2;
  SampleMatrix s(10, 2);
  s.rowwise() = truth.transpose();
  const LocDispReport r = loc_disp(s, truth, Vec::Constant(2, 2.0));
  CHECK(r.m1 == 0.0);
  CHECK(r.m2 == 0.0);
  CHECK(r.m3 == 0.0);
  CHECK(r.m4 == 0.0);
}

TEST_CASE("loc_disp on a uniform sample") {
  Rng rng(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleMatrix s(20000, 1);
  for (int i = 0; i < 20000; ++i) s(i, 0) = u(rng);
  const LocDispReport r = loc_disp(s, Vec::Constant(1, 0.5), Vec::Ones(1));
  CHECK(r.m1 < 0.02);
  CHECK(r.m2 < 0.02);
  CHECK(std::abs(r.m3 - std::sqrt(1.0 / 12.0)) < 0.01);
  CHECK(std::abs(r.m4 - 0.70) < 0.03);
  const LocDispReport h = loc_disp(s, Vec::Constant(1, 0.5), Vec::Constant(1, 2.0));
  CHECK(h.m1 == doctest::Approx(r.m1 / 2));
  CHECK(h.m2 == doctest::Approx(r.m2 / 2));
  CHECK(h.m3 == doctest::Approx(r.m3 / 2));
  CHECK(h.m4 == doctest::Approx(r.m4 / 2));
}

TEST_CASE("loc_disp hand values") {
  SampleMatrix s(4, 2);
  s << 0.0, 0.0, 1.0, 2.0, 2.0, 4.0, 3.0, 6.0;
  Vec truth(2);
  truth << 0.0, 0.0;
  Vec ranges(2);
  ranges << 1.0, 2.0;
  const LocDispReport r = loc_disp(s, truth, ranges);
  // medians (1.5, 3), means (1.5, 3); scaled (1.5, 1.5)
  CHECK(r.m1 == doctest::Approx(std::sqrt(4.5)));
  CHECK(r.m2 == doctest::Approx(std::sqrt(4.5)));
  // sample SD of {0,1,2,3} is sqrt(5/3); scaled it is the same in both dims
  CHECK(r.m3 == doctest::Approx(std::sqrt(5.0 / 3.0)));
  // q0.85 - q0.15 of {0,1,2,3}: 2.55 - 0.45
  CHECK(r.m4 == doctest::Approx(2.1));
}

TEST_CASE("mmd2 and ed2 rank approximations alike") {
  // reference: 0.5 N(0, 0.1^2) + 0.5 N(0, 1)
  Rng rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleMatrix ref(500, 1);
  for (int i = 0; i < 500; ++i) ref(i, 0) = (u(rng) < 0.5 ? 0.1 : 1.0) * normal(rng);
  std::vector<double> m, e;
  for (int k = 0; k < 50; ++k) {
    const double shift = 1.5 * u(rng);
    const double scale = 0.3 + 1.5 * u(rng);
    SampleMatrix approx(500, 1);
    for (int i = 0; i < 500; ++i) approx(i, 0) = shift + scale * (u(rng) < 0.5 ? 0.1 : 1.0) * normal(rng);
    m.push_back(mmd2(approx, ref));
    e.push_back(ed2(approx, ref));
  }
  CHECK(spearman(m, e) > 0.4);
}
