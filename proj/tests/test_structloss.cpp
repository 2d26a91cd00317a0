#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

#include "tical/errors.hpp"
#include "tical/structloss.hpp"

using namespace tical;

namespace {

BallConfig cfg(std::size_t dim) {
  BallConfig c;
  c.dimension = dim;
  return c;
}

// Points on a line through the origin at hyperbolic distance r_i from it.
// For 1-d points on the same side, pair distances are |r_i - r_j|.
BallPoint on_axis(double r, std::size_t dim = 2) {
  std::vector<double> v(dim, 0.0);
  v[0] = std::tanh(r / 2.0);
  return BallPoint::checked(v, cfg(dim));
}

double oracle(const PairBatch& b, const EmotionTree& t) {
  std::vector<double> dt, db;
  for (std::size_t i = 0; i < b.features.size(); ++i)
    for (std::size_t j = i + 1; j < b.features.size(); ++j) {
      dt.push_back(t.distance(b.labels[i], b.labels[j]));
      std::vector<double> p(b.features[i].coords().begin(), b.features[i].coords().end());
      std::vector<double> q(b.features[j].coords().begin(), b.features[j].coords().end());
      db.push_back(testing::poincare(p, q));
    }
  return testing::pearson(dt, db);
}

EmotionTree chain(std::size_t k) {
  TreeSpec s;
  s.n_classes = k;
  return build_tree(s);
}

}  // namespace

TEST_CASE("chain labels placed along a geodesic give correlation +1") {
  // Class c sits at hyperbolic radius 0.3 * c: ball distances are 0.3 * d_T.
  const auto t = chain(5);
  PairBatch b;
  for (std::size_t c : {0, 1, 2, 3, 4, 2}) {
    b.features.push_back(on_axis(0.3 * static_cast<double>(c) + 0.1));
    b.labels.push_back(c);
  }
  CHECK(std::abs(hypcpcc(b, t) - 1.0) <= 1e-9);
}

TEST_CASE("anti-affine placement gives -1") {
  // Star tree: same label at distance 0, different labels at 2. Pairs (0,1), (0,2), (1,2)
  // have d_T = (0, 2, 2); points at signed radii -1, +1, 0 give d_B = (2, 1, 1) = 2 - d_T / 2.
  TreeSpec s;
  s.scheme = TreeScheme::kFlatStar;
  s.n_classes = 3;
  const auto star = build_tree(s);
  PairBatch r;
  r.features = {on_axis(-1.0), on_axis(1.0), on_axis(0.0)};
  r.labels = {0, 0, 1};
  const double v = hypcpcc(r, star);
  CHECK(std::abs(v + 1.0) <= 1e-9);
  CHECK(v == doctest::Approx(oracle(r, star)).epsilon(1e-12));
}

TEST_CASE("degenerate batches give zero") {
  const auto t = chain(3);
  PairBatch same;
  same.features = {on_axis(0.1), on_axis(0.5), on_axis(0.9)};
  same.labels = {1, 1, 1};
  CHECK(hypcpcc(same, t) == 0.0);
  std::array<PairBatch, 3> all{same, same, same};
  CHECK(hypcpcc_loss(all, t) == 0.0);

  PairBatch aligned;
  for (std::size_t c : {0, 1, 2}) {
    aligned.features.push_back(on_axis(0.5 * static_cast<double>(c)));
    aligned.labels.push_back(c);
  }
  CHECK(hypcpcc_loss({aligned, aligned, aligned}, t) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(hypcpcc_loss({aligned, same, same}, t) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("batch validation") {
  const auto t = chain(3);
  PairBatch one;
  one.features = {on_axis(0.1)};
  one.labels = {0};
  CHECK_THROWS_AS(hypcpcc(one, t), InvalidInput);
  PairBatch bad;
  bad.features = {on_axis(0.1), on_axis(0.2)};
  bad.labels = {0, 5};
  CHECK_THROWS_AS(hypcpcc(bad, t), InvalidInput);
}

TEST_CASE("property: matches brute-force Pearson and stays within [-1, 1]") {
  std::mt19937_64 rng(21);
  const auto t = build_tree([] {
    TreeSpec s;
    s.scheme = TreeScheme::kPolarityHierarchy;
    return s;
  }());
  for (int trial = 0; trial < 50; ++trial) {
    PairBatch b;
    const std::size_t n = 2 + rng() % 14;
    for (std::size_t i = 0; i < n; ++i) {
      b.features.push_back(BallPoint::checked(testing::random_in_ball(rng, 6, 0.95), cfg(6)));
      b.labels.push_back(rng() % 7);
    }
    const double v = hypcpcc(b, t);
    CHECK(std::abs(v) <= 1.0);
    CHECK(std::abs(v - oracle(b, t)) <= 1e-9);
  }
}

TEST_CASE("property: invariant under scaling the tree weights") {
  std::mt19937_64 rng(8);
  TreeSpec s;
  s.scheme = TreeScheme::kPolarityHierarchy;
  const auto t1 = build_tree(s);
  std::vector<double> w;
  for (const auto& e : t1.edges()) w.push_back(e.weight * 3.7);
  s.weights = w;
  const auto t2 = build_tree(s);
  for (int trial = 0; trial < 20; ++trial) {
    PairBatch b;
    for (int i = 0; i < 10; ++i) {
      b.features.push_back(BallPoint::checked(testing::random_in_ball(rng, 4, 0.9), cfg(4)));
      b.labels.push_back(rng() % 7);
    }
    CHECK(std::abs(hypcpcc(b, t1) - hypcpcc(b, t2)) < 1e-9);
  }
}

TEST_CASE("kernel gradient matches central differences (B=8, dim=8)") {
  std::mt19937_64 rng(13);
  const auto t = chain(4);
  const auto td = t.all_pairs_distance();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f;
    for (int i = 0; i < 8; ++i) {
      const auto p = testing::random_in_ball(rng, 8, 0.9);
      f.insert(f.end(), p.begin(), p.end());
    }
    std::vector<std::size_t> labels;
    for (int i = 0; i < 8; ++i) labels.push_back(rng() % 4);
    labels[0] = 0;
    labels[1] = 3;
    auto value = [&](const std::vector<double>& feats) {
      CpccKernel k{feats, 8, labels, td, 4};
      return k.value();
    };
    std::vector<double> grad(f.size(), 0.0);
    CpccKernel k{f, 8, labels, td, 4};
    k.accumulate_grad(1.0, grad);
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto fp = f, fm = f;
      fp[i] += 1e-5;
      fm[i] -= 1e-5;
      const double num = (value(fp) - value(fm)) / 2e-5;
      CHECK(testing::grad_close(grad[i], num));
    }
  }
}

TEST_CASE("degenerate kernel leaves the gradient untouched") {
  const auto t = chain(3);
  const auto td = t.all_pairs_distance();
  const std::vector<double> f{0.1, 0.0, 0.2, 0.1, -0.3, 0.2};
  const std::vector<std::size_t> labels{2, 2, 2};
  std::vector<double> grad(6, 0.0);
  CpccKernel{f, 2, labels, td, 3}.accumulate_grad(1.0, grad);
  for (double g : grad) CHECK(g == 0.0);
}
