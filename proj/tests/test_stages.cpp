#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

#include "tical/consistency.hpp"
#include "tical/emotree.hpp"
#include "tical/errors.hpp"
#include "tical/stages.hpp"

using namespace tical;
using nn::Matrix;
using nn::Tensor;

namespace {

ModelConfig small(std::size_t k = 3, std::size_t h = 8) {
  ModelConfig c;
  c.input_dims = {5, 3, 4};
  c.hidden = h;
  c.n_classes = k;
  return c;
}

std::array<Matrix, 3> inputs(std::mt19937_64& rng, const ModelConfig& c, long b) {
  return {testing::random_matrix(rng, b, 5, -2, 2), testing::random_matrix(rng, b, 3, -2, 2),
          testing::random_matrix(rng, b, 4, -2, 2)};
}

}  // namespace

TEST_CASE("forward shapes and ball bound") {
  std::mt19937_64 rng(1);
  const auto cfg = small();
  const TicalModel model(cfg, 1);
  const auto g = model.forward(inputs(rng, cfg, 6));
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(g.features[m].rows() == 6);
    CHECK(g.features[m].cols() == 8);
    CHECK(g.ep_logits[m].cols() == 3);
    CHECK(g.ac_logits[m].cols() == 3);
    for (long i = 0; i < 6; ++i) CHECK(g.features[m].value().row(i).norm() <= 1.0 - cfg.eps_boundary);
  }
  CHECK(g.fused.cols() == 8);
  CHECK(g.ci_logits.cols() == 3);
}

TEST_CASE("large inputs stay inside the ball") {
  std::mt19937_64 rng(2);
  const auto cfg = small();
  const TicalModel model(cfg, 2);
  const Tensor f = model.encode(testing::random_matrix(rng, 10, 5, -1e3, 1e3), Modality::kLanguage);
  for (long i = 0; i < 10; ++i) CHECK(f.value().row(i).norm() <= 1.0 - cfg.eps_boundary);
}

TEST_CASE("zero encoder weights map to the origin") {
  const auto cfg = small();
  TicalModel model(cfg, 3);
  for (const char* n : {"enc_v.w1", "enc_v.b1", "enc_v.w2", "enc_v.b2"}) model.parameter(n).mutable_value().setZero();
  std::mt19937_64 rng(3);
  const Tensor f = model.encode(testing::random_matrix(rng, 4, 3), Modality::kVisual);
  CHECK(f.value().isZero(0.0));
}

TEST_CASE("encode rejects bad input") {
  const TicalModel model(small(), 4);
  CHECK_THROWS_AS(model.encode(Matrix::Zero(2, 4), Modality::kLanguage), InvalidInput);
  Matrix x = Matrix::Zero(2, 5);
  x(1, 1) = std::nan("");
  CHECK_THROWS_AS(model.encode(x, Modality::kLanguage), InvalidInput);
}

TEST_CASE("gradient through encode and ball distance") {
  std::mt19937_64 rng(5);
  const auto cfg = small();
  TicalModel model(cfg, 5);
  const Matrix x = testing::random_matrix(rng, 3, 5, -2, 2);
  const Matrix anchor = testing::random_matrix(rng, 3, 8, -0.2, 0.2);
  auto loss = [&] {
    return nn::sum(nn::row_distance(model.encode(x, Modality::kLanguage), Tensor::constant(anchor),
                                    DistanceKind::kHyperbolic, cfg.eps_arcosh));
  };
  loss().backward();
  for (const char* name : {"enc_l.w1", "enc_l.b2"}) {
    Tensor& p = model.parameter(name);
    const Matrix analytic = p.grad();
    for (long i = 0; i < p.size(); ++i) {
      double& v = p.mutable_value().data()[i];
      const double saved = v;
      v = saved + 1e-5;
      const double up = loss().item();
      v = saved - 1e-5;
      const double down = loss().item();
      v = saved;
      CHECK(testing::grad_close(analytic.data()[i], (up - down) / 2e-5));
    }
  }
}

TEST_CASE("CI output is invariant to token order") {
  std::mt19937_64 rng(6);
  ModelConfig cfg = small();
  cfg.input_dims = {4, 4, 4};
  const TicalModel model(cfg, 6);
  std::array<Tensor, 3> t{Tensor::constant(testing::random_matrix(rng, 5, 8, -0.5, 0.5)),
                          Tensor::constant(testing::random_matrix(rng, 5, 8, -0.5, 0.5)),
                          Tensor::constant(testing::random_matrix(rng, 5, 8, -0.5, 0.5))};
  const Matrix a = model.cross_attention(t).value();
  const Matrix b = model.cross_attention({t[2], t[0], t[1]}).value();
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("EP loss with zero logits is ln 2") {
  StageGraph g;
  for (auto& l : g.ep_logits) l = Tensor::constant(Matrix::Zero(3, 2));
  const std::vector<std::size_t> y{0, 1, 1};
  const std::vector<double> w{1.0, 1.0};
  const Tensor rows = ep_loss_rows(g, y, w);
  for (long i = 0; i < 3; ++i) CHECK(rows.value()(i, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("AC weighting by phi(tau)") {
  CHECK(ac_loss({0.4, 0.4, 0.4}, {1, 1, 1}) == doctest::Approx(1.2));
  CHECK(ac_loss({1.0, 2.0, 3.0}, {0, 1, 1}) == doctest::Approx(std::exp(1.0) + 5.0));

  StageGraph g;
  for (auto& l : g.ac_logits) l = Tensor::constant(Matrix::Zero(2, 2));
  const std::vector<std::size_t> y{0, 1};
  const std::vector<double> w{1.0, 1.0};
  const std::array<std::vector<double>, 3> tau{std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0},
                                               std::vector<double>{1.0, 1.0}};
  const Tensor rows = ac_loss_rows(g, y, w, tau);
  CHECK(rows.value()(0, 0) == doctest::Approx((std::exp(1.0) + 2.0) * std::log(2.0)));
  CHECK(rows.value()(1, 0) == doctest::Approx(3.0 * std::log(2.0)));
}

TEST_CASE("task and total loss") {
  CHECK(task_loss(1.0, 2.0, 1.0, 4.0) == 3.0);
  CHECK(task_loss(0.0, 2.0, 1.0, 4.0) == 5.0);
  CHECK(task_loss(0.5, 2.0, 1.0, 4.0) == 4.0);
  CHECK(total_loss(1.0, -0.8, Phase::kEarly) == 1.0);
  CHECK(total_loss(1.0, -0.8, Phase::kLate) == doctest::Approx(0.2));
  CHECK(total_loss(1.0, 0.0, Phase::kLate) == 1.0);

  const std::vector<double> kappa{1.0, 0.0};
  const Tensor ep = Tensor::constant((Matrix(2, 1) << 2.0, 2.0).finished());
  const Tensor ci = Tensor::constant((Matrix(2, 1) << 1.0, 1.0).finished());
  const Tensor ac = Tensor::constant((Matrix(2, 1) << 4.0, 4.0).finished());
  CHECK(task_loss(kappa, ep, ci, ac).item() == doctest::Approx((3.0 + 5.0) / 2.0));
}

TEST_CASE("fusion") {
  const std::array<std::vector<double>, 3> ep{std::vector<double>{1, 0}, std::vector<double>{1, 0},
                                              std::vector<double>{1, 0}};
  const std::array<std::vector<double>, 3> ac{std::vector<double>{0, 1}, std::vector<double>{0, 1},
                                              std::vector<double>{0, 1}};
  const std::vector<double> ci{0, 1};
  const auto f = fuse_predictions(0.5, ep, ci, ac);
  CHECK(f.p_final == std::vector<double>{0.5, 1.5});
  CHECK(f.label == 1);
  const auto one = fuse_predictions(1.0, ep, ci, ac);
  CHECK(one.p_final == std::vector<double>{1.0, 1.0});
  CHECK(one.label == 0);  // tie goes to the lowest class

  const std::vector<double> q{0.2, 0.5, 0.3};
  const std::array<std::vector<double>, 3> qs{q, q, q};
  const auto same = fuse_predictions(0.3, qs, q, qs);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same.p_final[i] == doctest::Approx(2 * q[i]));
  CHECK(same.label == 1);
}

TEST_CASE("property: fusion argmax is scale invariant and kappa shifts weight from AC to EP") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto dist = [&] {
      std::vector<double> v(4);
      double s = 0;
      for (auto& x : v) s += x = u(rng);
      for (auto& x : v) x /= s;
      return v;
    };
    const std::array<std::vector<double>, 3> ep{dist(), dist(), dist()}, ac{dist(), dist(), dist()};
    const auto ci = dist();
    const double k = u(rng);
    const auto f = fuse_predictions(k, ep, ci, ac);
    std::vector<double> scaled = f.p_final;
    for (auto& x : scaled) x *= 3.7;
    CHECK(argmax(scaled) == f.label);
    const auto g = fuse_predictions(std::min(1.0, k + 0.1), ep, ci, ac);
    for (std::size_t c = 0; c < 4; ++c) {
      const double mep = (ep[0][c] + ep[1][c] + ep[2][c]) / 3, mac = (ac[0][c] + ac[1][c] + ac[2][c]) / 3;
      if (mep > mac) CHECK(g.p_final[c] >= f.p_final[c]);
      CHECK(f.p_final[c] >= 0.0);
    }
  }
}

TEST_CASE("inverse frequency weights") {
  const std::vector<std::size_t> y{0, 0, 0, 1};
  const auto w = inverse_frequency_weights(y, 3);
  CHECK(w[1] == doctest::Approx(3.0 * w[0]));
  CHECK((w[0] + w[1]) / 2.0 == doctest::Approx(1.0));
}

TEST_CASE("end-to-end gradient of the late-phase loss (B=4, K=3, h=8)") {
  const auto cfg = small(3, 8);
  TicalModel model(cfg, 10);
  TreeSpec s;
  s.n_classes = 3;
  const auto c = testing::small_case(10, cfg, build_tree(s).all_pairs_distance());
  const auto r = testing::check_model_gradients(model, c);
  INFO(r.first_failure);
  CHECK(r.failed == 0);
  CHECK(r.checked > 500);
}
