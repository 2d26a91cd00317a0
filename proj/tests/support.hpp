#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tical/neural.hpp"

namespace testing {

using tical::nn::Matrix;
using tical::nn::Tensor;

inline Matrix random_matrix(std::mt19937_64& rng, long rows, long cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline bool grad_close(double analytic, double numeric, double rel = 1e-4, double floor = 1e-7) {
  const double err = std::abs(analytic - numeric);
  return err <= floor || err <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

struct GradMismatch {
  std::size_t input = 0;
  long index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences (step 1e-5) of f with respect to every entry of every input.
// Returns the first mismatch, or input == SIZE_MAX when all entries agree.
inline GradMismatch check_gradients(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                                    std::vector<Matrix> values, double step = 1e-5) {
  std::vector<Tensor> params;
  for (auto& v : values) params.push_back(Tensor::parameter(v));
  f(params).backward();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Matrix analytic = params[p].grad();
    for (long i = 0; i < values[p].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> xs;
        for (std::size_t q = 0; q < values.size(); ++q) {
          Matrix v = values[q];
          if (q == p) v.data()[i] += delta;
          xs.push_back(Tensor::constant(v));
        }
        return f(xs).item();
      };
      const double numeric = (eval(step) - eval(-step)) / (2.0 * step);
      if (!grad_close(analytic.data()[i], numeric)) return {p, i, analytic.data()[i], numeric};
    }
  }
  return {static_cast<std::size_t>(-1), 0, 0.0, 0.0};
}

inline std::string describe(const GradMismatch& m) {
  return "input " + std::to_string(m.input) + " entry " + std::to_string(m.index) + ": analytic " +
         std::to_string(m.analytic) + " vs numeric " + std::to_string(m.numeric);
}

inline bool all_match(const GradMismatch& m) { return m.input == static_cast<std::size_t>(-1); }

// Pearson correlation written out directly, for oracle comparisons.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  if (cxx == 0.0 || cyy == 0.0) return 0.0;
  return cxy / std::sqrt(cxx * cyy);
}

// Poincare distance straight from the formula, no shared code with the library.
inline double poincare(const std::vector<double>& p, const std::vector<double>& q) {
  double pp = 0, qq = 0, dd = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pp += p[i] * p[i];
    qq += q[i] * q[i];
    dd += (p[i] - q[i]) * (p[i] - q[i]);
  }
  return std::acosh(1.0 + 2.0 * dd / ((1.0 - pp) * (1.0 - qq)));
}

inline std::vector<double> random_in_ball(std::mt19937_64& rng, std::size_t dim, double max_radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  const double r = max_radius * std::pow(u(rng), 1.0 / static_cast<double>(dim));
  for (auto& x : v) x *= r / n;
  return v;
}

}  // namespace testing

#include "tical/stages.hpp"

namespace testing {

// Late-phase objective on a fixed batch: per-sample weighted task loss minus the
// mean HypCPCC of the three modalities, with fixed pseudo labels.
struct FullLossCase {
  std::array<Matrix, 3> x;
  std::vector<std::size_t> targets;
  std::vector<double> class_weights;
  std::vector<double> kappa;
  std::array<std::vector<double>, 3> tau;
  std::array<std::vector<std::size_t>, 3> pseudo;
  std::vector<double> tree_dist;
  std::size_t n_classes = 0;
};

inline Tensor full_loss(const tical::TicalModel& model, const FullLossCase& c) {
  using namespace tical;
  const StageGraph g = model.forward(c.x);
  Tensor total = task_loss(c.kappa, ep_loss_rows(g, c.targets, c.class_weights),
                           ci_loss_rows(g, c.targets, c.class_weights),
                           ac_loss_rows(g, c.targets, c.class_weights, c.tau));
  for (std::size_t m = 0; m < 3; ++m) {
    const Tensor h = nn::hypcpcc(g.features[m], c.pseudo[m], c.tree_dist, c.n_classes, DistanceKind::kHyperbolic,
                                 model.config().eps_arcosh);
    total = nn::sub(total, nn::scale(h, 1.0 / 3.0));
  }
  return total;
}

struct ModelGradReport {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::string first_failure;
};

// Central differences on every parameter entry of the model against backward().
inline ModelGradReport check_model_gradients(tical::TicalModel& model, const FullLossCase& c, double step = 1e-5) {
  ModelGradReport r;
  for (auto& [name, p] : model.named_parameters()) p.zero_grad();
  full_loss(model, c).backward();
  for (auto& [name, p] : model.named_parameters()) {
    const Matrix analytic = p.grad();
    for (long i = 0; i < p.size(); ++i) {
      double& v = p.mutable_value().data()[i];
      const double saved = v;
      double up, down;
      {
        tical::nn::NoGradGuard guard;
        v = saved + step;
        up = full_loss(model, c).item();
        v = saved - step;
        down = full_loss(model, c).item();
      }
      v = saved;
      const double numeric = (up - down) / (2.0 * step);
      ++r.checked;
      if (!grad_close(analytic.data()[i], numeric)) {
        if (r.failed++ == 0)
          r.first_failure = name + "[" + std::to_string(i) + "]: analytic " + std::to_string(analytic.data()[i]) +
                            " vs numeric " + std::to_string(numeric);
      }
    }
    p.zero_grad();
  }
  return r;
}

inline FullLossCase small_case(std::uint64_t seed, const tical::ModelConfig& cfg, const std::vector<double>& tree_dist) {
  std::mt19937_64 rng(seed);
  FullLossCase c;
  const std::size_t b = 4;
  for (std::size_t m = 0; m < 3; ++m) c.x[m] = random_matrix(rng, b, static_cast<long>(cfg.input_dims[m]), -2, 2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  c.n_classes = cfg.n_classes;
  c.targets = {0, 1, 2, 1};
  c.class_weights = {1.2, 0.7, 1.1};
  for (std::size_t i = 0; i < b; ++i) c.kappa.push_back(u(rng));
  for (auto& t : c.tau)
    for (std::size_t i = 0; i < b; ++i) t.push_back(u(rng));
  c.pseudo = {std::vector<std::size_t>{0, 1, 2, 2}, std::vector<std::size_t>{2, 1, 0, 1},
              std::vector<std::size_t>{0, 0, 2, 1}};
  c.tree_dist = tree_dist;
  return c;
}

}  // namespace testing
