#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tical/ballgeom.hpp"

// Minimal tape-free reverse-mode differentiation over dense row-major matrices.
// A Tensor is a cheap handle to a graph node; ops build new nodes that keep their
// inputs alive, and backward() walks the graph in reverse topological order.
namespace tical::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix value);
  // Leaf that accumulates gradients across backward() calls until zero_grad().
  static Tensor parameter(Matrix value);

  bool defined() const { return static_cast<bool>(node_); }
  Index rows() const;
  Index cols() const;
  Index size() const { return rows() * cols(); }
  const Matrix& value() const;
  Matrix& mutable_value();
  // Zero matrix of the value's shape when nothing has been accumulated.
  Matrix grad() const;
  bool requires_grad() const;
  const std::string& op() const;
  double item() const;  // value of a 1x1 tensor

  void zero_grad();
  // Seeds d(this)/d(this) = 1 on a 1x1 tensor and propagates to every input.
  void backward() const;

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// While alive, ops on this thread record no backward closures (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Row-wise softmax of a plain matrix.
Matrix softmax(const Matrix& logits);

// ---- elementwise / linear algebra ------------------------------------------
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_row(const Tensor& a, const Tensor& row);  // broadcast a 1 x n row over a
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor scale(const Tensor& a, double c);
Tensor scale_rows(const Tensor& a, std::span<const double> coeffs);  // row i times coeffs[i]
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// ---- shape ------------------------------------------------------------------
Tensor concat_cols(const std::vector<Tensor>& parts);
// Stacks equally shaped B x h parts into (B * n) x h with row i*n + m = parts[m].row(i).
Tensor interleave_rows(const std::vector<Tensor>& parts);
// Mean over consecutive groups of `group` rows: (B * group) x h -> B x h.
Tensor group_mean(const Tensor& a, Index group);

// ---- attention --------------------------------------------------------------
// Single-head scaled dot-product attention applied independently to each block of
// `group` consecutive rows. Scale is 1 / sqrt(cols).
Tensor group_attention(const Tensor& q, const Tensor& k, const Tensor& v, Index group);
// Row-stochastic attention weights for the blocks of (q, k): (B * group) x group.
Matrix attention_weights(const Matrix& q, const Matrix& k, Index group);

// ---- losses -----------------------------------------------------------------
// Per-row class-weighted cross entropy: w[y_i] * -log softmax(logits_i)[y_i], B x 1.
Tensor cross_entropy_rows(const Tensor& logits, std::span<const std::size_t> targets,
                          std::span<const double> class_weights);
// Batch mean of cross_entropy_rows.
Tensor weighted_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets,
                              std::span<const double> class_weights);

// ---- hyperbolic -------------------------------------------------------------
Tensor project_rows_to_ball(const Tensor& a, const BallConfig& cfg);
// Row-wise distance between p and q, B x 1.
Tensor clip_rows(const Tensor& a, double max_norm);  // radial clip of each row
Tensor exp_map_rows(const Tensor& a);  // origin exponential map, rows land in the unit ball
Tensor log_map_rows(const Tensor& a);  // tangent vectors at the origin
Tensor row_distance(const Tensor& p, const Tensor& q, DistanceKind kind, double eps_arcosh);
// Pearson correlation of tree vs feature distances over the rows of `features`.
Tensor hypcpcc(const Tensor& features, std::span<const std::size_t> labels,
               std::span<const double> tree_dist, std::size_t n_classes, DistanceKind kind,
               double eps_arcosh);

// ---- initialisation / optimisation -----------------------------------------
// Uniform in +-sqrt(6 / (rows + cols)).
Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng);

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  // Applies one update from the accumulated gradients, then zeroes them.
  void step();
  void zero_grad();

  double learning_rate() const { return options_.learning_rate; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  const AdamOptions& options() const { return options_; }
  const AdamState& state() const { return state_; }
  void restore(AdamState state);

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  AdamState state_;
};

}  // namespace tical::nn
