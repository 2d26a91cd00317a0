#include "tical/neural.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tical/errors.hpp"
#include "tical/structloss.hpp"

namespace tical::nn {

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  bool leaf = true;
  std::string op;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(const Node&)> backward;

  Matrix& grad_buffer() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
  }
};

}  // namespace detail

using detail::Node;

namespace {

thread_local bool g_grad_enabled = true;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_shape(bool ok, const std::string& op, const std::string& detail) {
  if (!ok) throw InvalidInput(op + ": shape mismatch (" + detail + ")");
}

// Builds a node from already computed values. `backward` receives the finished
// node and must push node.grad into the inputs that require gradients.
Tensor make(std::string op, Matrix value, std::vector<Tensor> inputs,
            std::function<void(const Node&)> backward) {
  if (!value.allFinite()) throw NumericalError("non-finite value produced by op '" + op + "'");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = std::move(op);
  n->leaf = false;
  if (g_grad_enabled) {
    for (auto& t : inputs) {
      n->requires_grad = n->requires_grad || t.requires_grad();
      n->inputs.push_back(t.node());
    }
  }
  if (n->requires_grad) n->backward = std::move(backward);
  return Tensor(std::move(n));
}

Node& in(const Node& n, std::size_t i) { return *n.inputs[i]; }

void accumulate(Node& target, const Matrix& g) {
  if (!target.requires_grad) return;
  target.grad_buffer() += g;
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---- Tensor ------------------------------------------------------------------

Tensor Tensor::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  return Tensor(std::move(n));
}

Tensor Tensor::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "parameter";
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Index Tensor::rows() const { return node_->value.rows(); }
Index Tensor::cols() const { return node_->value.cols(); }
const Matrix& Tensor::value() const { return node_->value; }
Matrix& Tensor::mutable_value() { return node_->value; }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
const std::string& Tensor::op() const { return node_->op; }

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw InvalidInput("item() on a " + shape(value()) + " tensor");
  return node_->value(0, 0);
}

void Tensor::zero_grad() {
  if (node_->grad.size() != 0) node_->grad.setZero();
}

void Tensor::backward() const {
  if (rows() != 1 || cols() != 1) throw InvalidInput("backward() needs a 1x1 tensor");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs before outputs).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : order)
    if (!n->leaf) n->grad = Matrix::Zero(n->value.rows(), n->value.cols());
  node_->grad_buffer()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) {
      n->backward(*n);
      for (const auto& input : n->inputs)
        if (input->requires_grad && !input->grad.allFinite())
          throw NumericalError("non-finite gradient flowing out of op '" + n->op + "'");
    }
  }
}

// ---- elementwise / linear algebra ---------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_shape(a.cols() == b.rows(), "matmul", shape(a.value()) + " * " + shape(b.value()));
  return make("matmul", a.value() * b.value(), {a, b}, [](const Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    if (x.requires_grad) x.grad_buffer().noalias() += n.grad * y.value.transpose();
    if (y.requires_grad) y.grad_buffer().noalias() += x.value.transpose() * n.grad;
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add",
              shape(a.value()) + " + " + shape(b.value()));
  return make("add", a.value() + b.value(), {a, b}, [](const Node& n) {
    accumulate(in(n, 0), n.grad);
    accumulate(in(n, 1), n.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub",
              shape(a.value()) + " - " + shape(b.value()));
  return make("sub", a.value() - b.value(), {a, b}, [](const Node& n) {
    accumulate(in(n, 0), n.grad);
    accumulate(in(n, 1), -n.grad);
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  check_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row",
              shape(a.value()) + " + " + shape(row.value()));
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return make("add_row", std::move(out), {a, row}, [](const Node& n) {
    accumulate(in(n, 0), n.grad);
    Node& r = in(n, 1);
    if (r.requires_grad) r.grad_buffer() += n.grad.colwise().sum();
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

Tensor scale(const Tensor& a, double c) {
  return make("scale", a.value() * c, {a}, [c](const Node& n) { accumulate(in(n, 0), n.grad * c); });
}

Tensor scale_rows(const Tensor& a, std::span<const double> coeffs) {
  check_shape(static_cast<Index>(coeffs.size()) == a.rows(), "scale_rows",
              std::to_string(coeffs.size()) + " coefficients for " + shape(a.value()));
  Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), static_cast<Index>(coeffs.size()));
  Matrix out = c.asDiagonal() * a.value();
  Eigen::VectorXd cc = c;
  return make("scale_rows", std::move(out), {a}, [cc](const Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) x.grad_buffer() += cc.asDiagonal() * n.grad;
  });
}

Tensor tanh(const Tensor& a) {
  Matrix out = a.value().array().tanh().matrix();
  return make("tanh", std::move(out), {a}, [](const Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad)
      x.grad_buffer().array() += n.grad.array() * (1.0 - n.value.array().square());
  });
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return make("relu", std::move(out), {a}, [](const Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad)
      x.grad_buffer().array() += (x.value.array() > 0.0).cast<double>() * n.grad.array();
  });
}

namespace {

Matrix softmax_of(const Matrix& z) {
  Matrix p(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    double s = 0.0;
    for (Index j = 0; j < z.cols(); ++j) s += (p(i, j) = std::exp(z(i, j) - mx));
    p.row(i) /= s;
  }
  return p;
}

}  // namespace

Matrix softmax(const Matrix& logits) { return softmax_of(logits); }

Tensor softmax_rows(const Tensor& a) {
  return make("softmax", softmax_of(a.value()), {a}, [](const Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    const Matrix& p = n.value;
    Eigen::VectorXd dot = (n.grad.array() * p.array()).rowwise().sum();
    Matrix g = p.array() * (n.grad.colwise() - dot).array();
    x.grad_buffer() += g;
  });
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return make("sum", std::move(out), {a}, [](const Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) x.grad_buffer().array() += n.grad(0, 0);
  });
}

Tensor mean(const Tensor& a) {
  const double count = static_cast<double>(a.size());
  if (count == 0) throw InvalidInput("mean of an empty tensor");
  return scale(sum(a), 1.0 / count);
}

// ---- shape --------------------------------------------------------------------

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: no inputs");
  Index cols = 0;
  for (const auto& p : parts) {
    check_shape(p.rows() == parts[0].rows(), "concat_cols", "row counts differ");
    cols += p.cols();
  }
  Matrix out(parts[0].rows(), cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make("concat", std::move(out), parts, [](const Node& n) {
    Index off = 0;
    for (const auto& input : n.inputs) {
      if (input->requires_grad) input->grad_buffer() += n.grad.middleCols(off, input->value.cols());
      off += input->value.cols();
    }
  });
}

Tensor interleave_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidInput("interleave_rows: no inputs");
  const Index b = parts[0].rows();
  const Index h = parts[0].cols();
  const Index g = static_cast<Index>(parts.size());
  for (const auto& p : parts)
    check_shape(p.rows() == b && p.cols() == h, "interleave_rows", "parts differ in shape");
  Matrix out(b * g, h);
  for (Index i = 0; i < b; ++i)
    for (Index m = 0; m < g; ++m) out.row(i * g + m) = parts[m].value().row(i);
  return make("interleave", std::move(out), parts, [](const Node& n) {
    const Index g = static_cast<Index>(n.inputs.size());
    for (Index m = 0; m < g; ++m) {
      Node& x = *n.inputs[m];
      if (!x.requires_grad) continue;
      auto& buf = x.grad_buffer();
      for (Index i = 0; i < buf.rows(); ++i) buf.row(i) += n.grad.row(i * g + m);
    }
  });
}

Tensor group_mean(const Tensor& a, Index group) {
  check_shape(group > 0 && a.rows() % group == 0, "group_mean",
              shape(a.value()) + " by group " + std::to_string(group));
  const Index b = a.rows() / group;
  Matrix out = Matrix::Zero(b, a.cols());
  for (Index i = 0; i < b; ++i) {
    for (Index m = 0; m < group; ++m) out.row(i) += a.value().row(i * group + m);
    out.row(i) /= static_cast<double>(group);
  }
  return make("group_mean", std::move(out), {a}, [group](const Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    auto& buf = x.grad_buffer();
    for (Index r = 0; r < buf.rows(); ++r) buf.row(r) += n.grad.row(r / group) / static_cast<double>(group);
  });
}

// ---- attention ----------------------------------------------------------------

Matrix attention_weights(const Matrix& q, const Matrix& k, Index group) {
  check_shape(q.rows() == k.rows() && q.cols() == k.cols() && group > 0 && q.rows() % group == 0,
              "attention", shape(q) + " vs " + shape(k));
  const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix out(q.rows(), group);
  for (Index base = 0; base < q.rows(); base += group) {
    Matrix scores = q.middleRows(base, group) * k.middleRows(base, group).transpose() * s;
    out.middleRows(base, group) = softmax_of(scores);
  }
  return out;
}

Tensor group_attention(const Tensor& q, const Tensor& k, const Tensor& v, Index group) {
  check_shape(v.rows() == q.rows(), "attention", "value rows differ from query rows");
  Matrix weights = attention_weights(q.value(), k.value(), group);
  Matrix out(q.rows(), v.cols());
  for (Index base = 0; base < q.rows(); base += group)
    out.middleRows(base, group) = weights.middleRows(base, group) * v.value().middleRows(base, group);
  return make("attention", std::move(out), {q, k, v}, [weights, group](const Node& n) {
    Node& qn = in(n, 0);
    Node& kn = in(n, 1);
    Node& vn = in(n, 2);
    const double s = 1.0 / std::sqrt(static_cast<double>(qn.value.cols()));
    for (Index base = 0; base < n.value.rows(); base += group) {
      const auto a = weights.middleRows(base, group);
      const auto d_out = n.grad.middleRows(base, group);
      if (vn.requires_grad) vn.grad_buffer().middleRows(base, group).noalias() += a.transpose() * d_out;
      Matrix d_a = d_out * vn.value.middleRows(base, group).transpose();
      Eigen::VectorXd dot = (d_a.array() * a.array()).rowwise().sum();
      Matrix d_s = a.array() * (d_a.colwise() - dot).array();
      if (qn.requires_grad)
        qn.grad_buffer().middleRows(base, group).noalias() += s * d_s * kn.value.middleRows(base, group);
      if (kn.requires_grad)
        kn.grad_buffer().middleRows(base, group).noalias() +=
            s * d_s.transpose() * qn.value.middleRows(base, group);
    }
  });
}

// ---- losses -------------------------------------------------------------------

Tensor cross_entropy_rows(const Tensor& logits, std::span<const std::size_t> targets,
                          std::span<const double> class_weights) {
  const Index b = logits.rows();
  const Index k = logits.cols();
  check_shape(static_cast<Index>(targets.size()) == b, "cross_entropy",
              std::to_string(targets.size()) + " targets for " + shape(logits.value()));
  check_shape(static_cast<Index>(class_weights.size()) == k, "cross_entropy",
              std::to_string(class_weights.size()) + " class weights for " + std::to_string(k) + " classes");
  for (auto t : targets)
    if (static_cast<Index>(t) >= k) throw InvalidInput("cross_entropy: target index out of range");
  Matrix p = softmax_of(logits.value());
  Matrix out(b, 1);
  std::vector<double> w(b);
  for (Index i = 0; i < b; ++i) {
    const auto& z = logits.value();
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    w[i] = class_weights[targets[i]];
    out(i, 0) = w[i] * (lse - z(i, static_cast<Index>(targets[i])));
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make("cross_entropy", std::move(out), {logits},
              [p = std::move(p), w = std::move(w), tgt = std::move(tgt)](const Node& n) {
                Node& x = in(n, 0);
                if (!x.requires_grad) return;
                auto& buf = x.grad_buffer();
                for (Index i = 0; i < p.rows(); ++i) {
                  const double g = n.grad(i, 0) * w[i];
                  buf.row(i) += g * p.row(i);
                  buf(i, static_cast<Index>(tgt[i])) -= g;
                }
              });
}

Tensor weighted_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets,
                              std::span<const double> class_weights) {
  return mean(cross_entropy_rows(logits, targets, class_weights));
}

// ---- hyperbolic ---------------------------------------------------------------

namespace {

Tensor clip_norm(const Tensor& a, double r, const char* op) {
  Matrix out = a.value();
  Eigen::VectorXd norms = a.value().rowwise().norm();
  for (Index i = 0; i < out.rows(); ++i)
    if (norms(i) > r) out.row(i) *= r / norms(i);
  return make(op, std::move(out), {a}, [norms, r](const Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    auto& buf = x.grad_buffer();
    for (Index i = 0; i < buf.rows(); ++i) {
      const double nm = norms(i);
      if (nm > r) {
        const auto xi = x.value.row(i);
        const double proj = xi.dot(n.grad.row(i)) / (nm * nm);
        buf.row(i) += (r / nm) * (n.grad.row(i) - proj * xi);
      } else {
        buf.row(i) += n.grad.row(i);
      }
    }
  });
}

// Row-wise x -> g(|x|) x with gradient g I + (g'(r)/r) x x^T.
Tensor radial_map(const Tensor& a, const char* op, const Eigen::VectorXd& g, const Eigen::VectorXd& dg) {
  Matrix out = a.value();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) *= g(i);
  return make(op, std::move(out), {a}, [g, dg](const Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    auto& buf = x.grad_buffer();
    for (Index i = 0; i < buf.rows(); ++i) {
      const auto xi = x.value.row(i);
      buf.row(i) += g(i) * n.grad.row(i) + (dg(i) * xi.dot(n.grad.row(i))) * xi;
    }
  });
}

}  // namespace

Tensor project_rows_to_ball(const Tensor& a, const BallConfig& cfg) {
  check_shape(a.cols() == static_cast<Index>(cfg.dimension), "project_to_ball",
              shape(a.value()) + " for dimension " + std::to_string(cfg.dimension));
  return clip_norm(a, cfg.max_norm(), "project_to_ball");
}

Tensor clip_rows(const Tensor& a, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidInput("clip_rows: max_norm must be positive");
  return clip_norm(a, max_norm, "clip_rows");
}

Tensor exp_map_rows(const Tensor& a) {
  const Index n = a.rows();
  Eigen::VectorXd g(n);
  Eigen::VectorXd dg(n);
  for (Index i = 0; i < n; ++i) {
    const double r = a.value().row(i).norm();
    if (r < 1e-4) {
      const double r2 = r * r;
      g(i) = 1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 15.0;
      dg(i) = -2.0 / 3.0 + 8.0 * r2 / 15.0;
    } else {
      const double t = std::tanh(r);
      g(i) = t / r;
      dg(i) = ((1.0 - t * t) - g(i)) / (r * r);
    }
  }
  return radial_map(a, "exp_map", g, dg);
}

// Logarithmic map at the origin, row-wise: x -> artanh(|x|) x / |x|.
Tensor log_map_rows(const Tensor& a) {
  const Index n = a.rows();
  Eigen::VectorXd g(n);
  Eigen::VectorXd dg(n);
  for (Index i = 0; i < n; ++i) {
    const double r = a.value().row(i).norm();
    if (r >= 1.0) throw NumericalError("log_map: row " + std::to_string(i) + " outside the unit ball");
    if (r < 1e-4) {
      const double r2 = r * r;
      g(i) = 1.0 + r2 / 3.0 + r2 * r2 / 5.0;
      dg(i) = 2.0 / 3.0 + 4.0 * r2 / 5.0;
    } else {
      g(i) = std::atanh(r) / r;
      dg(i) = (1.0 / (1.0 - r * r) - g(i)) / (r * r);
    }
  }
  return radial_map(a, "log_map", g, dg);
}

Tensor row_distance(const Tensor& p, const Tensor& q, DistanceKind kind, double eps_arcosh) {
  check_shape(p.rows() == q.rows() && p.cols() == q.cols(), "row_distance",
              shape(p.value()) + " vs " + shape(q.value()));
  const auto h = static_cast<std::size_t>(p.cols());
  Matrix out(p.rows(), 1);
  for (Index i = 0; i < p.rows(); ++i)
    out(i, 0) = distance(kind, {p.value().row(i).data(), h}, {q.value().row(i).data(), h});
  return make("ball_distance", std::move(out), {p, q}, [kind, eps_arcosh, h](const Node& n) {
    Node& pn = in(n, 0);
    Node& qn = in(n, 1);
    Matrix gp = Matrix::Zero(pn.value.rows(), pn.value.cols());
    Matrix gq = gp;
    for (Index i = 0; i < gp.rows(); ++i) {
      std::span<const double> pi{pn.value.row(i).data(), h};
      std::span<const double> qi{qn.value.row(i).data(), h};
      std::span<double> gpi{gp.row(i).data(), h};
      std::span<double> gqi{gq.row(i).data(), h};
      if (kind == DistanceKind::kHyperbolic)
        ball_distance_grad(pi, qi, eps_arcosh, n.grad(i, 0), gpi, gqi);
      else
        euclidean_distance_grad(pi, qi, n.grad(i, 0), gpi, gqi);
    }
    accumulate(pn, gp);
    accumulate(qn, gq);
  });
}

Tensor hypcpcc(const Tensor& features, std::span<const std::size_t> labels,
               std::span<const double> tree_dist, std::size_t n_classes, DistanceKind kind,
               double eps_arcosh) {
  check_shape(static_cast<Index>(labels.size()) == features.rows(), "hypcpcc",
              std::to_string(labels.size()) + " labels for " + shape(features.value()));
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  std::vector<double> dist(tree_dist.begin(), tree_dist.end());
  const auto dim = static_cast<std::size_t>(features.cols());
  const auto& fv = features.value();
  CpccKernel kernel{{fv.data(), static_cast<std::size_t>(fv.size())}, dim, lab, dist, n_classes,
                    kind, eps_arcosh};
  Matrix out(1, 1);
  out(0, 0) = kernel.value();
  return make("hypcpcc", std::move(out), {features},
              [lab = std::move(lab), dist = std::move(dist), dim, n_classes, kind,
               eps_arcosh](const Node& n) {
                Node& x = in(n, 0);
                if (!x.requires_grad) return;
                CpccKernel k{{x.value.data(), static_cast<std::size_t>(x.value.size())}, dim, lab, dist,
                             n_classes, kind, eps_arcosh};
                auto& buf = x.grad_buffer();
                k.accumulate_grad(n.grad(0, 0), {buf.data(), static_cast<std::size_t>(buf.size())});
              });
}

// ---- initialisation / optimisation ------------------------------------------

Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    state_.first.push_back(Matrix::Zero(p.rows(), p.cols()));
    state_.second.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step() {
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Matrix g = params_[i].grad();
    auto& m = state_.first[i];
    auto& v = state_.second[i];
    m = options_.beta1 * m + (1.0 - options_.beta1) * g;
    v = options_.beta2 * v + (1.0 - options_.beta2) * g.cwiseProduct(g);
    params_[i].mutable_value().array() -=
        options_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.eps);
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::restore(AdamState state) {
  if (state.first.size() != params_.size() || state.second.size() != params_.size())
    throw InvalidInput("optimizer state does not match the parameter list");
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (state.first[i].rows() != params_[i].rows() || state.first[i].cols() != params_[i].cols() ||
        state.second[i].rows() != params_[i].rows() || state.second[i].cols() != params_[i].cols())
      throw InvalidInput("optimizer moment shape mismatch");
  state_ = std::move(state);
}

}  // namespace tical::nn
