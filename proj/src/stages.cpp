#include "tical/stages.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "tical/consistency.hpp"
#include "tical/errors.hpp"

namespace tical {

using nn::Matrix;
using nn::Tensor;

void ModelConfig::validate() const {
  for (auto d : input_dims)
    if (d == 0) throw InvalidSpec("model input dimensions must be positive");
  if (hidden == 0) throw InvalidSpec("model hidden width must be positive");
  if (n_classes < 2) throw InvalidSpec("model needs at least 2 classes");
  if (!(feature_clip > 0.0) || !std::isfinite(feature_clip)) throw InvalidSpec("feature_clip must be positive");
  ball().validate();
}


TicalModel::TicalModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto h = static_cast<nn::Index>(config_.hidden);
  const auto k = static_cast<nn::Index>(config_.n_classes);
  auto weight = [&](nn::Index r, nn::Index c) { return nn::glorot_uniform(r, c, rng); };
  auto bias = [](nn::Index c) { return Matrix::Zero(1, c).eval(); };

  for (auto m : kModalities) {
    const std::string tag(modality_tag(m));
    const auto d = static_cast<nn::Index>(config_.input_dims[static_cast<std::size_t>(m)]);
    add_param("enc_" + tag + ".w1", weight(d, h));
    add_param("enc_" + tag + ".b1", bias(h));
    add_param("enc_" + tag + ".w2", weight(h, h));
    add_param("enc_" + tag + ".b2", bias(h));
  }
  for (auto m : kModalities) {
    const std::string tag(modality_tag(m));
    add_param("ep_" + tag + ".w", weight(h, k));
    add_param("ep_" + tag + ".b", bias(k));
  }
  add_param("ci.wq", weight(h, h));
  add_param("ci.wk", weight(h, h));
  add_param("ci.wv", weight(h, h));
  add_param("ci.w1", weight(h, h));
  add_param("ci.b1", bias(h));
  add_param("ci.w2", weight(h, k));
  add_param("ci.b2", bias(k));
  for (auto m : kModalities) {
    const std::string tag(modality_tag(m));
    add_param("ac_" + tag + ".w1", weight(2 * h, h));
    add_param("ac_" + tag + ".b1", bias(h));
    add_param("ac_" + tag + ".w2", weight(h, k));
    add_param("ac_" + tag + ".b2", bias(k));
  }
}

Tensor& TicalModel::add_param(std::string name, Matrix value) {
  params_.emplace_back(std::move(name), Tensor::parameter(std::move(value)));
  return params_.back().second;
}

Tensor& TicalModel::parameter(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).parameter(name));
}

const Tensor& TicalModel::parameter(const std::string& name) const {
  for (const auto& [n, t] : params_)
    if (n == name) return t;
  throw InvalidInput("model has no parameter '" + name + "'");
}

std::vector<Tensor> TicalModel::parameters() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [n, t] : params_) out.push_back(t);
  return out;
}

Tensor TicalModel::encode(const Matrix& x, Modality m) const {
  const auto idx = static_cast<std::size_t>(m);
  if (x.cols() != static_cast<nn::Index>(config_.input_dims[idx]))
    throw InvalidInput("encode: modality '" + std::string(modality_tag(m)) + "' expects width " +
                       std::to_string(config_.input_dims[idx]) + ", got " + std::to_string(x.cols()));
  if (!x.allFinite()) throw InvalidInput("encode: non-finite input features");
  const std::string tag(modality_tag(m));
  Tensor hidden = nn::tanh(nn::linear(Tensor::constant(x), parameter("enc_" + tag + ".w1"),
                                      parameter("enc_" + tag + ".b1")));
  Tensor pre = nn::linear(hidden, parameter("enc_" + tag + ".w2"), parameter("enc_" + tag + ".b2"));
  Tensor tangent = nn::clip_rows(pre, config_.feature_clip);
  return nn::project_rows_to_ball(nn::exp_map_rows(tangent), config_.ball());
}

Tensor TicalModel::cross_attention(const std::array<Tensor, 3>& tokens) const {
  Tensor seq = nn::interleave_rows({tokens[0], tokens[1], tokens[2]});
  Tensor q = nn::matmul(seq, parameter("ci.wq"));
  Tensor k = nn::matmul(seq, parameter("ci.wk"));
  Tensor v = nn::matmul(seq, parameter("ci.wv"));
  return nn::group_mean(nn::group_attention(q, k, v, 3), 3);
}

StageGraph TicalModel::forward(const std::array<Matrix, 3>& inputs) const {
  StageGraph g;
  for (auto m : kModalities) {
    const auto i = static_cast<std::size_t>(m);
    const std::string tag(modality_tag(m));
    g.features[i] = encode(inputs[i], m);
    g.tangent[i] = nn::log_map_rows(g.features[i]);
    g.ep_logits[i] = nn::linear(g.tangent[i], parameter("ep_" + tag + ".w"), parameter("ep_" + tag + ".b"));
  }
  g.fused = cross_attention(g.tangent);
  Tensor ci_hidden = nn::relu(nn::linear(g.fused, parameter("ci.w1"), parameter("ci.b1")));
  g.ci_logits = nn::linear(ci_hidden, parameter("ci.w2"), parameter("ci.b2"));
  for (auto m : kModalities) {
    const auto i = static_cast<std::size_t>(m);
    const std::string tag(modality_tag(m));
    Tensor joint = nn::concat_cols({g.fused, g.tangent[i]});
    Tensor hidden = nn::relu(nn::linear(joint, parameter("ac_" + tag + ".w1"), parameter("ac_" + tag + ".b1")));
    g.ac_logits[i] = nn::linear(hidden, parameter("ac_" + tag + ".w2"), parameter("ac_" + tag + ".b2"));
  }
  return g;
}

// ---- losses --------------------------------------------------------------------

Tensor ep_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                    std::span<const double> class_weights) {
  Tensor total = nn::cross_entropy_rows(g.ep_logits[0], targets, class_weights);
  total = nn::add(total, nn::cross_entropy_rows(g.ep_logits[1], targets, class_weights));
  total = nn::add(total, nn::cross_entropy_rows(g.ep_logits[2], targets, class_weights));
  return nn::scale(total, 1.0 / 3.0);
}

Tensor ci_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                    std::span<const double> class_weights) {
  return nn::cross_entropy_rows(g.ci_logits, targets, class_weights);
}

Tensor ac_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                    std::span<const double> class_weights, const std::array<std::vector<double>, 3>& tau) {
  Tensor total;
  for (std::size_t m = 0; m < 3; ++m) {
    if (tau[m].size() != targets.size()) throw InvalidInput("ac_loss: typicality count != batch size");
    std::vector<double> phi(tau[m].size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = unimodal_weight(tau[m][i]);
    Tensor term = nn::scale_rows(nn::cross_entropy_rows(g.ac_logits[m], targets, class_weights), phi);
    total = total.defined() ? nn::add(total, term) : term;
  }
  return total;
}

Tensor task_loss(std::span<const double> kappa, const Tensor& ep_rows, const Tensor& ci_rows,
                 const Tensor& ac_rows) {
  std::vector<double> rest(kappa.size());
  for (std::size_t i = 0; i < kappa.size(); ++i) rest[i] = 1.0 - kappa[i];
  Tensor per_sample = nn::add(nn::add(nn::scale_rows(ep_rows, kappa), ci_rows), nn::scale_rows(ac_rows, rest));
  return nn::mean(per_sample);
}

double task_loss(double kappa, double l_ep, double l_ci, double l_ac) {
  return kappa * l_ep + l_ci + (1.0 - kappa) * l_ac;
}

double total_loss(double task, double hyp, Phase phase) { return phase == Phase::kEarly ? task : task + hyp; }

double ac_loss(const std::array<double, 3>& head_losses, const std::array<double, 3>& tau) {
  double s = 0.0;
  for (std::size_t m = 0; m < 3; ++m) s += unimodal_weight(tau[m]) * head_losses[m];
  return s;
}

// ---- inference -------------------------------------------------------------------

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

FusedPrediction fuse_predictions(double kappa, const std::array<std::vector<double>, 3>& p_ep,
                                 std::span<const double> p_ci, const std::array<std::vector<double>, 3>& p_ac) {
  const std::size_t k = p_ci.size();
  for (std::size_t m = 0; m < 3; ++m)
    if (p_ep[m].size() != k || p_ac[m].size() != k) throw InvalidInput("fuse_predictions: class counts differ");
  FusedPrediction out;
  out.p_final.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double ep = (p_ep[0][c] + p_ep[1][c] + p_ep[2][c]) / 3.0;
    const double ac = (p_ac[0][c] + p_ac[1][c] + p_ac[2][c]) / 3.0;
    out.p_final[c] = kappa * ep + p_ci[c] + (1.0 - kappa) * ac;
  }
  out.label = argmax(out.p_final);
  return out;
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t n_classes) {
  std::vector<double> counts(n_classes, 0.0);
  for (auto y : labels) {
    if (y >= n_classes) throw InvalidInput("class weights: label out of range");
    counts[y] += 1.0;
  }
  std::vector<double> w(n_classes, 0.0);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] > 0) {
      w[c] = 1.0 / counts[c];
      sum += w[c];
      ++present;
    }
  if (present == 0) throw InvalidInput("class weights: no labels");
  for (auto& x : w) x *= static_cast<double>(present) / sum;
  return w;
}

}  // namespace tical
