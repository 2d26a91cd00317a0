#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tical/anchors.hpp"
#include "tical/ballgeom.hpp"
#include "tical/neural.hpp"

namespace tical {

struct ModelConfig {
  std::array<std::size_t, 3> input_dims{32, 16, 16};
  std::size_t hidden = 64;  // encoder width, ball dimension and attention width
  std::size_t n_classes = 7;
  double eps_boundary = 1e-5;
  double eps_arcosh = 1e-12;
  // Encoder outputs are tangent vectors clipped to this norm before the exponential
  // map, keeping features a bounded distance 2 * feature_clip from the origin.
  double feature_clip = 3.0;

  void validate() const;
  BallConfig ball() const { return {hidden, eps_boundary, eps_arcosh}; }
};

// Graph handles for one forward pass over a batch (rows = samples).
struct StageGraph {
  std::array<nn::Tensor, 3> features;  // f_m on the ball, B x h
  std::array<nn::Tensor, 3> tangent;   // log map of f_m at the origin, fed to the heads
  std::array<nn::Tensor, 3> ep_logits;
  nn::Tensor fused;                    // cross-attention output, B x h
  nn::Tensor ci_logits;
  std::array<nn::Tensor, 3> ac_logits;
};

// Per-sample probability vectors of every stage, and the fused score.
struct StageOutputs {
  std::array<std::vector<double>, 3> p_ep;
  std::vector<double> p_ci;
  std::array<std::vector<double>, 3> p_ac;
  std::vector<double> p_final;
  std::size_t y_ep = 0;  // argmax of the mean EP distribution
  std::size_t y_ci = 0;
  std::size_t y_ac = 0;  // argmax of the mean AC distribution
  std::size_t y_final = 0;
};

// Three-stage model: per-modality encoders into the Poincare ball, unimodal EP
// heads, a cross-attention CI stage and per-modality AC heads on [fused, f_m].
class TicalModel {
 public:
  TicalModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // Encodes a B x d_m batch. Throws InvalidInput on width mismatch or non-finite input.
  nn::Tensor encode(const nn::Matrix& x, Modality m) const;
  StageGraph forward(const std::array<nn::Matrix, 3>& inputs) const;

  // Cross attention over the three modality tokens followed by mean pooling.
  nn::Tensor cross_attention(const std::array<nn::Tensor, 3>& tokens) const;

  std::vector<std::pair<std::string, nn::Tensor>>& named_parameters() { return params_; }
  const std::vector<std::pair<std::string, nn::Tensor>>& named_parameters() const { return params_; }
  std::vector<nn::Tensor> parameters() const;
  nn::Tensor& parameter(const std::string& name);
  const nn::Tensor& parameter(const std::string& name) const;

 private:
  nn::Tensor& add_param(std::string name, nn::Matrix value);

  ModelConfig config_;
  std::vector<std::pair<std::string, nn::Tensor>> params_;
};

// ---- losses ------------------------------------------------------------------

// Per-sample mean over modalities of class-weighted CE of the EP heads, B x 1.
nn::Tensor ep_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                        std::span<const double> class_weights);
nn::Tensor ci_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                        std::span<const double> class_weights);
// Per-sample sum_m phi(tau_m) * CE_m; `tau[m][i]` is sample i's typicality in modality m.
nn::Tensor ac_loss_rows(const StageGraph& g, std::span<const std::size_t> targets,
                        std::span<const double> class_weights,
                        const std::array<std::vector<double>, 3>& tau);

// mean_i(kappa_i * ep_i + ci_i + (1 - kappa_i) * ac_i)
nn::Tensor task_loss(std::span<const double> kappa, const nn::Tensor& ep_rows, const nn::Tensor& ci_rows,
                     const nn::Tensor& ac_rows);

// Scalar forms.
double task_loss(double kappa, double l_ep, double l_ci, double l_ac);

enum class Phase { kEarly, kLate };
// Early: task. Late: task + hyp where hyp is the (already negated) HypCPCC loss.
double total_loss(double task, double hyp, Phase phase);

// L_AC = sum_m phi(tau_m) * L_AC^m for scalar per-head losses.
double ac_loss(const std::array<double, 3>& head_losses, const std::array<double, 3>& tau);

// ---- inference ---------------------------------------------------------------

struct FusedPrediction {
  std::vector<double> p_final;
  std::size_t label = 0;
};

// kappa * mean(p_ep) + p_ci + (1 - kappa) * mean(p_ac); ties go to the lowest class.
FusedPrediction fuse_predictions(double kappa, const std::array<std::vector<double>, 3>& p_ep,
                                 std::span<const double> p_ci,
                                 const std::array<std::vector<double>, 3>& p_ac);

std::size_t argmax(std::span<const double> v);

// Inverse class frequency, normalised to mean 1 over the classes that occur.
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t n_classes);

}  // namespace tical
