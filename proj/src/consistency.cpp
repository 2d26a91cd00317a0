#include "tical/consistency.hpp"

#include <algorithm>
#include <cmath>

#include "tical/errors.hpp"

namespace tical {

void ConsistencyParams::validate(std::size_t n_classes) const {
  if (!(t > 0.0)) throw InvalidSpec("consistency temperature t must be positive");
  if (!(k >= 0.0)) throw InvalidSpec("consistency scaling k must be non-negative");
  if (!(rho > 0.0)) throw InvalidSpec("consistency density rho must be positive");
  if (label_scale.size() != n_classes)
    throw InvalidSpec("label_scale must define a score for every class");
}

std::vector<double> ordinal_label_scale(std::size_t n_classes) {
  std::vector<double> s(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) s[c] = ordinal_score(c, n_classes);
  return s;
}

std::vector<double> categorical_label_scale(const EmotionTree& tree) {
  std::vector<double> s(tree.n_classes());
  for (std::size_t c = 0; c < s.size(); ++c) s[c] = tree.polarity(c) * tree.depth(c);
  return s;
}

double typicality(double d, std::span<const double> batch) {
  if (batch.empty()) throw InvalidInput("typicality: empty batch");
  if (std::find(batch.begin(), batch.end(), d) == batch.end())
    throw InvalidInput("typicality: distance is not a member of the batch");
  const auto [lo, hi] = std::minmax_element(batch.begin(), batch.end());
  const double spread = *hi - *lo;
  if (spread < 1e-12) return 1.0;
  return std::clamp((*hi - d) / spread, 0.0, 1.0);
}

std::vector<double> batch_typicality(std::span<const double> batch) {
  if (batch.empty()) throw InvalidInput("typicality: empty batch");
  const auto [lo, hi] = std::minmax_element(batch.begin(), batch.end());
  const double spread = *hi - *lo;
  std::vector<double> out(batch.size(), 1.0);
  if (spread < 1e-12) return out;
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = std::clamp((*hi - batch[i]) / spread, 0.0, 1.0);
  return out;
}

double label_discrepancy(std::size_t y_l, std::size_t y_v, std::size_t y_a,
                         const ConsistencyParams& params) {
  const auto& scale = params.label_scale;
  if (y_l >= scale.size() || y_v >= scale.size() || y_a >= scale.size())
    throw InvalidInput("label_discrepancy: label without a score");
  const double s_l = scale[y_l];
  const double s_v = scale[y_v];
  const double s_a = scale[y_a];
  const double mu = (s_l + s_v + s_a) / 3.0;
  const double third = params.printed_discrepancy ? std::abs(s_v - mu) : std::abs(s_a - mu);
  const double dev = (std::abs(s_l - mu) + std::abs(s_v - mu) + third) / 3.0;
  return std::pow(dev, params.rho);
}

double consistency(double tau_l, double tau_v, double tau_a, double d_label,
                   const ConsistencyParams& params) {
  const double typ = std::pow(tau_l * tau_v * tau_a, params.t);
  return std::clamp(std::sqrt(typ * std::exp(-params.k * d_label)), 0.0, 1.0);
}

double unimodal_weight(double tau) { return std::exp(1.0 - tau); }

std::vector<ConsistencyReport> estimate_batch(const std::array<std::vector<double>, 3>& distances,
                                              const std::array<std::vector<std::size_t>, 3>& labels,
                                              const ConsistencyParams& params) {
  const std::size_t b = distances[0].size();
  for (std::size_t m = 0; m < 3; ++m)
    if (distances[m].size() != b || labels[m].size() != b)
      throw InvalidInput("estimate_batch: modality batches differ in length");
  std::array<std::vector<double>, 3> tau;
  for (std::size_t m = 0; m < 3; ++m) tau[m] = batch_typicality(distances[m]);
  std::vector<ConsistencyReport> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    auto& r = out[i];
    for (std::size_t m = 0; m < 3; ++m) r.modality[m] = {distances[m][i], tau[m][i], labels[m][i]};
    r.d_label = label_discrepancy(labels[0][i], labels[1][i], labels[2][i], params);
    r.kappa = consistency(tau[0][i], tau[1][i], tau[2][i], r.d_label, params);
  }
  return out;
}

}  // namespace tical
