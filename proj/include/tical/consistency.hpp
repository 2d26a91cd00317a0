#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tical/emotree.hpp"

namespace tical {

struct ConsistencyParams {
  double t = 0.2;    // temperature on the typicality product
  double k = 0.5;    // scaling of the label discrepancy
  double rho = 4.0;  // density exponent of the discrepancy
  // Numeric score of each class used by the label discrepancy.
  std::vector<double> label_scale;
  // Reproduce the discrepancy exactly as typeset (visual deviation counted twice,
  // acoustic omitted). Off by default.
  bool printed_discrepancy = false;

  void validate(std::size_t n_classes) const;
};

// k - (K-1)/2 for each class (K=7 gives -3..+3).
std::vector<double> ordinal_label_scale(std::size_t n_classes);
// polarity(c) * depth(c) below the tree root.
std::vector<double> categorical_label_scale(const EmotionTree& tree);

// (max D - d) / (max D - min D); 1 when the batch spread is below 1e-12.
// Throws InvalidInput if d is not an element of `batch`.
double typicality(double d, std::span<const double> batch);
// Typicality of every element of the batch.
std::vector<double> batch_typicality(std::span<const double> batch);

double label_discrepancy(std::size_t y_l, std::size_t y_v, std::size_t y_a,
                         const ConsistencyParams& params);

// sqrt((tau_l tau_v tau_a)^t * exp(-k d_label))
double consistency(double tau_l, double tau_v, double tau_a, double d_label,
                   const ConsistencyParams& params);

// exp(1 - tau)
double unimodal_weight(double tau);

struct ModalityEstimate {
  double distance = 0.0;     // d_m, distance to the nearest anchor
  double typicality = 1.0;   // tau_m
  std::size_t pseudo_label = 0;
};

struct ConsistencyReport {
  std::array<ModalityEstimate, 3> modality{};  // l, v, a
  double d_label = 0.0;
  double kappa = 0.0;
};

// Builds per-sample reports from per-modality nearest-anchor results of one batch.
// distances[m][i], labels[m][i] for modality m and sample i.
std::vector<ConsistencyReport> estimate_batch(const std::array<std::vector<double>, 3>& distances,
                                              const std::array<std::vector<std::size_t>, 3>& labels,
                                              const ConsistencyParams& params);

}  // namespace tical
