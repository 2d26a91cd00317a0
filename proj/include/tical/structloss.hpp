#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tical/ballgeom.hpp"
#include "tical/emotree.hpp"

namespace tical {

// One modality's features for a batch together with their (pseudo) labels.
struct PairBatch {
  std::vector<BallPoint> features;
  std::vector<std::size_t> labels;
};

// Pearson correlation between tree distances of label pairs and ball distances
// of feature pairs over all i < j. Returns 0 when either side has zero variance.
double hypcpcc(const PairBatch& batch, const EmotionTree& tree,
               DistanceKind kind = DistanceKind::kHyperbolic);

// -(1/3) * sum over the three modality batches.
double hypcpcc_loss(const std::array<PairBatch, 3>& batches, const EmotionTree& tree,
                    DistanceKind kind = DistanceKind::kHyperbolic);

// Flat kernels used by the autodiff graph. `features` is row-major B x dim,
// `tree_dist` row-major K x K.
struct CpccKernel {
  std::span<const double> features;
  std::size_t dim = 0;
  std::span<const std::size_t> labels;
  std::span<const double> tree_dist;
  std::size_t n_classes = 0;
  DistanceKind kind = DistanceKind::kHyperbolic;
  double eps_arcosh = 1e-12;

  double value() const;
  // Adds scale * d(value)/d(features) into grad (B x dim). Zero when degenerate.
  void accumulate_grad(double scale, std::span<double> grad) const;
};

}  // namespace tical
