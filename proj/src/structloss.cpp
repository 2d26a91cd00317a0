#include "tical/structloss.hpp"

#include <algorithm>
#include <cmath>

#include "tical/errors.hpp"

namespace tical {

namespace {

struct PairStats {
  std::vector<double> tree;   // x_p
  std::vector<double> ball;   // y_p
  double mean_tree = 0.0;
  double mean_ball = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  bool degenerate = true;
};

bool negligible(double centered_ss, const std::vector<double>& v) {
  double raw = 0.0;
  for (double x : v) raw += x * x;
  return centered_ss <= 1e-20 * std::max(1.0, raw);
}

PairStats pair_stats(const CpccKernel& k) {
  const std::size_t b = k.labels.size();
  if (b < 2) throw InvalidInput("hypcpcc needs a batch of at least 2 samples");
  if (k.features.size() != b * k.dim) throw InvalidInput("hypcpcc: feature buffer size mismatch");
  PairStats s;
  s.tree.reserve(b * (b - 1) / 2);
  s.ball.reserve(b * (b - 1) / 2);
  for (std::size_t i = 0; i < b; ++i) {
    if (k.labels[i] >= k.n_classes) throw InvalidInput("hypcpcc: label out of range");
    for (std::size_t j = i + 1; j < b; ++j) {
      s.tree.push_back(k.tree_dist[k.labels[i] * k.n_classes + k.labels[j]]);
      s.ball.push_back(distance(k.kind, k.features.subspan(i * k.dim, k.dim),
                                k.features.subspan(j * k.dim, k.dim)));
    }
  }
  const double n = static_cast<double>(s.tree.size());
  for (std::size_t p = 0; p < s.tree.size(); ++p) {
    s.mean_tree += s.tree[p];
    s.mean_ball += s.ball[p];
  }
  s.mean_tree /= n;
  s.mean_ball /= n;
  for (std::size_t p = 0; p < s.tree.size(); ++p) {
    const double dx = s.tree[p] - s.mean_tree;
    const double dy = s.ball[p] - s.mean_ball;
    s.sxx += dx * dx;
    s.syy += dy * dy;
    s.sxy += dx * dy;
  }
  s.degenerate = negligible(s.sxx, s.tree) || negligible(s.syy, s.ball);
  return s;
}

}  // namespace

double CpccKernel::value() const {
  const auto s = pair_stats(*this);
  if (s.degenerate) return 0.0;
  const double r = s.sxy / std::sqrt(s.sxx * s.syy);
  return std::clamp(r, -1.0, 1.0);
}

void CpccKernel::accumulate_grad(double scale, std::span<double> grad) const {
  const auto s = pair_stats(*this);
  if (s.degenerate) return;
  const double denom = std::sqrt(s.sxx * s.syy);
  const double r = s.sxy / denom;
  const std::size_t b = labels.size();
  std::size_t p = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j, ++p) {
      // dr/dy_p; the mean terms cancel because deviations sum to zero.
      const double dr = (s.tree[p] - s.mean_tree) / denom - r * (s.ball[p] - s.mean_ball) / s.syy;
      auto fi = features.subspan(i * dim, dim);
      auto fj = features.subspan(j * dim, dim);
      auto gi = grad.subspan(i * dim, dim);
      auto gj = grad.subspan(j * dim, dim);
      if (kind == DistanceKind::kHyperbolic)
        ball_distance_grad(fi, fj, eps_arcosh, scale * dr, gi, gj);
      else
        euclidean_distance_grad(fi, fj, scale * dr, gi, gj);
    }
  }
}

double hypcpcc(const PairBatch& batch, const EmotionTree& tree, DistanceKind kind) {
  if (batch.features.size() != batch.labels.size())
    throw InvalidInput("hypcpcc: features and labels differ in length");
  if (batch.features.size() < 2) throw InvalidInput("hypcpcc needs a batch of at least 2 samples");
  const std::size_t dim = batch.features.front().dim();
  std::vector<double> flat;
  flat.reserve(batch.features.size() * dim);
  for (const auto& f : batch.features) {
    if (f.dim() != dim) throw InvalidInput("hypcpcc: mixed feature dimensions");
    flat.insert(flat.end(), f.coords().begin(), f.coords().end());
  }
  const auto dist = tree.all_pairs_distance();
  CpccKernel k{flat, dim, batch.labels, dist, tree.n_classes(), kind};
  return k.value();
}

double hypcpcc_loss(const std::array<PairBatch, 3>& batches, const EmotionTree& tree,
                    DistanceKind kind) {
  double sum = 0.0;
  for (const auto& b : batches) sum += hypcpcc(b, tree, kind);
  return -sum / 3.0;
}

}  // namespace tical
