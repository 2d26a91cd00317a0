#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tical {

struct BallConfig {
  std::size_t dimension = 64;
  double eps_boundary = 1e-5;  // points are kept at norm <= 1 - eps_boundary
  double eps_arcosh = 1e-12;   // arcosh argument floor on the gradient path

  void validate() const;
  double max_norm() const { return 1.0 - eps_boundary; }
};

// A point of the Poincare ball model (curvature -1). Only constructible through
// project_to_ball() or BallPoint::checked(), so the norm bound always holds.
class BallPoint {
 public:
  BallPoint() = default;

  // Throws InvalidInput if `coords` is non-finite or outside the allowed radius.
  static BallPoint checked(std::vector<double> coords, const BallConfig& cfg);

  std::span<const double> coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double norm() const;

 private:
  explicit BallPoint(std::vector<double> c) : coords_(std::move(c)) {}
  friend BallPoint project_to_ball(std::span<const double> v, const BallConfig& cfg);

  std::vector<double> coords_;
};

// Radial rescale onto the ball of radius 1 - eps_boundary; identity inside it.
BallPoint project_to_ball(std::span<const double> v, const BallConfig& cfg);

double ball_distance(const BallPoint& p, const BallPoint& q);

// Raw-coordinate forms shared by the anchor list and the autodiff kernels.
// Callers guarantee both points satisfy the ball invariant.
double ball_distance(std::span<const double> p, std::span<const double> q);
double euclidean_distance(std::span<const double> p, std::span<const double> q);

// Accumulates scale * d(dist)/dp into grad_p and scale * d(dist)/dq into grad_q.
// The arcosh argument is floored at 1 + eps_arcosh before differentiation.
void ball_distance_grad(std::span<const double> p, std::span<const double> q, double eps_arcosh,
                        double scale, std::span<double> grad_p, std::span<double> grad_q);

void euclidean_distance_grad(std::span<const double> p, std::span<const double> q, double scale,
                             std::span<double> grad_p, std::span<double> grad_q);

enum class DistanceKind { kHyperbolic, kEuclidean };

inline double distance(DistanceKind kind, std::span<const double> p, std::span<const double> q) {
  return kind == DistanceKind::kHyperbolic ? ball_distance(p, q) : euclidean_distance(p, q);
}

}  // namespace tical
