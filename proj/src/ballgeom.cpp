#include "tical/ballgeom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tical/errors.hpp"

namespace tical {

namespace {

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double squared_diff(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return s;
}

void require_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidInput("ball point has a non-finite coordinate");
}

}  // namespace

void BallConfig::validate() const {
  if (dimension == 0) throw InvalidSpec("ball dimension must be positive");
  if (!(eps_boundary > 0.0 && eps_boundary < 1.0))
    throw InvalidSpec("eps_boundary must lie in (0, 1)");
  if (!(eps_arcosh > 0.0)) throw InvalidSpec("eps_arcosh must be positive");
}

BallPoint BallPoint::checked(std::vector<double> coords, const BallConfig& cfg) {
  if (coords.size() != cfg.dimension)
    throw InvalidInput("ball point dimension " + std::to_string(coords.size()) + " != " +
                       std::to_string(cfg.dimension));
  require_finite(coords);
  if (std::sqrt(squared_norm(coords)) > cfg.max_norm())
    throw InvalidInput("ball point lies outside radius 1 - eps_boundary");
  return BallPoint(std::move(coords));
}

double BallPoint::norm() const { return std::sqrt(squared_norm(coords_)); }

BallPoint project_to_ball(std::span<const double> v, const BallConfig& cfg) {
  if (v.size() != cfg.dimension)
    throw InvalidInput("projection input dimension " + std::to_string(v.size()) + " != " +
                       std::to_string(cfg.dimension));
  require_finite(v);
  std::vector<double> out(v.begin(), v.end());
  const double n = std::sqrt(squared_norm(v));
  const double r = cfg.max_norm();
  if (n > r) {
    const double s = r / n;
    for (double& x : out) x *= s;
  }
  return BallPoint(std::move(out));
}

double ball_distance(const BallPoint& p, const BallPoint& q) {
  if (p.dim() != q.dim()) throw InvalidInput("ball_distance: dimension mismatch");
  return ball_distance(p.coords(), q.coords());
}

double ball_distance(std::span<const double> p, std::span<const double> q) {
  const double diff = squared_diff(p, q);
  if (diff == 0.0) return 0.0;
  const double alpha = 1.0 - squared_norm(p);
  const double beta = 1.0 - squared_norm(q);
  const double z = std::max(1.0, 1.0 + 2.0 * diff / (alpha * beta));
  return std::acosh(z);
}

double euclidean_distance(std::span<const double> p, std::span<const double> q) {
  return std::sqrt(squared_diff(p, q));
}

void ball_distance_grad(std::span<const double> p, std::span<const double> q, double eps_arcosh,
                        double scale, std::span<double> grad_p, std::span<double> grad_q) {
  const double diff = squared_diff(p, q);
  const double alpha = 1.0 - squared_norm(p);
  const double beta = 1.0 - squared_norm(q);
  const double z = std::max(1.0 + eps_arcosh, 1.0 + 2.0 * diff / (alpha * beta));
  const double dd_dz = scale / std::sqrt(z * z - 1.0);
  const double c_pq = 4.0 / (alpha * beta);
  const double c_p = 4.0 * diff / (alpha * alpha * beta);
  const double c_q = 4.0 * diff / (alpha * beta * beta);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    grad_p[i] += dd_dz * (c_pq * d + c_p * p[i]);
    grad_q[i] += dd_dz * (-c_pq * d + c_q * q[i]);
  }
}

void euclidean_distance_grad(std::span<const double> p, std::span<const double> q, double scale,
                             std::span<double> grad_p, std::span<double> grad_q) {
  const double dist = euclidean_distance(p, q);
  if (dist == 0.0) return;  // subgradient 0 at coincidence
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = scale * (p[i] - q[i]) / dist;
    grad_p[i] += g;
    grad_q[i] -= g;
  }
}

}  // namespace tical
