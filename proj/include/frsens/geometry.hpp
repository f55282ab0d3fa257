#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "frsens/density.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"

namespace frsens {

inline constexpr double kSmallAngle = 1e-12;
inline constexpr double kBoundaryMargin = 1e-9;

namespace detail {

inline double arc_length(const Grid& g, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& b) {
  // Same angle as acos(<a, b>) for unit vectors, without the loss of
  // precision acos suffers near 0. Identical inputs give exactly 0.
  return 2.0 * std::atan2(g.norm(a - b), g.norm(a + b));
}

// Inverse exponential map on raw coefficient vectors; both inputs must be
// unit vectors under the trapezoidal inner product.
inline Eigen::VectorXd log_map(const Grid& g, const Eigen::VectorXd& from,
                               const Eigen::VectorXd& to) {
  const double theta = arc_length(g, from, to);
  if (theta < kSmallAngle) return Eigen::VectorXd::Zero(from.size());
  if (theta >= std::numbers::pi / 2 - kBoundaryMargin) {
    throw Error(ErrorCode::AntipodalOrBoundary,
                "points are at distance " + std::to_string(theta) +
                    ", too close to pi/2 for the inverse exponential map");
  }
  // theta/sin(theta) * (to - cos(theta) from), written as theta times the
  // unit direction of the component of `to` orthogonal to `from`.
  Eigen::VectorXd v = to - g.inner(from, to) * from;
  v -= g.inner(v, from) * from;
  const double len = g.norm(v);
  if (len == 0.0) return Eigen::VectorXd::Zero(from.size());
  return (theta / len) * v;
}

// Exponential map on raw coefficients; clamps the orthant exit caused by
// discretization and renormalizes.
inline Eigen::VectorXd exp_map(const Grid& g, const Eigen::VectorXd& base,
                               const Eigen::VectorXd& tangent) {
  const double len = g.norm(tangent);
  if (len < kSmallAngle) return base;
  Eigen::VectorXd out =
      std::cos(len) * base + (std::sin(len) / len) * tangent;
  out = out.cwiseMax(0.0);
  const double n = g.norm(out);
  if (n == 0.0) {
    throw Error(ErrorCode::AntipodalOrBoundary,
                "exponential map left the positive orthant entirely");
  }
  return out / n;
}

}  // namespace detail

/// Fisher-Rao geodesic distance between square-root densities, in [0, pi/2].
inline double fr_distance(const Srd& a, const Srd& b) {
  require_same_grid(a.grid(), b.grid());
  return detail::arc_length(a.grid(), a.values(), b.values());
}

inline double fr_distance(const GridPdf& p1, const GridPdf& p2) {
  require_same_grid(p1.grid(), p2.grid());
  return fr_distance(to_srd(p1), to_srd(p2));
}

inline Srd exp_map(const Srd& psi, const TangentVector& delta) {
  require_same_grid(psi.grid(), delta.grid());
  const double drift =
      (delta.base().values() - psi.values()).cwiseAbs().maxCoeff();
  if (drift > kSmallAngle) {
    throw Error(ErrorCode::BaseMismatch,
                "tangent vector is not based at the given point");
  }
  return Srd(psi.grid(), detail::exp_map(psi.grid(), psi.values(), delta.values()));
}

inline TangentVector inv_exp_map(const Srd& from, const Srd& to) {
  require_same_grid(from.grid(), to.grid());
  return TangentVector(from, detail::log_map(from.grid(), from.values(), to.values()));
}

/// Points equally spaced in arc length along the geodesic from p1 to p2,
/// both endpoints included.
inline std::vector<GridPdf> geodesic_path(const Srd& from, const Srd& to,
                                          int n_steps) {
  if (n_steps < 2) {
    throw Error(ErrorCode::InvalidConfig, "geodesic path needs at least 2 steps");
  }
  const Grid& g = from.grid();
  const TangentVector v = inv_exp_map(from, to);
  std::vector<GridPdf> path;
  path.reserve(n_steps);
  for (int k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) / (n_steps - 1);
    Eigen::VectorXd point =
        k == 0 ? from.values() : detail::exp_map(g, from.values(), t * v.values());
    path.push_back(from_srd(Srd(g, std::move(point))));
  }
  return path;
}

inline std::vector<GridPdf> geodesic_path(const GridPdf& p1, const GridPdf& p2,
                                          int n_steps) {
  require_same_grid(p1.grid(), p2.grid());
  return geodesic_path(to_srd(p1), to_srd(p2), n_steps);
}

}  // namespace frsens
