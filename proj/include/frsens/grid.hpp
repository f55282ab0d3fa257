#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <string>

#include "frsens/error.hpp"

namespace frsens {

/// Equally spaced abscissae on [0,1]. All integrals over a grid use the
/// composite trapezoidal rule.
class Grid {
 public:
  static constexpr int kMinPoints = 16;
  static constexpr int kDefaultPoints = 512;

  explicit Grid(int n_points = kDefaultPoints) : n_(n_points) {
    if (n_points < kMinPoints) {
      throw Error(ErrorCode::InvalidGrid,
                  "grid needs at least " + std::to_string(kMinPoints) +
                      " points, got " + std::to_string(n_points));
    }
  }

  int size() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / (n_ - 1); }

  double abscissa(int i) const noexcept {
    return i == n_ - 1 ? 1.0 : static_cast<double>(i) * spacing();
  }

  Eigen::VectorXd abscissae() const {
    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) x[i] = abscissa(i);
    return x;
  }

  /// Trapezoid quadrature weights.
  Eigen::VectorXd weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n_, spacing());
    w[0] *= 0.5;
    w[n_ - 1] *= 0.5;
    return w;
  }

  double integrate(const Eigen::VectorXd& f) const {
    return spacing() * (f.sum() - 0.5 * (f[0] + f[n_ - 1]));
  }

  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return spacing() * (a.dot(b) - 0.5 * (a[0] * b[0] + a[n_ - 1] * b[n_ - 1]));
  }

  double norm(const Eigen::VectorXd& a) const { return std::sqrt(inner(a, a)); }

  void require_size(const Eigen::VectorXd& v) const {
    if (v.size() != n_) {
      throw Error(ErrorCode::GridMismatch,
                  "expected " + std::to_string(n_) + " grid values, got " +
                      std::to_string(v.size()));
    }
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) {
    throw Error(ErrorCode::GridMismatch,
                "grid mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " points");
  }
}

}  // namespace frsens
