#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <span>
#include <utility>

#include "frsens/density.hpp"
#include "frsens/error.hpp"
#include "frsens/geometry.hpp"
#include "frsens/karcher.hpp"

namespace frsens {

/// Tangent PCA at a Karcher mean.
///
/// The covariance operator is C = 1/(n-1) * sum_i v_i v_i^T acting on grid
/// functions with the trapezoidal inner product, so eigenvalues approximate
/// those of the continuum operator and eigenvectors are orthonormal under
/// Grid::inner. Eigenvalues are sorted nonincreasing and clamped at zero.
/// Each eigenvector is signed so that its largest-magnitude entry (earliest
/// on ties) is positive.
struct TpcaResult {
  Srd mean;
  Eigen::VectorXd eigenvalues;   // length min(n_samples, n_points)
  Eigen::MatrixXd eigenvectors;  // n_points x eigenvalues.size()
  Eigen::MatrixXd tangents;      // n_points x n_samples, columns v_i
  int n_samples = 0;
  double covariance_trace = 0.0;
  bool mean_converged = true;

  /// Number of eigenvalues above `threshold`.
  int rank(double threshold = 1e-10) const {
    return static_cast<int>((eigenvalues.array() > threshold).count());
  }
};

enum class TpcaRoute {
  automatic,  // thin QR of the tangent matrix when n_samples < n_points
  covariance  // eigendecomposition of the full n_points x n_points operator
};

namespace detail {

inline void fix_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    double big = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, k)) > big) {
        big = std::abs(u(i, k));
        arg = i;
      }
    }
    if (u(arg, k) < 0.0) u.col(k) *= -1.0;
  }
}

// Symmetric eigendecomposition, returned in descending order.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> descending_eigen(
    const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::Index k = m.rows();
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < k; ++i) values[i] = std::max(values[i], 0.0);
  return {std::move(values), std::move(vectors)};
}

}  // namespace detail

/// Tangent PCA about a precomputed mean.
inline TpcaResult tangent_pca_at(std::span<const Srd> samples, const Srd& mean,
                                 TpcaRoute route = TpcaRoute::automatic) {
  detail::require_common_grid(samples);
  require_same_grid(samples.front().grid(), mean.grid());
  const int n = static_cast<int>(samples.size());
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "tangent PCA needs at least 2 samples");
  }
  const Grid& g = mean.grid();
  const int dim = g.size();

  Eigen::MatrixXd tangents(dim, n);
  for (int i = 0; i < n; ++i) {
    tangents.col(i) = detail::log_map(g, mean.values(), samples[i].values());
  }

  const Eigen::VectorXd sqrt_w = g.weights().cwiseSqrt();
  const Eigen::MatrixXd scaled =
      sqrt_w.asDiagonal() * tangents / std::sqrt(static_cast<double>(n - 1));

  Eigen::VectorXd values;
  Eigen::MatrixXd basis;
  if (route == TpcaRoute::automatic && n < dim) {
    // C = B B^T with B = Q R, so the nonzero spectrum is that of R R^T.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, n);
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    auto [vals, z] = detail::descending_eigen(r * r.transpose());
    values = std::move(vals);
    basis = q * z;
  } else {
    auto [vals, y] = detail::descending_eigen(scaled * scaled.transpose());
    values = vals.head(std::min(n, dim));
    basis = y.leftCols(values.size());
  }

  Eigen::MatrixXd vectors = sqrt_w.cwiseInverse().asDiagonal() * basis;
  detail::fix_signs(vectors);

  return {mean,
          std::move(values),
          std::move(vectors),
          std::move(tangents),
          n,
          scaled.squaredNorm(),
          true};
}

inline TpcaResult tangent_pca(std::span<const Srd> samples,
                              const KarcherOptions& opts = {}) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "tangent PCA needs at least 2 samples");
  }
  KarcherResult km = karcher_mean(samples, opts);
  TpcaResult out = tangent_pca_at(samples, km.mean);
  out.mean_converged = km.converged;
  return out;
}

}  // namespace frsens
