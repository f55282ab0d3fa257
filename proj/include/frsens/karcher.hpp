#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "frsens/density.hpp"
#include "frsens/error.hpp"
#include "frsens/geometry.hpp"

namespace frsens {

struct KarcherOptions {
  double tolerance = 1e-6;  // stop when the mean tangent direction is shorter
  double step = 0.5;
  int max_iter = 200;
};

struct KarcherResult {
  Srd mean;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline void require_common_grid(std::span<const Srd> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "sample of square-root densities is empty");
  }
  for (const Srd& s : samples) require_same_grid(samples.front().grid(), s.grid());
}

// Mean of the inverse-exponential maps of every sample at `at`.
inline Eigen::VectorXd mean_log(std::span<const Srd> samples,
                                const Eigen::VectorXd& at) {
  const Grid& g = samples.front().grid();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.size());
  for (const Srd& s : samples) acc += log_map(g, at, s.values());
  return acc / static_cast<double>(samples.size());
}

}  // namespace detail

/// Intrinsic (Karcher) mean by gradient descent on the sphere, started from
/// the normalized extrinsic average. On hitting `max_iter` the iterate with
/// the smallest gradient is returned with `converged == false`.
inline KarcherResult karcher_mean(std::span<const Srd> samples,
                                  const KarcherOptions& opts = {}) {
  detail::require_common_grid(samples);
  const Grid& g = samples.front().grid();

  Eigen::VectorXd current = Eigen::VectorXd::Zero(g.size());
  for (const Srd& s : samples) current += s.values();
  current /= g.norm(current);

  Eigen::VectorXd best = current;
  double best_grad = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd direction = detail::mean_log(samples, current);
    const double grad = g.norm(direction);
    if (grad < best_grad) {
      best_grad = grad;
      best = current;
    }
    if (grad < opts.tolerance) {
      return {Srd(g, std::move(current)), grad, iter, true};
    }
    if (iter == opts.max_iter) break;
    current = detail::exp_map(g, current, opts.step * direction);
  }
  return {Srd(g, std::move(best)), best_grad, opts.max_iter, false};
}

/// Mean squared geodesic distance from the samples to `mean`.
inline double karcher_variance(std::span<const Srd> samples, const Srd& mean) {
  detail::require_common_grid(samples);
  require_same_grid(samples.front().grid(), mean.grid());
  double acc = 0.0;
  for (const Srd& s : samples) {
    const double d = fr_distance(s, mean);
    acc += d * d;
  }
  return acc / static_cast<double>(samples.size());
}

inline std::vector<Srd> to_srds(std::span<const GridPdf> pdfs) {
  std::vector<Srd> out;
  out.reserve(pdfs.size());
  for (const GridPdf& p : pdfs) out.push_back(to_srd(p));
  return out;
}

}  // namespace frsens
