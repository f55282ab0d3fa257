#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "frsens/error.hpp"
#include "frsens/geometry.hpp"
#include "frsens/karcher.hpp"
#include "frsens/models.hpp"
#include "frsens/tpca.hpp"

namespace frsens {

inline constexpr int kDefaultComponents = 20;
inline constexpr double kMinVariance = 1e-14;

/// Shift, spread and covariance-shape sensitivity of one perturbation.
struct MeasureTriple {
  double d_shift = 0.0;
  double v_spread = 0.0;
  double e_covshape = 0.0;
  int d_components = kDefaultComponents;
};

/// Cumulative sums of the top-d eigenvalues divided by their total.
struct CumulativeSpectrum {
  Eigen::VectorXd omega;

  static CumulativeSpectrum from_eigenvalues(const Eigen::VectorXd& eigenvalues, int d) {
    if (d < 2) throw Error(ErrorCode::InvalidConfig, "d_components must be >= 2");
    if (eigenvalues.size() < d) {
      throw Error(ErrorCode::InsufficientSamples,
                  "only " + std::to_string(eigenvalues.size()) +
                      " eigenvalues available for d = " + std::to_string(d));
    }
    const double total = eigenvalues.head(d).sum();
    if (!(total > 0.0)) {
      throw Error(ErrorCode::DegenerateSample, "top eigenvalues sum to zero");
    }
    CumulativeSpectrum out{Eigen::VectorXd(d)};
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
      acc += eigenvalues[k];
      out.omega[k] = acc / total;
    }
    out.omega[d - 1] = 1.0;
    return out;
  }
};

/// Per-sample geometry needed by all three measures, computed once. The
/// tangent PCA is present only for samples of two or more draws.
struct SampleSummary {
  Srd mean;
  double karcher_variance = 0.0;
  bool mean_converged = true;
  int n_draws = 0;
  std::optional<TpcaResult> tpca;
};

inline SampleSummary summarize(std::span<const Srd> samples, const KarcherOptions& opts = {}) {
  KarcherResult km = karcher_mean(samples, opts);
  SampleSummary s{km.mean, karcher_variance(samples, km.mean), km.converged,
                  static_cast<int>(samples.size()), std::nullopt};
  if (samples.size() >= 2) s.tpca = tangent_pca_at(samples, km.mean);
  return s;
}

inline SampleSummary summarize(const PosteriorSample& sample, const KarcherOptions& opts = {}) {
  const std::vector<Srd> srds = to_srds(sample.pdfs);
  return summarize(srds, opts);
}

/// FR distance between the two Karcher means.
inline double measure_d(const SampleSummary& base, const SampleSummary& pert) {
  return fr_distance(base.mean, pert.mean);
}

/// log(variance of pert) - log(variance of base).
inline double measure_v(const SampleSummary& base, const SampleSummary& pert) {
  if (base.karcher_variance < kMinVariance || pert.karcher_variance < kMinVariance) {
    throw Error(ErrorCode::DegenerateSample,
                "Karcher variance below " + std::to_string(kMinVariance));
  }
  return std::log(pert.karcher_variance) - std::log(base.karcher_variance);
}

/// Euclidean distance between the cumulative top-d spectra.
inline double measure_e(const SampleSummary& base, const SampleSummary& pert,
                        int d = kDefaultComponents) {
  if (d < 2) throw Error(ErrorCode::InvalidConfig, "d_components must be >= 2");
  for (const SampleSummary* s : {&base, &pert}) {
    if (s->n_draws <= d || !s->tpca) {
      throw Error(ErrorCode::InsufficientSamples,
                  "measure E with d = " + std::to_string(d) + " needs more than " +
                      std::to_string(d) + " draws, got " + std::to_string(s->n_draws));
    }
  }
  const auto w0 = CumulativeSpectrum::from_eigenvalues(base.tpca->eigenvalues, d);
  const auto w1 = CumulativeSpectrum::from_eigenvalues(pert.tpca->eigenvalues, d);
  return (w0.omega - w1.omega).norm();
}

inline MeasureTriple measure_all(const SampleSummary& base, const SampleSummary& pert,
                                 int d = kDefaultComponents) {
  return {measure_d(base, pert), measure_v(base, pert), measure_e(base, pert, d), d};
}

inline double measure_d(const PosteriorSample& base, const PosteriorSample& pert) {
  return measure_d(summarize(base), summarize(pert));
}

inline double measure_v(const PosteriorSample& base, const PosteriorSample& pert) {
  return measure_v(summarize(base), summarize(pert));
}

inline double measure_e(const PosteriorSample& base, const PosteriorSample& pert,
                        int d = kDefaultComponents) {
  return measure_e(summarize(base), summarize(pert), d);
}

/// sqrt(sum_{j=1}^{d-1} (1 - j/d)^2), the largest possible value of measure E.
inline double e_upper_bound(int d) {
  if (d < 2) throw Error(ErrorCode::InvalidConfig, "d must be >= 2");
  double acc = 0.0;
  for (int j = 1; j < d; ++j) {
    const double t = 1.0 - static_cast<double>(j) / d;
    acc += t * t;
  }
  return std::sqrt(acc);
}

/// Empirical central interval with linearly interpolated quantiles.
inline std::pair<double, double> replicate_band(std::vector<double> values,
                                                double level = 0.95) {
  if (values.size() < 2) {
    throw Error(ErrorCode::InsufficientValues, "a replicate band needs at least 2 values");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "band level must lie in (0, 1)");
  }
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = (values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - lo) * (values[hi] - values[lo]);
  };
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

}  // namespace frsens
