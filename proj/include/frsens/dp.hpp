#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "frsens/dataset.hpp"
#include "frsens/density.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"
#include "frsens/models.hpp"
#include "frsens/random.hpp"

namespace frsens {

inline constexpr double kStickResidual = 1e-6;

/// Weight that the posterior centering measure puts on G0.
inline double centering_weight(double alpha, int n) { return alpha / (alpha + n); }

/// One truncated stick-breaking realization on the unit interval. Atoms that
/// are observations carry their index in `data_index`; atoms from G0 carry -1.
/// `absorbed` is the unbroken tail mass added to the last weight.
struct StickBreaking {
  std::vector<double> weights;
  std::vector<double> atoms;
  std::vector<int> data_index;
  double absorbed = 0.0;
};

/// Draws DP(alpha + n, centering mixture) by stick breaking. Each stick
/// consumes exactly three uniforms, so a run is a prefix-stable function of
/// the stream. Sticks are broken until at least `truncation` are used and the
/// unbroken mass is at most kStickResidual; the last stick takes the rest.
inline StickBreaking dp_stick_breaking(Rng& rng, const std::vector<double>& unit_data,
                                       const DpConfig& cfg) {
  const int n = static_cast<int>(unit_data.size());
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "DP posterior needs observations");
  const double c = cfg.alpha + n;
  const double p_base = centering_weight(cfg.alpha, n);

  StickBreaking out;
  double remaining = 1.0;
  for (int k = 0;; ++k) {
    const double u_stick = rng.uniform();
    const double u_pick = rng.uniform();
    const double u_loc = rng.uniform();

    const double v = -std::expm1(std::log1p(-u_stick) / c);  // Beta(1, c) by inversion
    double w = remaining * v;
    const bool last = k + 1 >= cfg.truncation && remaining - w <= kStickResidual;
    if (last) {
      out.absorbed = remaining - w;
      w = remaining;
    }

    if (u_pick < p_base) {
      const double atom = cfg.g0.kind == BaseMeasure::Kind::uniform
                              ? u_loc
                              : boost::math::ibeta_inv(cfg.g0.a, cfg.g0.b, u_loc);
      out.atoms.push_back(atom);
      out.data_index.push_back(-1);
    } else {
      const int idx = std::min(n - 1, static_cast<int>(u_loc * n));
      out.atoms.push_back(unit_data[idx]);
      out.data_index.push_back(idx);
    }
    out.weights.push_back(w);
    if (last) break;
    remaining -= w;
    if (k + 1 >= cfg.max_truncation) {
      throw Error(ErrorCode::TruncationTooSmall,
                  "stick-breaking residual " + std::to_string(remaining) + " after " +
                      std::to_string(k + 1) + " sticks");
    }
  }
  return out;
}

/// Kernel bandwidth on the unit scale: the configured value, or
/// max(1.06 * sd * n^(-1/5), 2 * grid spacing).
inline double dp_bandwidth(const Dataset& data, const DpConfig& cfg, const Grid& grid) {
  if (cfg.bandwidth) return *cfg.bandwidth;
  const double sd = std::sqrt(data.variance()) * data.scale();
  const double silverman = 1.06 * sd * std::pow(static_cast<double>(data.size()), -0.2);
  return std::max(silverman, 2.0 * grid.spacing());
}

/// Gaussian-kernel smoothing of a discrete measure, normalized on the grid.
inline GridPdf smooth_atoms(const Grid& grid, const StickBreaking& draw,
                            const std::vector<double>& unit_data, double bandwidth) {
  const int n_data = static_cast<int>(unit_data.size());
  std::vector<double> data_mass(n_data, 0.0);
  std::vector<std::pair<double, double>> atoms;  // (location, weight)
  for (std::size_t k = 0; k < draw.weights.size(); ++k) {
    if (draw.data_index[k] >= 0) {
      data_mass[draw.data_index[k]] += draw.weights[k];
    } else {
      atoms.emplace_back(draw.atoms[k], draw.weights[k]);
    }
  }
  for (int i = 0; i < n_data; ++i) {
    if (data_mass[i] > 0.0) atoms.emplace_back(unit_data[i], data_mass[i]);
  }

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid.size());
  const double reach = 8.0 * bandwidth;
  const double h = grid.spacing();
  for (const auto& [loc, w] : atoms) {
    const int lo = std::max(0, static_cast<int>(std::floor((loc - reach) / h)));
    const int hi = std::min(grid.size() - 1, static_cast<int>(std::ceil((loc + reach) / h)));
    for (int i = lo; i <= hi; ++i) {
      const double z = (grid.abscissa(i) - loc) / bandwidth;
      acc[i] += w * std::exp(-0.5 * z * z);
    }
  }
  return normalize_pdf(grid, std::move(acc));
}

/// Posterior draws of a DP on the unit-rescaled observations, each smoothed
/// by a Gaussian kernel. Draws are independent, so burn-in and thinning do
/// not apply; draw t uses its own stream derived from the control seed.
inline PosteriorSample dp_posterior(const Dataset& data, const DpConfig& cfg,
                                    const McmcControl& ctl, const Grid& grid = Grid{}) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "DP posterior needs observations");
  validate(cfg);
  validate(ctl);
  const std::vector<double> unit = data.unit_values();
  const double bw = dp_bandwidth(data, cfg, grid);

  PosteriorSample out{{}, cfg, ctl.seed, {}};
  out.pdfs.reserve(ctl.n_samples);
  out.trace.reserve(ctl.n_samples);
  for (int t = 0; t < ctl.n_samples; ++t) {
    Rng rng(derive_seed(ctl.seed, static_cast<std::uint64_t>(t), 1));
    const StickBreaking draw = dp_stick_breaking(rng, unit, cfg);
    out.pdfs.push_back(smooth_atoms(grid, draw, unit, bw));
    StateSummary s;
    s.clusters = static_cast<int>(draw.weights.size());
    s.alpha = cfg.alpha;
    out.trace.push_back(std::move(s));
  }
  return out;
}

}  // namespace frsens
