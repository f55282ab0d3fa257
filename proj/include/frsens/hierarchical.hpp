#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "frsens/dataset.hpp"
#include "frsens/models.hpp"
#include "frsens/random.hpp"

namespace frsens {

/// Log density of the Griffin-Steel prior on a DP precision:
/// pi(alpha) = gamma^eta Gamma(2 eta) / Gamma(eta)^2 * alpha^(eta-1) / (alpha+gamma)^(2 eta).
inline double griffin_steel_log_density(double alpha, double eta, double gamma) {
  if (!(alpha > 0.0)) return -INFINITY;
  return eta * std::log(gamma) + std::lgamma(2.0 * eta) - 2.0 * std::lgamma(eta) +
         (eta - 1.0) * std::log(alpha) - 2.0 * eta * std::log(alpha + gamma);
}

/// Hyperparameters shared by the CCV and DCV samplers. Observations have
/// variance a * c_j * sigma2 within cluster j (c_j = 1 for CCV) and cluster
/// means are N(mu0, (1 - a) * sigma2).
struct HyperState {
  double mu0 = 0.0;
  double sigma2 = 1.0;
  double a = 0.5;
  double alpha = 1.0;
  int alpha_proposals = 0;
  int alpha_accepts = 0;

  double within_var() const { return a * sigma2; }
  double between_var() const { return (1.0 - a) * sigma2; }
};

namespace detail {

inline constexpr int kGriddyCells = 200;
inline constexpr double kAlphaStep = 0.3;

inline HyperState initial_hyper(const Dataset& data, const CcvConfig& cfg) {
  HyperState h;
  h.mu0 = data.mean();
  const double v = data.variance();
  h.sigma2 = v > 0.0 ? v : 1.0;
  h.a = cfg.fixed_a ? *cfg.fixed_a : std::clamp(cfg.a0 / (cfg.a0 + cfg.a1), 0.05, 0.95);
  h.alpha = cfg.gamma;
  return h;
}

/// Draws a cluster mean from its normal full conditional, given
/// sum_i x_i / c_j and n_j / c_j over the cluster members.
inline double draw_cluster_mean(Rng& rng, const HyperState& h, double scaled_sum,
                                double scaled_count) {
  const double prior_prec = 1.0 / h.between_var();
  const double prec = prior_prec + scaled_count / h.within_var();
  const double mean = (h.mu0 * prior_prec + scaled_sum / h.within_var()) / prec;
  return rng.normal(mean, std::sqrt(1.0 / prec));
}

inline void update_mu0(Rng& rng, const CcvConfig& cfg, HyperState& h,
                       std::span<const double> means) {
  const double k_prec = static_cast<double>(means.size()) / h.between_var();
  double sum = 0.0;
  for (double m : means) sum += m;
  const double prec = cfg.lambda0 + k_prec;
  const double mean = (cfg.lambda0 * cfg.mu00 + sum / h.between_var()) / prec;
  h.mu0 = rng.normal(mean, std::sqrt(1.0 / prec));
}

inline double mean_dispersion(const HyperState& h, std::span<const double> means) {
  double q = 0.0;
  for (double m : means) q += (m - h.mu0) * (m - h.mu0);
  return q;
}

/// `qx` is sum_i (x_i - mu_{z_i})^2 / c_{z_i}; `qmu` is sum_j (mu_j - mu0)^2.
inline void update_sigma2(Rng& rng, const CcvConfig& cfg, HyperState& h, int n, int k,
                          double qx, double qmu) {
  const double shape = cfg.s0 + 0.5 * (n + k);
  const double rate = cfg.s1 + qx / (2.0 * h.a) + qmu / (2.0 * (1.0 - h.a));
  h.sigma2 = 1.0 / rng.gamma(shape, rate);
}

/// Griddy Gibbs on cell midpoints of (0,1), then uniform within the chosen cell.
inline void update_a(Rng& rng, const CcvConfig& cfg, HyperState& h, int n, int k, double qx,
                     double qmu) {
  if (cfg.fixed_a) {
    h.a = *cfg.fixed_a;
    return;
  }
  const double tau = 1.0 / h.sigma2;
  std::array<double, kGriddyCells> logw{};
  for (int c = 0; c < kGriddyCells; ++c) {
    const double a = (c + 0.5) / kGriddyCells;
    logw[c] = (cfg.a0 - 1.0 - 0.5 * n) * std::log(a) +
              (cfg.a1 - 1.0 - 0.5 * k) * std::log1p(-a) - tau * qx / (2.0 * a) -
              tau * qmu / (2.0 * (1.0 - a));
  }
  const int cell = rng.categorical_log(logw);
  h.a = (cell + rng.uniform()) / kGriddyCells;
}

/// Random-walk Metropolis-Hastings on log alpha.
inline void update_alpha(Rng& rng, const CcvConfig& cfg, HyperState& h, int n, int k) {
  auto log_target = [&](double alpha) {
    return griffin_steel_log_density(alpha, cfg.eta, cfg.gamma) + k * std::log(alpha) +
           std::lgamma(alpha) - std::lgamma(alpha + n) + std::log(alpha);
  };
  const double proposal = h.alpha * std::exp(kAlphaStep * rng.normal());
  const double log_ratio = log_target(proposal) - log_target(h.alpha);
  ++h.alpha_proposals;
  if (std::log(rng.uniform()) < log_ratio) {
    h.alpha = proposal;
    ++h.alpha_accepts;
  }
}

}  // namespace detail

}  // namespace frsens
