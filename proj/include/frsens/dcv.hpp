#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "frsens/dataset.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"
#include "frsens/hierarchical.hpp"
#include "frsens/mixture.hpp"
#include "frsens/models.hpp"
#include "frsens/random.hpp"

namespace frsens {

inline constexpr int kDcvPredictiveNodes = 64;

/// Prior draw of zeta^-1 ~ Gamma(phi, 1).
inline double draw_zeta_inverse(Rng& rng, double phi) { return rng.gamma(phi, 1.0); }

/// Gibbs sampler for the different component variance mixture. Cluster j
/// has variance a (phi - 1) zeta_j sigma2. Assignments use the auxiliary
/// component method with `aux_m` fresh draws from the base measure.
class DcvChain {
 public:
  DcvChain(const Dataset& data, const DcvConfig& cfg)
      : cfg_(cfg), x_(data.values()), z_(x_.size(), 0),
        hyper_(detail::initial_hyper(data, cfg)) {
    if (x_.empty()) throw Error(ErrorCode::EmptyDataset, "DCV posterior needs observations");
    if (!(cfg.phi > 1.0)) throw Error(ErrorCode::InvalidPhi, "phi must be greater than one");
    counts_.push_back(static_cast<int>(x_.size()));
    means_.push_back(data.mean());
    zetas_.push_back(1.0 / cfg.phi);
  }

  /// Variance multiplier (phi - 1) zeta relative to a * sigma2.
  double scale_of(double zeta) const { return (cfg_.phi - 1.0) * zeta; }

  double component_var(int j) const { return hyper_.within_var() * scale_of(zetas_[j]); }

  void sweep(Rng& rng) {
    update_assignments(rng);
    const int k = clusters();
    std::vector<double> sum(k, 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) sum[z_[i]] += x_[i];
    for (int j = 0; j < k; ++j) {
      const double c = scale_of(zetas_[j]);
      means_[j] = detail::draw_cluster_mean(rng, hyper_, sum[j] / c, counts_[j] / c);
    }
    std::vector<double> ss(k, 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = x_[i] - means_[z_[i]];
      ss[z_[i]] += r * r;
    }
    const double denom = 2.0 * hyper_.a * (cfg_.phi - 1.0) * hyper_.sigma2;
    for (int j = 0; j < k; ++j) {
      const double inv = rng.gamma(cfg_.phi + 0.5 * counts_[j], 1.0 + ss[j] / denom);
      zetas_[j] = 1.0 / inv;
    }
    detail::update_mu0(rng, cfg_, hyper_, means_);
    const int n = static_cast<int>(x_.size());
    double qx = 0.0;
    for (int j = 0; j < k; ++j) qx += ss[j] / scale_of(zetas_[j]);
    const double qmu = detail::mean_dispersion(hyper_, means_);
    detail::update_sigma2(rng, cfg_, hyper_, n, k, qx, qmu);
    detail::update_a(rng, cfg_, hyper_, n, k, qx, qmu);
    detail::update_alpha(rng, cfg_, hyper_, n, k);
  }

  /// Occupied components plus the prior predictive, whose zeta mixture is
  /// integrated by midpoint quadrature over quantiles of Gamma(phi, 1).
  GridPdf density(const Grid& grid, const Dataset& data) const {
    GridMixture mix(grid, data);
    const double denom = x_.size() + hyper_.alpha;
    for (int j = 0; j < clusters(); ++j) {
      mix.add_normal(counts_[j] / denom, means_[j], component_var(j));
    }
    const double node_w = hyper_.alpha / denom / kDcvPredictiveNodes;
    for (int q = 0; q < kDcvPredictiveNodes; ++q) {
      const double inv =
          boost::math::gamma_p_inv(cfg_.phi, (q + 0.5) / kDcvPredictiveNodes);
      mix.add_normal(node_w, hyper_.mu0,
                     hyper_.between_var() + hyper_.within_var() * scale_of(1.0 / inv));
    }
    return mix.finish();
  }

  StateSummary summary() const {
    StateSummary s;
    s.clusters = clusters();
    s.alpha = hyper_.alpha;
    s.a = hyper_.a;
    s.sigma2 = hyper_.sigma2;
    s.mu0 = hyper_.mu0;
    s.counts = counts_;
    s.means = means_;
    for (int j = 0; j < clusters(); ++j) s.variances.push_back(component_var(j));
    return s;
  }

  int clusters() const noexcept { return static_cast<int>(counts_.size()); }
  const HyperState& hyper() const noexcept { return hyper_; }

 private:
  void update_assignments(Rng& rng) {
    const int m = cfg_.aux_m;
    std::vector<double> aux_mu(m), aux_zeta(m), logw;
    const double log_aux = std::log(hyper_.alpha / m);
    const double between_sd = std::sqrt(hyper_.between_var());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double xi = x_[i];
      const int old = z_[i];
      int first_fresh = 0;
      if (--counts_[old] == 0) {
        aux_mu[0] = means_[old];
        aux_zeta[0] = zetas_[old];
        first_fresh = 1;
        drop(old);
      }
      for (int q = first_fresh; q < m; ++q) {
        aux_mu[q] = rng.normal(hyper_.mu0, between_sd);
        aux_zeta[q] = 1.0 / draw_zeta_inverse(rng, cfg_.phi);
      }

      const int k = clusters();
      logw.resize(k + m);
      for (int j = 0; j < k; ++j) {
        logw[j] = std::log(static_cast<double>(counts_[j])) +
                  normal_log_pdf(xi, means_[j], component_var(j));
      }
      for (int q = 0; q < m; ++q) {
        logw[k + q] = log_aux + normal_log_pdf(xi, aux_mu[q],
                                               hyper_.within_var() * scale_of(aux_zeta[q]));
      }
      int pick = rng.categorical_log(logw);
      if (pick >= k) {
        means_.push_back(aux_mu[pick - k]);
        zetas_.push_back(aux_zeta[pick - k]);
        counts_.push_back(0);
        pick = k;
      }
      ++counts_[pick];
      z_[i] = pick;
    }
  }

  void drop(int j) {
    counts_.erase(counts_.begin() + j);
    means_.erase(means_.begin() + j);
    zetas_.erase(zetas_.begin() + j);
    for (int& zi : z_) {
      if (zi > j) --zi;
    }
  }

  DcvConfig cfg_;
  std::vector<double> x_;
  std::vector<int> z_;
  std::vector<int> counts_;
  std::vector<double> means_;
  std::vector<double> zetas_;
  HyperState hyper_;
};

inline PosteriorSample dcv_posterior(const Dataset& data, const DcvConfig& cfg,
                                     const McmcControl& ctl, const Grid& grid = Grid{}) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "DCV posterior needs observations");
  validate(cfg);
  validate(ctl);
  DcvChain chain(data, cfg);
  Rng rng(derive_seed(ctl.seed, 0, 4));

  PosteriorSample out{{}, cfg, ctl.seed, {}};
  out.pdfs.reserve(ctl.n_samples);
  for (int t = 0; t < ctl.burn_in; ++t) chain.sweep(rng);
  for (int kept = 0; kept < ctl.n_samples; ++kept) {
    for (int t = 0; t < ctl.thin; ++t) chain.sweep(rng);
    out.pdfs.push_back(chain.density(grid, data));
    out.trace.push_back(chain.summary());
  }
  return out;
}

}  // namespace frsens
