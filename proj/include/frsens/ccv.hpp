#pragma once

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

/// Gibbs sampler for the common component variance mixture. Each sweep
/// updates assignments (means integrated out), cluster means, mu0, sigma2,
/// a and alpha, in that order.
class CcvChain {
 public:
  CcvChain(const Dataset& data, const CcvConfig& cfg)
      : cfg_(cfg), x_(data.values()), z_(x_.size(), 0),
        hyper_(detail::initial_hyper(data, cfg)) {
    if (x_.empty()) throw Error(ErrorCode::EmptyDataset, "CCV posterior needs observations");
    counts_.push_back(static_cast<int>(x_.size()));
    sums_.push_back(0.0);
    for (double xi : x_) sums_[0] += xi;
    means_.push_back(data.mean());
  }

  void sweep(Rng& rng) {
    update_assignments(rng);
    for (int j = 0; j < clusters(); ++j) {
      means_[j] = detail::draw_cluster_mean(rng, hyper_, sums_[j], counts_[j]);
    }
    detail::update_mu0(rng, cfg_, hyper_, means_);
    const int n = static_cast<int>(x_.size());
    const double qx = residual_sum();
    const double qmu = detail::mean_dispersion(hyper_, means_);
    detail::update_sigma2(rng, cfg_, hyper_, n, clusters(), qx, qmu);
    detail::update_a(rng, cfg_, hyper_, n, clusters(), qx, qmu);
    detail::update_alpha(rng, cfg_, hyper_, n, clusters());
  }

  /// sum_j n_j/(n+alpha) N(mu_j, a sigma2) + alpha/(n+alpha) N(mu0, sigma2).
  GridPdf density(const Grid& grid, const Dataset& data) const {
    GridMixture mix(grid, data);
    const double denom = x_.size() + hyper_.alpha;
    for (int j = 0; j < clusters(); ++j) {
      mix.add_normal(counts_[j] / denom, means_[j], hyper_.within_var());
    }
    mix.add_normal(hyper_.alpha / denom, hyper_.mu0, hyper_.sigma2);
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
    s.variances.assign(counts_.size(), hyper_.within_var());
    return s;
  }

  int clusters() const noexcept { return static_cast<int>(counts_.size()); }
  const HyperState& hyper() const noexcept { return hyper_; }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<int>& counts() const noexcept { return counts_; }

 private:
  void update_assignments(Rng& rng) {
    std::fill(sums_.begin(), sums_.end(), 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) sums_[z_[i]] += x_[i];

    std::vector<double> logw;
    const double wv = hyper_.within_var();
    const double prior_prec = 1.0 / hyper_.between_var();
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double xi = x_[i];
      const int old = z_[i];
      sums_[old] -= xi;
      if (--counts_[old] == 0) drop(old);

      const int k = clusters();
      logw.resize(k + 1);
      for (int j = 0; j < k; ++j) {
        const double prec = prior_prec + counts_[j] / wv;
        const double m = (hyper_.mu0 * prior_prec + sums_[j] / wv) / prec;
        logw[j] = std::log(static_cast<double>(counts_[j])) +
                  normal_log_pdf(xi, m, 1.0 / prec + wv);
      }
      logw[k] = std::log(hyper_.alpha) + normal_log_pdf(xi, hyper_.mu0, hyper_.sigma2);
      const int pick = rng.categorical_log(logw);
      if (pick == k) {
        counts_.push_back(0);
        sums_.push_back(0.0);
        means_.push_back(hyper_.mu0);
      }
      ++counts_[pick];
      sums_[pick] += xi;
      z_[i] = pick;
    }
  }

  double residual_sum() const {
    double q = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = x_[i] - means_[z_[i]];
      q += r * r;
    }
    return q;
  }

  void drop(int j) {
    counts_.erase(counts_.begin() + j);
    sums_.erase(sums_.begin() + j);
    means_.erase(means_.begin() + j);
    for (int& zi : z_) {
      if (zi > j) --zi;
    }
  }

  CcvConfig cfg_;
  std::vector<double> x_;
  std::vector<int> z_;
  std::vector<int> counts_;
  std::vector<double> sums_;
  std::vector<double> means_;
  HyperState hyper_;
};

inline PosteriorSample ccv_posterior(const Dataset& data, const CcvConfig& cfg,
                                     const McmcControl& ctl, const Grid& grid = Grid{}) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "CCV posterior needs observations");
  validate(cfg);
  validate(ctl);
  CcvChain chain(data, cfg);
  Rng rng(derive_seed(ctl.seed, 0, 3));

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
