#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "frsens/crp.hpp"
#include "frsens/dataset.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"
#include "frsens/mixture.hpp"
#include "frsens/models.hpp"
#include "frsens/random.hpp"

namespace frsens {

/// Normal-Gamma conjugate component: precision R ~ Gamma(nu/2, rate nu*s/2),
/// mean | R ~ N(m, 1/(r R)). Integrating both out gives Student t predictives.
class NormalGammaComponent {
 public:
  struct Stats {
    int n = 0;
    double sum = 0.0;
    double sumsq = 0.0;
  };

  struct Posterior {
    double r, m, a, b;

    double predictive_dof() const { return 2.0 * a; }
    double predictive_scale2() const { return b * (r + 1.0) / (a * r); }
  };

  explicit NormalGammaComponent(const DpgmmConfig& cfg) : cfg_(cfg) {}

  void add(Stats& s, double x) const {
    ++s.n;
    s.sum += x;
    s.sumsq += x * x;
  }

  void remove(Stats& s, double x) const {
    --s.n;
    s.sum -= x;
    s.sumsq -= x * x;
    if (s.n == 0) s = Stats{};
  }

  Posterior posterior(const Stats& s) const {
    const double a0 = 0.5 * cfg_.nu;
    const double b0 = 0.5 * cfg_.nu * cfg_.s;
    if (s.n == 0) return {cfg_.r, cfg_.m, a0, b0};
    const double n = s.n;
    const double mean = s.sum / n;
    const double ss = std::max(0.0, s.sumsq - n * mean * mean);
    const double rn = cfg_.r + n;
    const double dm = mean - cfg_.m;
    return {rn, (cfg_.r * cfg_.m + s.sum) / rn, a0 + 0.5 * n,
            b0 + 0.5 * ss + cfg_.r * n * dm * dm / (2.0 * rn)};
  }

  double log_predictive(const Stats& s, double x) const {
    const Posterior p = posterior(s);
    return student_t_log_pdf(x, p.predictive_dof(), p.m, p.predictive_scale2());
  }

 private:
  DpgmmConfig cfg_;
};

/// Conditional predictive density of a collapsed state:
/// sum_j n_j/(n+alpha) t_j + alpha/(n+alpha) t_prior.
inline GridPdf dpgmm_state_density(const CollapsedGibbs<NormalGammaComponent>& chain,
                                   const Grid& grid, const Dataset& data) {
  GridMixture mix(grid, data);
  const double denom = chain.size() + chain.alpha();
  const auto& model = chain.model();
  for (int j = 0; j < chain.clusters(); ++j) {
    const auto p = model.posterior(chain.tables()[j]);
    mix.add_student_t(chain.counts()[j] / denom, p.predictive_dof(), p.m,
                      p.predictive_scale2());
  }
  const auto p0 = model.posterior({});
  mix.add_student_t(chain.alpha() / denom, p0.predictive_dof(), p0.m, p0.predictive_scale2());
  return mix.finish();
}

inline PosteriorSample dpgmm_posterior(const Dataset& data, const DpgmmConfig& cfg,
                                       const McmcControl& ctl, const Grid& grid = Grid{}) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "DPGMM posterior needs observations");
  validate(cfg);
  validate(ctl);
  CollapsedGibbs<NormalGammaComponent> chain(NormalGammaComponent(cfg), data.values(),
                                             cfg.alpha);
  Rng rng(derive_seed(ctl.seed, 0, 2));

  PosteriorSample out{{}, cfg, ctl.seed, {}};
  out.pdfs.reserve(ctl.n_samples);
  for (int t = 0; t < ctl.burn_in; ++t) chain.sweep(rng);
  for (int kept = 0; kept < ctl.n_samples; ++kept) {
    for (int t = 0; t < ctl.thin; ++t) chain.sweep(rng);
    out.pdfs.push_back(dpgmm_state_density(chain, grid, data));

    StateSummary s;
    s.clusters = chain.clusters();
    s.alpha = cfg.alpha;
    s.counts = chain.counts();
    for (const auto& table : chain.tables()) {
      const auto p = chain.model().posterior(table);
      s.means.push_back(p.m);
      s.variances.push_back(p.b / p.a);
    }
    out.trace.push_back(std::move(s));
  }
  return out;
}

}  // namespace frsens
