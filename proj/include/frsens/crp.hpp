#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "frsens/error.hpp"
#include "frsens/random.hpp"

namespace frsens {

/// Collapsed Gibbs sampler over Chinese-restaurant partitions.
///
/// `Model` supplies a sufficient-statistics type `Stats` plus
///   void add(Stats&, double) const;
///   void remove(Stats&, double) const;
///   double log_predictive(const Stats&, double) const;
/// where a default-constructed Stats is an empty table, so its predictive is
/// the prior predictive. Empty tables are dropped immediately; the surviving
/// tables keep their relative order.
template <class Model>
class CollapsedGibbs {
 public:
  using Stats = typename Model::Stats;

  CollapsedGibbs(Model model, std::vector<double> x, double alpha)
      : model_(std::move(model)), x_(std::move(x)), alpha_(alpha), z_(x_.size(), 0) {
    if (x_.empty()) throw Error(ErrorCode::EmptyDataset, "no observations to cluster");
    tables_.emplace_back();
    for (double xi : x_) model_.add(tables_[0], xi);
    counts_.push_back(static_cast<int>(x_.size()));
  }

  void sweep(Rng& rng) {
    std::vector<double> logw;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double xi = x_[i];
      const int old = z_[i];
      model_.remove(tables_[old], xi);
      if (--counts_[old] == 0) drop(old);

      const int k = static_cast<int>(tables_.size());
      logw.resize(k + 1);
      for (int j = 0; j < k; ++j) {
        logw[j] = std::log(static_cast<double>(counts_[j])) +
                  model_.log_predictive(tables_[j], xi);
      }
      logw[k] = std::log(alpha_) + model_.log_predictive(Stats{}, xi);
      const int pick = rng.categorical_log(logw);
      if (pick == k) {
        tables_.emplace_back();
        counts_.push_back(0);
      }
      model_.add(tables_[pick], xi);
      ++counts_[pick];
      z_[i] = pick;
    }
  }

  int clusters() const noexcept { return static_cast<int>(tables_.size()); }
  const std::vector<int>& counts() const noexcept { return counts_; }
  const std::vector<Stats>& tables() const noexcept { return tables_; }
  const std::vector<int>& assignments() const noexcept { return z_; }
  const Model& model() const noexcept { return model_; }
  double alpha() const noexcept { return alpha_; }
  int size() const noexcept { return static_cast<int>(x_.size()); }

 private:
  void drop(int j) {
    tables_.erase(tables_.begin() + j);
    counts_.erase(counts_.begin() + j);
    for (int& zi : z_) {
      if (zi > j) --zi;
    }
  }

  Model model_;
  std::vector<double> x_;
  double alpha_;
  std::vector<int> z_;
  std::vector<Stats> tables_;
  std::vector<int> counts_;
};

/// Component model with a constant likelihood: the chain then targets the
/// CRP prior over partitions.
struct FlatComponent {
  struct Stats {};
  void add(Stats&, double) const {}
  void remove(Stats&, double) const {}
  double log_predictive(const Stats&, double) const { return 0.0; }
};

/// Number of tables after each of `draws` sweeps of an assignment-only chain
/// on n customers.
inline std::vector<int> crp_prior_cluster_counts(int n, double alpha, int draws, int burn_in,
                                                 std::uint64_t seed) {
  CollapsedGibbs<FlatComponent> chain({}, std::vector<double>(n, 0.0), alpha);
  Rng rng(seed);
  for (int t = 0; t < burn_in; ++t) chain.sweep(rng);
  std::vector<int> out;
  out.reserve(draws);
  for (int t = 0; t < draws; ++t) {
    chain.sweep(rng);
    out.push_back(chain.clusters());
  }
  return out;
}

}  // namespace frsens
