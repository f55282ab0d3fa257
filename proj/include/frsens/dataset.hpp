#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "frsens/error.hpp"
#include "frsens/grid.hpp"

namespace frsens {

/// Observations in model units plus the affine map onto the unit interval.
/// The map sends [min, max] of the observations to [margin, 1 - margin].
class Dataset {
 public:
  static constexpr double kMargin = 0.05;

  Dataset() = default;

  static Dataset from_values(std::vector<double> values, std::string name = "data") {
    if (values.empty()) throw Error(ErrorCode::EmptyDataset, "dataset '" + name + "' is empty");
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "dataset '" + name + "' has a non-finite value");
      }
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    Dataset d;
    if (*hi > *lo) {
      d.scale_ = (1.0 - 2.0 * kMargin) / (*hi - *lo);
      d.shift_ = kMargin - d.scale_ * *lo;
    } else {
      // A single distinct value sits at the middle of the unit interval.
      d.scale_ = 1.0;
      d.shift_ = 0.5 - *lo;
    }
    d.values_ = std::move(values);
    d.name_ = std::move(name);
    return d;
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double shift() const noexcept { return shift_; }
  double scale() const noexcept { return scale_; }

  double to_unit(double x) const { return shift_ + scale_ * x; }
  double from_unit(double u) const { return (u - shift_) / scale_; }

  std::vector<double> unit_values() const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [this](double x) { return to_unit(x); });
    return out;
  }

  /// Grid abscissae expressed in model units.
  Eigen::VectorXd model_abscissae(const Grid& g) const {
    Eigen::VectorXd x(g.size());
    for (int i = 0; i < g.size(); ++i) x[i] = from_unit(g.abscissa(i));
    return x;
  }

  double mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / size();
  }

  /// Sample variance (n - 1 denominator); zero for a single observation.
  double variance() const {
    if (size() < 2) return 0.0;
    const double m = mean();
    double acc = 0.0;
    for (double v : values_) acc += (v - m) * (v - m);
    return acc / (size() - 1);
  }

 private:
  std::vector<double> values_;
  std::string name_;
  double shift_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace frsens
