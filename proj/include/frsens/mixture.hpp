#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <vector>

#include "frsens/dataset.hpp"
#include "frsens/density.hpp"
#include "frsens/grid.hpp"

namespace frsens {

inline double normal_log_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
}

/// Location-scale Student t with `dof` degrees of freedom and squared scale `scale2`.
inline double student_t_log_pdf(double x, double dof, double loc, double scale2) {
  const double z = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi * scale2) -
         0.5 * (dof + 1.0) * std::log1p(z / dof);
}

/// Accumulates a weighted mixture evaluated at the grid abscissae mapped to
/// model units, then normalizes it on the unit interval.
class GridMixture {
 public:
  GridMixture(const Grid& grid, const Dataset& data)
      : grid_(grid), x_(data.model_abscissae(grid)),
        acc_(Eigen::VectorXd::Zero(grid.size())) {}

  const Eigen::VectorXd& abscissae() const noexcept { return x_; }

  void add_normal(double weight, double mean, double var) {
    const double c = weight / std::sqrt(2.0 * std::numbers::pi * var);
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      const double z = x_[i] - mean;
      acc_[i] += c * std::exp(-0.5 * z * z / var);
    }
  }

  void add_student_t(double weight, double dof, double loc, double scale2) {
    const double log_c = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                         0.5 * std::log(dof * std::numbers::pi * scale2);
    const double c = weight * std::exp(log_c);
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      const double z = (x_[i] - loc) * (x_[i] - loc) / scale2;
      acc_[i] += c * std::exp(-0.5 * (dof + 1.0) * std::log1p(z / dof));
    }
  }

  void add_values(double weight, const Eigen::VectorXd& values) { acc_ += weight * values; }

  GridPdf finish() const { return normalize_pdf(grid_, acc_); }

 private:
  Grid grid_;
  Eigen::VectorXd x_;
  Eigen::VectorXd acc_;
};

}  // namespace frsens
