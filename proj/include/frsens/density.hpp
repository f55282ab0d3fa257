#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <utility>

#include "frsens/error.hpp"
#include "frsens/grid.hpp"

namespace frsens {

inline constexpr double kUnitIntegralTol = 1e-8;
inline constexpr double kTangentTol = 1e-6;

namespace detail {

inline void require_nonnegative(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      throw Error(ErrorCode::NegativeValue,
                  std::string(what) + " has negative or NaN value at index " +
                      std::to_string(i));
    }
  }
}

}  // namespace detail

/// A probability density on [0,1] sampled on a Grid.
class GridPdf {
 public:
  GridPdf(Grid grid, Eigen::VectorXd values)
      : grid_(grid), values_(std::move(values)) {
    grid_.require_size(values_);
    detail::require_nonnegative(values_, "density");
    const double mass = grid_.integrate(values_);
    if (std::abs(mass - 1.0) > kUnitIntegralTol) {
      throw Error(ErrorCode::InvalidDensity,
                  "density integrates to " + std::to_string(mass));
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](int i) const { return values_[i]; }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

/// Square-root density: nonnegative, unit L2 norm under the trapezoid rule.
class Srd {
 public:
  Srd(Grid grid, Eigen::VectorXd values)
      : grid_(grid), values_(std::move(values)) {
    grid_.require_size(values_);
    detail::require_nonnegative(values_, "square-root density");
    const double sq = grid_.inner(values_, values_);
    if (std::abs(sq - 1.0) > kUnitIntegralTol) {
      throw Error(ErrorCode::InvalidDensity,
                  "square-root density has squared norm " + std::to_string(sq));
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](int i) const { return values_[i]; }

  friend bool operator==(const Srd& a, const Srd& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

/// Element of the tangent space at `base`.
class TangentVector {
 public:
  TangentVector(Srd base, Eigen::VectorXd values)
      : base_(std::move(base)), values_(std::move(values)) {
    base_.grid().require_size(values_);
    const double along = base_.grid().inner(values_, base_.values());
    if (std::abs(along) > kTangentTol) {
      throw Error(ErrorCode::NotTangent,
                  "vector has component " + std::to_string(along) +
                      " along its base point");
    }
  }

  const Srd& base() const noexcept { return base_; }
  const Grid& grid() const noexcept { return base_.grid(); }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double norm() const { return grid().norm(values_); }

 private:
  Srd base_;
  Eigen::VectorXd values_;
};

/// Scales a nonnegative grid function to unit trapezoidal integral.
inline GridPdf normalize_pdf(const Grid& grid, Eigen::VectorXd raw) {
  grid.require_size(raw);
  detail::require_nonnegative(raw, "raw density");
  if ((raw.array() == 0.0).all()) {
    throw Error(ErrorCode::AllZero, "cannot normalize an all-zero function");
  }
  raw /= grid.integrate(raw);
  return GridPdf(grid, std::move(raw));
}

/// Scales a nonnegative grid function to unit trapezoidal L2 norm.
inline Srd normalize_srd(const Grid& grid, Eigen::VectorXd raw) {
  grid.require_size(raw);
  detail::require_nonnegative(raw, "raw square-root density");
  const double n = grid.norm(raw);
  if (n == 0.0) {
    throw Error(ErrorCode::AllZero, "cannot normalize an all-zero function");
  }
  raw /= n;
  return Srd(grid, std::move(raw));
}

inline Srd to_srd(const GridPdf& p) {
  return normalize_srd(p.grid(), p.values().cwiseSqrt());
}

inline GridPdf from_srd(const Srd& psi) {
  return normalize_pdf(psi.grid(), psi.values().cwiseAbs2());
}

/// Removes the component of `values` along `base`.
inline TangentVector project_to_tangent(const Srd& base, Eigen::VectorXd values) {
  const Grid& g = base.grid();
  g.require_size(values);
  values -= g.inner(values, base.values()) * base.values();
  return TangentVector(base, std::move(values));
}

}  // namespace frsens
