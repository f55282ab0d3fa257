#include <gtest/gtest.h>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "frsens/geometry.hpp"
#include "frsens/sensitivity.hpp"
#include "test_support.hpp"

using namespace frsens;
using frsens::test_support::evaluate;
using frsens::test_support::linear_pdf;
using frsens::test_support::random_mixture;
using frsens::test_support::uniform_pdf;

namespace {

const Grid kGrid(512);

// Orthonormal (under Grid::inner) tangent directions at the uniform SRD.
std::vector<Eigen::VectorXd> cosine_directions(int count) {
  const Srd base = to_srd(uniform_pdf(kGrid));
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 1; k <= count; ++k) {
    Eigen::VectorXd v = evaluate(kGrid, [k](double x) {
      return std::sqrt(2.0) * std::cos(k * std::numbers::pi * x);
    });
    v -= kGrid.inner(v, base.values()) * base.values();
    for (const auto& u : dirs) v -= kGrid.inner(v, u) * u;
    dirs.push_back(v / kGrid.norm(v));
  }
  return dirs;
}

// Points exp(uniform, sum_k c_ik e_k) for coefficient rows c_i.
std::vector<Srd> from_coefficients(const Eigen::MatrixXd& coeffs,
                                   const std::vector<Eigen::VectorXd>& dirs) {
  const Srd base = to_srd(uniform_pdf(kGrid));
  std::vector<Srd> out;
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kGrid.size());
    for (Eigen::Index k = 0; k < coeffs.cols(); ++k) v += coeffs(i, k) * dirs[k];
    out.push_back(exp_map(base, project_to_tangent(base, v)));
  }
  return out;
}

// Rows +-s e_k for each listed direction, so the configuration is centered.
Eigen::MatrixXd symmetric_config(int dims, const std::vector<int>& active, double s) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * active.size(), dims);
  for (std::size_t j = 0; j < active.size(); ++j) {
    c(2 * j, active[j]) = s;
    c(2 * j + 1, active[j]) = -s;
  }
  return c;
}

Eigen::MatrixXd centered_random(int rows, int cols, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::MatrixXd c(rows, cols);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = z(rng);
  c.rowwise() -= c.colwise().mean();
  return c;
}

}  // namespace

TEST(EUpperBound, ClosedForm) {
  EXPECT_DOUBLE_EQ(e_upper_bound(2), 0.5);
  EXPECT_NEAR(e_upper_bound(4), std::sqrt(0.875), 1e-15);
  double direct = 0.0;
  for (int j = 1; j <= 19; ++j) direct += std::pow(1.0 - j / 20.0, 2);
  EXPECT_NEAR(e_upper_bound(20), std::sqrt(direct), 1e-12);
  // sum_{k=1}^{19} k^2 / 400 = 6.175.
  EXPECT_NEAR(e_upper_bound(20), std::sqrt(6.175), 1e-12);
  for (int d = 3; d <= 100; ++d) EXPECT_GE(e_upper_bound(d), e_upper_bound(d - 1));
  EXPECT_THROW(e_upper_bound(1), Error);
}

TEST(ReplicateBand, Quantiles) {
  const auto [clo, chi] = replicate_band(std::vector<double>(7, 2.5));
  EXPECT_EQ(clo, 2.5);
  EXPECT_EQ(chi, 2.5);

  std::vector<double> ramp(100);
  for (int i = 0; i < 100; ++i) ramp[i] = i + 1;
  std::shuffle(ramp.begin(), ramp.end(), std::mt19937_64(3));
  const auto [lo, hi] = replicate_band(ramp);
  EXPECT_NEAR(lo, 3.475, 1e-12);
  EXPECT_NEAR(hi, 97.525, 1e-12);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + trial);
    for (double& x : v) x = z(rng);
    const auto [a, b] = replicate_band(v);
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    const double median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    EXPECT_LE(a, median);
    EXPECT_GE(b, median);
  }
  try {
    replicate_band({1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientValues);
  }
}

TEST(MeasureD, IdentitySymmetryAndSingletons) {
  std::mt19937_64 rng(5);
  std::vector<Srd> a, b;
  for (int i = 0; i < 10; ++i) a.push_back(to_srd(random_mixture(kGrid, rng)));
  for (int i = 0; i < 10; ++i) b.push_back(to_srd(random_mixture(kGrid, rng)));
  const SampleSummary sa = summarize(a), sb = summarize(b);
  EXPECT_LT(measure_d(sa, summarize(a)), 1e-10);
  EXPECT_NEAR(measure_d(sa, sb), measure_d(sb, sa), 1e-10);
  EXPECT_GE(measure_d(sa, sb), 0.0);
  EXPECT_LE(measure_d(sa, sb), std::numbers::pi / 2);

  PosteriorSample u{{uniform_pdf(kGrid)}, DpConfig{}, 0, {}};
  PosteriorSample l{{linear_pdf(kGrid)}, DpConfig{}, 0, {}};
  const double oracle = std::acos(2.0 * std::sqrt(2.0) / 3.0);
  EXPECT_NEAR(measure_d(u, l), oracle, 1e-4);
}

TEST(MeasureV, TangentScalingGivesLogNine) {
  const auto dirs = cosine_directions(4);
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd c = centered_random(30, 4, rng, 0.02);
  const SampleSummary base = summarize(from_coefficients(c, dirs));
  const SampleSummary wide = summarize(from_coefficients(3.0 * c, dirs));
  EXPECT_NEAR(measure_v(base, wide), std::log(9.0), 0.05);
  EXPECT_EQ(measure_v(base, wide), -measure_v(wide, base));
  EXPECT_EQ(measure_v(base, base), 0.0);
}

TEST(MeasureV, PermutationInvariant) {
  std::mt19937_64 rng(7);
  std::vector<Srd> a, b;
  for (int i = 0; i < 15; ++i) a.push_back(to_srd(random_mixture(kGrid, rng)));
  for (int i = 0; i < 15; ++i) b.push_back(to_srd(random_mixture(kGrid, rng)));
  const double v = measure_v(summarize(a), summarize(b));
  std::reverse(a.begin(), a.end());
  std::shuffle(b.begin(), b.end(), rng);
  EXPECT_NEAR(measure_v(summarize(a), summarize(b)), v, 1e-10);
}

TEST(MeasureV, DegenerateSample) {
  std::mt19937_64 rng(8);
  const Srd one = to_srd(random_mixture(kGrid, rng));
  const SampleSummary flat = summarize(std::vector<Srd>(5, one));
  std::vector<Srd> spread;
  for (int i = 0; i < 5; ++i) spread.push_back(to_srd(random_mixture(kGrid, rng)));
  try {
    measure_v(flat, summarize(spread));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSample);
  }
}

TEST(MeasureE, RankOneVersusIsotropic) {
  const auto dirs = cosine_directions(4);
  // Base: spread along e_1 only. Pert: equal spread along e_1..e_4.
  Eigen::MatrixXd base_c = Eigen::MatrixXd::Zero(8, 4);
  const double steps[] = {0.02, 0.05, 0.08, 0.11};
  for (int j = 0; j < 4; ++j) {
    base_c(2 * j, 0) = steps[j];
    base_c(2 * j + 1, 0) = -steps[j];
  }
  const Eigen::MatrixXd pert_c = symmetric_config(4, {0, 1, 2, 3}, 0.05);
  const SampleSummary base = summarize(from_coefficients(base_c, dirs));
  const SampleSummary pert = summarize(from_coefficients(pert_c, dirs));
  const double e = measure_e(base, pert, 4);
  EXPECT_NEAR(e, std::sqrt(0.75 * 0.75 + 0.5 * 0.5 + 0.25 * 0.25), 0.02);
  EXPECT_LE(e, e_upper_bound(4) + 1e-12);
  EXPECT_LT(measure_e(base, base, 4), 1e-10);
}

TEST(MeasureE, RotationInvariance) {
  const auto dirs = cosine_directions(5);
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd base_c = centered_random(12, 5, rng, 0.03);
  Eigen::MatrixXd pert_c = centered_random(12, 5, rng, 0.03);
  pert_c.col(0) *= 2.0;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(centered_random(5, 5, rng, 1.0) +
                                                 Eigen::MatrixXd::Identity(5, 5));
  const Eigen::MatrixXd rot = qr.householderQ();
  const SampleSummary base = summarize(from_coefficients(base_c, dirs));
  const double e = measure_e(base, summarize(from_coefficients(pert_c, dirs)), 3);
  const double e_rot = measure_e(base, summarize(from_coefficients(pert_c * rot, dirs)), 3);
  EXPECT_LT(std::abs(e - e_rot), 1e-3);
}

TEST(MeasureE, BoundsAndInsufficientSamples) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Srd> a, b;
    for (int i = 0; i < 25; ++i) a.push_back(to_srd(random_mixture(kGrid, rng)));
    for (int i = 0; i < 25; ++i) b.push_back(to_srd(random_mixture(kGrid, rng)));
    const MeasureTriple m = measure_all(summarize(a), summarize(b));
    EXPECT_GE(m.e_covshape, 0.0);
    EXPECT_LE(m.e_covshape, e_upper_bound(20));
    EXPECT_EQ(m.d_components, 20);
  }
  std::vector<Srd> small;
  for (int i = 0; i < 20; ++i) small.push_back(to_srd(random_mixture(kGrid, rng)));
  const SampleSummary s = summarize(small);
  try {
    measure_e(s, s, 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
  }
}

TEST(CumulativeSpectrum, Shape) {
  Eigen::VectorXd lambda(6);
  lambda << 4.0, 2.0, 1.0, 0.5, 0.25, 0.0;
  const auto w = CumulativeSpectrum::from_eigenvalues(lambda, 4);
  ASSERT_EQ(w.omega.size(), 4);
  EXPECT_EQ(w.omega[3], 1.0);
  EXPECT_NEAR(w.omega[0], 4.0 / 7.5, 1e-15);
  for (int k = 1; k < 4; ++k) EXPECT_GE(w.omega[k], w.omega[k - 1]);
}

TEST(MeasureAll, IdenticalSamplesGiveZeros) {
  std::mt19937_64 rng(11);
  std::vector<Srd> a;
  for (int i = 0; i < 30; ++i) a.push_back(to_srd(random_mixture(kGrid, rng)));
  const SampleSummary s = summarize(a);
  const MeasureTriple m = measure_all(s, s);
  EXPECT_EQ(m.d_shift, 0.0);
  EXPECT_EQ(m.v_spread, 0.0);
  EXPECT_EQ(m.e_covshape, 0.0);
}
