#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "frsens/sweep.hpp"
#include "test_support.hpp"

using namespace frsens;
using frsens::test_support::three_component_sample;

namespace {

SweepSpec small_spec() {
  SweepSpec spec;
  spec.baseline = DpgmmConfig{};
  spec.parameter = "alpha";
  spec.values = {0.3, 1.0, 4.0};
  spec.band_values = {1.0, 4.0};
  spec.replicates = 3;
  spec.mcmc = {.n_samples = 30, .burn_in = 50, .thin = 1, .seed = 123};
  spec.d_components = 5;
  spec.n_points = 128;
  return spec;
}

const Dataset& small_data() {
  static const Dataset d = Dataset::from_values(three_component_sample(40, 12));
  return d;
}

bool same_triples(const std::vector<MeasureTriple>& a, const std::vector<MeasureTriple>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].d_shift != b[i].d_shift || a[i].v_spread != b[i].v_spread ||
        a[i].e_covshape != b[i].e_covshape) {
      return false;
    }
  }
  return true;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Ladder, ContainsBaselineAndEndpoints) {
  const auto g = ladder(0.1, 15.0, 15, Spacing::geometric, 1.0);
  ASSERT_EQ(g.size(), 15u);
  EXPECT_EQ(g.front(), 0.1);
  EXPECT_EQ(g.back(), 15.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_NE(std::find(g.begin(), g.end(), 1.0), g.end());
  for (std::size_t i = 2; i < g.size(); ++i) {
    if (g[i - 1] != 1.0 && g[i] != 1.0 && g[i - 2] != 1.0) {
      EXPECT_NEAR(g[i] / g[i - 1], g[i - 1] / g[i - 2], 1e-9);
    }
  }
  const auto lin = ladder(-8.0, 8.0, 15, Spacing::linear, 0.0);
  EXPECT_NE(std::find(lin.begin(), lin.end(), 0.0), lin.end());
}

TEST(Presets, DocumentedRanges) {
  const auto dpgmm = sweep_grid_presets(ModelTag::dpgmm);
  const auto& alpha = find_preset("dpgmm.alpha").spec;
  EXPECT_EQ(alpha.values.front(), 0.1);
  EXPECT_EQ(alpha.values.back(), 15.0);
  EXPECT_TRUE(std::count(alpha.values.begin(), alpha.values.end(), 1.0));

  const auto& phi = find_preset("dcv.phi").spec;
  EXPECT_EQ(phi.values.front(), 1.5);
  EXPECT_EQ(phi.values.back(), 20.0);
  EXPECT_TRUE(std::count(phi.values.begin(), phi.values.end(), 2.0));

  const auto& r = find_preset("dpgmm.r").spec;
  EXPECT_NEAR(r.values.front(), 1.0 / 18.0, 1e-15);
  EXPECT_TRUE(std::count(r.values.begin(), r.values.end(), 1.0 / 9.0));

  for (ModelTag tag : {ModelTag::dp, ModelTag::dpgmm, ModelTag::ccv, ModelTag::dcv}) {
    for (const auto& p : sweep_grid_presets(tag)) {
      EXPECT_EQ(p.spec.values.size(), 15u) << p.name;
      EXPECT_TRUE(std::count(p.spec.values.begin(), p.spec.values.end(),
                             p.spec.baseline_value()))
          << p.name;
      EXPECT_NO_THROW(validate(p.spec)) << p.name;
    }
  }
  EXPECT_EQ(sweep_grid_presets(ModelTag::dcv).size(), 5u);
  EXPECT_EQ(code_of([] { find_preset("dpgmm.zeta"); }), ErrorCode::ConfigBadParam);
  EXPECT_EQ(code_of([] { find_preset("hdp.alpha"); }), ErrorCode::UnknownModel);
}

TEST(SweepSpec, Validation) {
  SweepSpec spec = small_spec();
  EXPECT_EQ(validate(spec).size(), 1u);  // fewer than 20 replicates for bands

  spec.parameter = "phi";
  EXPECT_EQ(code_of([&] { validate(spec); }), ErrorCode::ConfigBadParam);

  spec = small_spec();
  spec.values = {0.3, 4.0};
  spec.band_values = {4.0};
  EXPECT_EQ(code_of([&] { validate(spec); }), ErrorCode::InvalidConfig);

  spec = small_spec();
  spec.band_values = {2.0};
  EXPECT_EQ(code_of([&] { validate(spec); }), ErrorCode::InvalidConfig);

  spec = small_spec();
  spec.replicates = 1;
  EXPECT_EQ(code_of([&] { validate(spec); }), ErrorCode::InvalidConfig);

  spec = small_spec();
  spec.values = {-1.0, 1.0};
  spec.band_values = {};
  EXPECT_EQ(code_of([&] { validate(spec); }), ErrorCode::InvalidConfig);
}

TEST(RunSweep, BaselineValueIsExactlyZeroWithSharedSeeds) {
  const SweepResult r = run_sweep(small_data(), small_spec());
  ASSERT_EQ(r.measures.size(), 3u);
  EXPECT_EQ(r.measures[1].d_shift, 0.0);
  EXPECT_EQ(r.measures[1].v_spread, 0.0);
  EXPECT_EQ(r.measures[1].e_covshape, 0.0);
  for (const auto& m : r.measures) {
    EXPECT_GE(m.d_shift, 0.0);
    EXPECT_LE(m.d_shift, std::numbers::pi / 2);
    EXPECT_LE(m.e_covshape, e_upper_bound(5));
  }
  ASSERT_EQ(r.bands.size(), 2u);
  EXPECT_EQ(r.bands[0].value, 1.0);
  EXPECT_EQ(r.bands[0].d.first, 0.0);
  EXPECT_EQ(r.bands[0].d.second, 0.0);
  EXPECT_LE(r.bands[1].d.first, r.bands[1].d.second);
  EXPECT_EQ(r.baseline_seeds.size(), 3u);
  // Replicates beyond the first run only at band values.
  EXPECT_FALSE(r.by_replicate[0][1].has_value());
  EXPECT_TRUE(r.by_replicate[2][2].has_value());
}

TEST(RunSweep, DeterministicAcrossThreadCounts) {
  SweepSpec spec = small_spec();
  const SweepResult a = run_sweep(small_data(), spec);
  spec.threads = 4;
  const SweepResult b = run_sweep(small_data(), spec);
  EXPECT_TRUE(same_triples(a.measures, b.measures));
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    EXPECT_EQ(a.bands[i].v, b.bands[i].v);
    EXPECT_EQ(a.bands[i].e, b.bands[i].e);
  }
}

TEST(RunSweep, AddingReplicatesKeepsEarlierOnes) {
  SweepSpec spec = small_spec();
  spec.replicates = 2;
  const SweepResult two = run_sweep(small_data(), spec);
  spec.replicates = 3;
  const SweepResult three = run_sweep(small_data(), spec);
  for (int r = 0; r < 2; ++r) {
    EXPECT_EQ(two.baseline_seeds[r], three.baseline_seeds[r]);
    EXPECT_EQ(two.by_replicate[2][r]->d_shift, three.by_replicate[2][r]->d_shift);
  }
}

TEST(RunSweep, FreshSeedsGiveSamplingNoiseAtBaseline) {
  SweepSpec spec = small_spec();
  spec.seed_mode = SeedMode::fresh;
  spec.average_replicates = true;
  const SweepResult r = run_sweep(small_data(), spec);
  EXPECT_GT(r.measures[1].d_shift, 0.0);
  EXPECT_LT(r.bands[0].d.second, std::numbers::pi / 4);
  for (const auto& row : r.by_replicate) {
    for (const auto& m : row) EXPECT_TRUE(m.has_value());
  }
}

TEST(RunSweep, EmptyDataset) {
  EXPECT_EQ(code_of([] { run_sweep(Dataset{}, small_spec()); }), ErrorCode::EmptyDataset);
}
