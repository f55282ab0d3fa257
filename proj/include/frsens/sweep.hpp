#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "frsens/dataset.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"
#include "frsens/karcher.hpp"
#include "frsens/models.hpp"
#include "frsens/random.hpp"
#include "frsens/samplers.hpp"
#include "frsens/sensitivity.hpp"

namespace frsens {

/// How perturbed runs are seeded relative to their replicate's baseline run.
enum class SeedMode {
  shared,  // same stream as the baseline: the baseline value reproduces it exactly
  fresh    // an independent stream per (value, replicate)
};

struct SweepSpec {
  ModelConfig baseline = DpgmmConfig{};
  std::string parameter = "alpha";
  std::vector<double> values;
  std::vector<double> band_values;
  int replicates = 25;
  McmcControl mcmc;
  int d_components = kDefaultComponents;
  double band_level = 0.95;
  SeedMode seed_mode = SeedMode::shared;
  bool average_replicates = false;
  int n_points = Grid::kDefaultPoints;
  KarcherOptions karcher;
  int threads = 1;  // 0 uses the hardware concurrency
  bool keep_baseline_sample = false;

  ModelTag model() const { return model_of(baseline); }
  double baseline_value() const { return get_parameter(baseline, parameter); }
};

struct BandRow {
  double value = 0.0;
  std::pair<double, double> d, v, e;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<MeasureTriple> measures;  // one per spec.values entry
  std::vector<std::vector<std::optional<MeasureTriple>>> by_replicate;  // [value][replicate]
  std::vector<BandRow> bands;
  std::vector<std::uint64_t> baseline_seeds;  // one per replicate
  std::vector<std::string> warnings;
  std::optional<PosteriorSample> baseline_sample;  // replicate 1, on request
  double wall_seconds = 0.0;
};

inline constexpr int kRecommendedBandReplicates = 20;

inline std::uint64_t baseline_seed(std::uint64_t base, int replicate) {
  return derive_seed(base, static_cast<std::uint64_t>(replicate), 0);
}

inline std::uint64_t perturbed_seed(const SweepSpec& spec, int value_index, int replicate) {
  const std::uint64_t b = baseline_seed(spec.mcmc.seed, replicate);
  if (spec.seed_mode == SeedMode::shared) return b;
  return derive_seed(b, static_cast<std::uint64_t>(value_index), 1);
}

namespace detail {

inline bool contains(const std::vector<double>& xs, double x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

/// Runs fn(0..n-1) on up to `threads` workers. The first failure in index
/// order is rethrown after all workers finish.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string run_label(double value, int replicate) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " (value=%.12g, replicate=%d)", value, replicate + 1);
  return buf;
}

}  // namespace detail

/// Checks the sweep invariants; returns advisory warnings.
inline std::vector<std::string> validate(const SweepSpec& spec) {
  std::vector<std::string> warnings;
  validate(spec.baseline);
  validate(spec.mcmc);
  const double base_value = spec.baseline_value();
  if (spec.values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep has no values");
  for (double v : spec.values) {
    ModelConfig probe = spec.baseline;
    set_parameter(probe, spec.parameter, v);
    validate(probe);
  }
  if (!detail::contains(spec.values, base_value)) {
    throw Error(ErrorCode::InvalidConfig, "baseline value of '" + spec.parameter +
                                              "' is not among the sweep values");
  }
  for (double b : spec.band_values) {
    if (!detail::contains(spec.values, b)) {
      throw Error(ErrorCode::InvalidConfig, "band value is not among the sweep values");
    }
  }
  if (spec.replicates < 1) throw Error(ErrorCode::InvalidConfig, "replicates must be >= 1");
  if (!spec.band_values.empty()) {
    if (spec.replicates < 2) {
      throw Error(ErrorCode::InvalidConfig, "replicate bands need replicates >= 2");
    }
    if (spec.replicates < kRecommendedBandReplicates) {
      warnings.push_back("replicate bands from " + std::to_string(spec.replicates) +
                         " replicates (fewer than " +
                         std::to_string(kRecommendedBandReplicates) + ") are coarse");
    }
  }
  if (spec.d_components < 2) throw Error(ErrorCode::InvalidConfig, "d_components must be >= 2");
  if (spec.mcmc.n_samples <= spec.d_components) {
    throw Error(ErrorCode::InvalidConfig, "mcmc.n_samples must exceed d_components");
  }
  if (!(spec.band_level > 0.0 && spec.band_level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "band level must lie in (0, 1)");
  }
  if (spec.n_points < Grid::kMinPoints) {
    throw Error(ErrorCode::InvalidGrid, "n_points must be >= " + std::to_string(Grid::kMinPoints));
  }
  return warnings;
}

/// Runs every (value, replicate) sampler task and assembles the measures in
/// grid order. Replicate 1 covers all values; further replicates cover the
/// band values, or all values when averaging is requested.
inline SweepResult run_sweep(const Dataset& data, const SweepSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "sweep needs observations");
  SweepResult result;
  result.spec = spec;
  result.warnings = validate(spec);
  const Grid grid(spec.n_points);
  const double base_value = spec.baseline_value();
  const int n_values = static_cast<int>(spec.values.size());
  const int reps = spec.replicates;

  for (int r = 0; r < reps; ++r) result.baseline_seeds.push_back(baseline_seed(spec.mcmc.seed, r));

  auto control_for = [&](std::uint64_t seed) {
    McmcControl c = spec.mcmc;
    c.seed = seed;
    return c;
  };

  std::vector<std::optional<SampleSummary>> base(reps);
  detail::parallel_for(reps, spec.threads, [&](int r) {
    try {
      PosteriorSample s =
          sample_posterior(data, spec.baseline, control_for(result.baseline_seeds[r]), grid);
      base[r] = summarize(s, spec.karcher);
      if (r == 0 && spec.keep_baseline_sample) result.baseline_sample = std::move(s);
    } catch (const Error& e) {
      throw Error(e.code(), e.what() + detail::run_label(base_value, r));
    }
  });

  struct Task {
    int value_index;
    int replicate;
  };
  std::vector<Task> tasks;
  for (int r = 0; r < reps; ++r) {
    for (int v = 0; v < n_values; ++v) {
      const bool needed = r == 0 || spec.average_replicates ||
                          detail::contains(spec.band_values, spec.values[v]);
      if (needed) tasks.push_back({v, r});
    }
  }

  result.by_replicate.assign(n_values, std::vector<std::optional<MeasureTriple>>(reps));
  detail::parallel_for(static_cast<int>(tasks.size()), spec.threads, [&](int t) {
    const auto [v, r] = tasks[t];
    const double value = spec.values[v];
    try {
      if (spec.seed_mode == SeedMode::shared && value == base_value) {
        result.by_replicate[v][r] = measure_all(*base[r], *base[r], spec.d_components);
        return;
      }
      ModelConfig cfg = spec.baseline;
      set_parameter(cfg, spec.parameter, value);
      const PosteriorSample s =
          sample_posterior(data, cfg, control_for(perturbed_seed(spec, v, r)), grid);
      result.by_replicate[v][r] =
          measure_all(*base[r], summarize(s, spec.karcher), spec.d_components);
    } catch (const Error& e) {
      throw Error(e.code(), e.what() + detail::run_label(value, r));
    }
  });

  for (int v = 0; v < n_values; ++v) {
    if (!spec.average_replicates) {
      result.measures.push_back(*result.by_replicate[v][0]);
      continue;
    }
    MeasureTriple avg{0.0, 0.0, 0.0, spec.d_components};
    for (const auto& m : result.by_replicate[v]) {
      avg.d_shift += m->d_shift / reps;
      avg.v_spread += m->v_spread / reps;
      avg.e_covshape += m->e_covshape / reps;
    }
    result.measures.push_back(avg);
  }

  for (int v = 0; v < n_values; ++v) {
    if (!detail::contains(spec.band_values, spec.values[v])) continue;
    std::vector<double> ds, vs, es;
    for (const auto& m : result.by_replicate[v]) {
      ds.push_back(m->d_shift);
      vs.push_back(m->v_spread);
      es.push_back(m->e_covshape);
    }
    result.bands.push_back({spec.values[v], replicate_band(ds, spec.band_level),
                            replicate_band(vs, spec.band_level),
                            replicate_band(es, spec.band_level)});
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Preset perturbation grids.

inline constexpr int kPresetPoints = 15;

enum class Spacing { linear, geometric };

/// `points` values from lo to hi; if the baseline is not already a grid
/// point, it replaces the nearest interior point.
inline std::vector<double> ladder(double lo, double hi, int points, Spacing spacing,
                                  double baseline) {
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    xs[i] = spacing == Spacing::linear ? lo + t * (hi - lo)
                                       : lo * std::pow(hi / lo, t);
  }
  xs.front() = lo;
  xs.back() = hi;
  for (double& x : xs) {
    if (std::abs(x - baseline) <= 1e-9 * std::max(1.0, std::abs(baseline))) x = baseline;
  }
  if (!detail::contains(xs, baseline)) {
    int best = 1;
    for (int i = 1; i < points - 1; ++i) {
      if (std::abs(xs[i] - baseline) < std::abs(xs[best] - baseline)) best = i;
    }
    xs[best] = baseline;
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

struct SweepPreset {
  std::string name;  // "<model>.<parameter>"
  SweepSpec spec;
};

namespace detail {

inline SweepPreset make_preset(ModelConfig baseline, const std::string& parameter, double lo,
                               double hi, Spacing spacing) {
  SweepPreset p;
  p.name = std::string(model_name(model_of(baseline))) + "." + parameter;
  p.spec.baseline = std::move(baseline);
  p.spec.parameter = parameter;
  const double b = p.spec.baseline_value();
  p.spec.values = ladder(lo, hi, kPresetPoints, spacing, b);
  p.spec.band_values = {p.spec.values.front(), b, p.spec.values.back()};
  std::sort(p.spec.band_values.begin(), p.spec.band_values.end());
  p.spec.band_values.erase(std::unique(p.spec.band_values.begin(), p.spec.band_values.end()),
                           p.spec.band_values.end());
  return p;
}

template <class Config>
void add_hierarchical_presets(std::vector<SweepPreset>& out, const Config& base) {
  out.push_back(make_preset(base, "a0", 1.0, 20.0, Spacing::linear));
  out.push_back(make_preset(base, "a1", 1.0, 20.0, Spacing::linear));
  out.push_back(make_preset(base, "eta", 1.0, 20.0, Spacing::linear));
  out.push_back(make_preset(base, "gamma", 1.0, 20.0, Spacing::geometric));
}

}  // namespace detail

inline std::vector<SweepPreset> sweep_grid_presets(ModelTag model) {
  std::vector<SweepPreset> out;
  switch (model) {
    case ModelTag::dp: {
      out.push_back(detail::make_preset(DpConfig{}, "alpha", 0.1, 15.0, Spacing::geometric));
      DpConfig beta;
      beta.alpha = 10.0;
      beta.g0 = BaseMeasure::beta(5.0, 5.0);
      out.push_back(detail::make_preset(beta, "g0_b", 1.0, 15.0, Spacing::linear));
      break;
    }
    case ModelTag::dpgmm: {
      const DpgmmConfig b;
      out.push_back(detail::make_preset(b, "alpha", 0.1, 15.0, Spacing::geometric));
      out.push_back(detail::make_preset(b, "m", -8.0, 8.0, Spacing::linear));
      out.push_back(detail::make_preset(b, "r", 1.0 / 18.0, 6.0, Spacing::geometric));
      out.push_back(detail::make_preset(b, "nu", 1.0, 15.0, Spacing::linear));
      out.push_back(detail::make_preset(b, "s", 0.1, 12.0, Spacing::geometric));
      break;
    }
    case ModelTag::ccv:
      detail::add_hierarchical_presets(out, CcvConfig{});
      break;
    case ModelTag::dcv:
      detail::add_hierarchical_presets(out, DcvConfig{});
      out.push_back(detail::make_preset(DcvConfig{}, "phi", 1.5, 20.0, Spacing::geometric));
      break;
    default:
      throw Error(ErrorCode::UnknownModel, "unknown model tag");
  }
  return out;
}

/// Looks a preset up by "<model>.<parameter>".
inline SweepPreset find_preset(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) {
    throw Error(ErrorCode::ConfigBadParam, "preset name must be <model>.<parameter>: " + name);
  }
  for (SweepPreset& p : sweep_grid_presets(parse_model(name.substr(0, dot)))) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::ConfigBadParam, "unknown preset '" + name + "'");
}

}  // namespace frsens
