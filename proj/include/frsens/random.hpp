#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace frsens {

/// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for run `index` of stream `stream` derived from `base`. Depends only
/// on its arguments, so adding runs never perturbs earlier ones.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                           std::uint64_t stream = 0) {
  return mix64(mix64(mix64(base) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

/// Per-run random stream. Not shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u = 0.0;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * std_normal_(engine_);
  }

  /// Gamma with shape/rate parameterization.
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_) / rate;
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    const double s = x + y;
    if (s == 0.0) return a / (a + b);
    return x / s;
  }

  int uniform_index(int n) {
    return std::min(n - 1, static_cast<int>(uniform() * n));
  }

  /// Index drawn proportionally to nonnegative weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      target -= weights[k];
      if (target < 0.0) return static_cast<int>(k);
    }
    for (std::size_t k = weights.size(); k-- > 0;) {
      if (weights[k] > 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// Index drawn proportionally to exp(log_weights); overwrites the input.
  int categorical_log(std::span<double> log_weights) {
    double top = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) top = std::max(top, lw);
    for (double& lw : log_weights) lw = std::exp(lw - top);
    return categorical(log_weights);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace frsens
