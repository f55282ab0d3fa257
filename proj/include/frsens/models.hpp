#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frsens/density.hpp"
#include "frsens/error.hpp"

namespace frsens {

enum class ModelTag { dp, dpgmm, ccv, dcv };

inline constexpr std::string_view model_name(ModelTag tag) {
  switch (tag) {
    case ModelTag::dp: return "dp";
    case ModelTag::dpgmm: return "dpgmm";
    case ModelTag::ccv: return "ccv";
    case ModelTag::dcv: return "dcv";
  }
  return "?";
}

inline ModelTag parse_model(std::string_view name) {
  for (ModelTag t : {ModelTag::dp, ModelTag::dpgmm, ModelTag::ccv, ModelTag::dcv}) {
    if (model_name(t) == name) return t;
  }
  throw Error(ErrorCode::UnknownModel, "unknown model '" + std::string(name) + "'");
}

/// Centering measure of the plain DP model, on the unit interval.
struct BaseMeasure {
  enum class Kind { uniform, beta };
  Kind kind = Kind::uniform;
  double a = 1.0;  // Beta shapes; ignored for uniform
  double b = 1.0;

  static BaseMeasure uniform() { return {}; }
  static BaseMeasure beta(double a, double b) { return {Kind::beta, a, b}; }
};

struct DpConfig {
  double alpha = 5.0;
  BaseMeasure g0;
  int truncation = 200;  // minimum number of sticks
  std::optional<double> bandwidth;  // unset: Silverman rule on the unit-scale data
  int max_truncation = 100000;
};

/// Univariate conjugate DP Gaussian mixture. Component precision
/// R ~ Gamma(nu/2, rate nu*s/2), mean | R ~ N(m, 1/(r R)).
struct DpgmmConfig {
  double alpha = 1.0;
  double m = 0.0;
  double r = 1.0 / 9.0;
  double nu = 5.0;
  double s = 1.0;
};

/// Common component variance model with a Griffin-Steel prior on alpha.
struct CcvConfig {
  double a0 = 1.0;
  double a1 = 10.0;
  double mu00 = 0.0;
  double lambda0 = 0.01;
  double s0 = 2.0;  // sigma^-2 ~ Gamma(s0, rate s1)
  double s1 = 2.0;
  double eta = 3.0;
  double gamma = 5.0;
  std::optional<double> fixed_a;  // pins the smoothness parameter (diagnostics)
};

/// Different component variance model: CCV plus an inverse-gamma scale per
/// component, zeta^-1 ~ Gamma(phi, 1).
struct DcvConfig : CcvConfig {
  double phi = 2.0;
  int aux_m = 3;
};

using ModelConfig = std::variant<DpConfig, DpgmmConfig, CcvConfig, DcvConfig>;

inline ModelTag model_of(const ModelConfig& cfg) {
  return static_cast<ModelTag>(cfg.index());
}

inline ModelConfig default_config(ModelTag tag) {
  switch (tag) {
    case ModelTag::dp: return DpConfig{};
    case ModelTag::dpgmm: return DpgmmConfig{};
    case ModelTag::ccv: return CcvConfig{};
    case ModelTag::dcv: return DcvConfig{};
  }
  throw Error(ErrorCode::UnknownModel, "unknown model tag");
}

struct McmcControl {
  int n_samples = 500;
  int burn_in = 1000;
  int thin = 5;
  std::uint64_t seed = 1;
};

inline void validate(const McmcControl& ctl) {
  if (ctl.n_samples < 10 || ctl.thin < 1 || ctl.burn_in < 0) {
    throw Error(ErrorCode::InvalidConfig,
                "mcmc needs n_samples >= 10, thin >= 1 and burn_in >= 0");
  }
}

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(name) + " must be positive and finite");
  }
}

}  // namespace detail

inline void validate(const DpConfig& c) {
  detail::require_positive(c.alpha, "alpha");
  if (c.truncation < 50) throw Error(ErrorCode::InvalidConfig, "truncation must be >= 50");
  if (c.max_truncation < c.truncation) {
    throw Error(ErrorCode::InvalidConfig, "max_truncation must be >= truncation");
  }
  if (c.g0.kind == BaseMeasure::Kind::beta) {
    detail::require_positive(c.g0.a, "g0_a");
    detail::require_positive(c.g0.b, "g0_b");
  }
  if (c.bandwidth) detail::require_positive(*c.bandwidth, "bandwidth");
}

inline void validate(const DpgmmConfig& c) {
  detail::require_positive(c.alpha, "alpha");
  detail::require_positive(c.r, "r");
  detail::require_positive(c.nu, "nu");
  detail::require_positive(c.s, "s");
  if (!std::isfinite(c.m)) throw Error(ErrorCode::InvalidConfig, "m must be finite");
}

inline void validate(const CcvConfig& c) {
  for (auto [v, n] : {std::pair{c.a0, "a0"}, {c.a1, "a1"}, {c.lambda0, "lambda0"},
                      {c.s0, "s0"}, {c.s1, "s1"}, {c.eta, "eta"}, {c.gamma, "gamma"}}) {
    detail::require_positive(v, n);
  }
  if (!std::isfinite(c.mu00)) throw Error(ErrorCode::InvalidConfig, "mu00 must be finite");
  if (c.fixed_a && !(*c.fixed_a > 0.0 && *c.fixed_a < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "fixed_a must lie in (0, 1)");
  }
}

inline void validate(const DcvConfig& c) {
  validate(static_cast<const CcvConfig&>(c));
  if (!(c.phi > 1.0) || !std::isfinite(c.phi)) {
    throw Error(ErrorCode::InvalidPhi, "phi must be greater than one");
  }
  if (c.aux_m < 1) throw Error(ErrorCode::InvalidConfig, "aux_m must be >= 1");
}

inline void validate(const ModelConfig& cfg) {
  std::visit([](const auto& c) { validate(c); }, cfg);
}

/// Summary of one retained chain state, for trace output and diagnostics.
struct StateSummary {
  int clusters = 0;
  double alpha = 0.0;
  double a = std::nan("");
  double sigma2 = std::nan("");
  double mu0 = std::nan("");
  std::vector<int> counts;
  std::vector<double> means;
  std::vector<double> variances;
};

struct PosteriorSample {
  std::vector<GridPdf> pdfs;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<StateSummary> trace;

  ModelTag model() const { return model_of(config); }
};

// Scalar fields addressable by name in sweeps and config files.

inline std::vector<std::string> parameter_names(ModelTag tag) {
  switch (tag) {
    case ModelTag::dp: return {"alpha", "g0_a", "g0_b", "bandwidth"};
    case ModelTag::dpgmm: return {"alpha", "m", "r", "nu", "s"};
    case ModelTag::ccv:
      return {"a0", "a1", "mu00", "lambda0", "s0", "s1", "eta", "gamma"};
    case ModelTag::dcv:
      return {"a0", "a1", "mu00", "lambda0", "s0", "s1", "eta", "gamma", "phi"};
  }
  return {};
}

namespace detail {

inline double* ccv_field(CcvConfig& c, std::string_view name) {
  if (name == "a0") return &c.a0;
  if (name == "a1") return &c.a1;
  if (name == "mu00") return &c.mu00;
  if (name == "lambda0") return &c.lambda0;
  if (name == "s0") return &c.s0;
  if (name == "s1") return &c.s1;
  if (name == "eta") return &c.eta;
  if (name == "gamma") return &c.gamma;
  return nullptr;
}

inline double* field(ModelConfig& cfg, std::string_view name) {
  struct Visitor {
    std::string_view name;
    double* operator()(DpConfig& c) const {
      if (name == "alpha") return &c.alpha;
      if (c.g0.kind == BaseMeasure::Kind::beta) {
        if (name == "g0_a") return &c.g0.a;
        if (name == "g0_b") return &c.g0.b;
      }
      if (name == "bandwidth" && c.bandwidth) return &*c.bandwidth;
      return nullptr;
    }
    double* operator()(DpgmmConfig& c) const {
      if (name == "alpha") return &c.alpha;
      if (name == "m") return &c.m;
      if (name == "r") return &c.r;
      if (name == "nu") return &c.nu;
      if (name == "s") return &c.s;
      return nullptr;
    }
    double* operator()(CcvConfig& c) const { return ccv_field(c, name); }
    double* operator()(DcvConfig& c) const {
      if (name == "phi") return &c.phi;
      return ccv_field(c, name);
    }
  };
  return std::visit(Visitor{name}, cfg);
}

}  // namespace detail

inline bool has_parameter(const ModelConfig& cfg, std::string_view name) {
  ModelConfig copy = cfg;
  return detail::field(copy, name) != nullptr;
}

inline double get_parameter(const ModelConfig& cfg, std::string_view name) {
  ModelConfig copy = cfg;
  double* f = detail::field(copy, name);
  if (!f) {
    throw Error(ErrorCode::ConfigBadParam,
                "model '" + std::string(model_name(model_of(cfg))) +
                    "' has no scalar parameter '" + std::string(name) + "'");
  }
  return *f;
}

inline void set_parameter(ModelConfig& cfg, std::string_view name, double value) {
  double* f = detail::field(cfg, name);
  if (!f) {
    throw Error(ErrorCode::ConfigBadParam,
                "model '" + std::string(model_name(model_of(cfg))) +
                    "' has no scalar parameter '" + std::string(name) + "'");
  }
  *f = value;
}

}  // namespace frsens
