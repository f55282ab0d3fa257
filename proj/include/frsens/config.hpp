#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "frsens/error.hpp"
#include "frsens/models.hpp"
#include "frsens/sweep.hpp"

namespace frsens {

enum class Transform { none, log };

inline constexpr std::string_view transform_name(Transform t) {
  return t == Transform::log ? "log" : "none";
}

/// Everything a `sweep` run needs, resolved from a config file.
struct ExperimentConfig {
  std::filesystem::path dataset_path;  // absolute
  Transform transform = Transform::none;
  std::optional<std::string> preset;
  SweepSpec sweep;
  std::filesystem::path output_dir;  // absolute
  bool write_densities = false;
  bool write_trace = false;

  ModelTag model() const { return sweep.model(); }
};

/// Values that take precedence over the file contents.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> output_dir;
};

// Number formatting and parsing shared by the config and CSV layers.

/// Shortest text that parses back to exactly `x`.
inline std::string format_exact(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_exact(std::uint64_t x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

/// One parsed INI section plus bookkeeping of which keys were consumed.
class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree* tree)
      : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }
  const std::string& name() const { return name_; }

  std::optional<std::string> text(const std::string& key) {
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    used_.insert(key);
    return std::string(trim(it->second.data()));
  }

  std::string required_text(const std::string& key) {
    auto v = text(key);
    if (!v || v->empty()) {
      throw Error(ErrorCode::ConfigMissing, "missing key '" + key + "' in [" + name_ + "]");
    }
    return *v;
  }

  template <class T>
  std::optional<T> number(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    const auto v = parse_number<T>(*t);
    if (!v) throw bad_value(key, *t, "a number");
    return v;
  }

  template <class T>
  void read(const std::string& key, T& target) {
    if (const auto v = number<T>(key)) target = *v;
  }

  std::optional<bool> flag(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true" || *t == "yes" || *t == "on" || *t == "1") return true;
    if (*t == "false" || *t == "no" || *t == "off" || *t == "0") return false;
    throw bad_value(key, *t, "true or false");
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    for (const std::string& item : split_list(*t)) {
      const auto v = parse_number<double>(item);
      if (!v) throw bad_value(key, item, "a comma-separated list of numbers");
      out.push_back(*v);
    }
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) {
        throw Error(ErrorCode::ConfigBadParam, "unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

  Error bad_value(const std::string& key, std::string_view value, const char* expected) const {
    return Error(ErrorCode::ParseError, "[" + name_ + "] " + key + " = '" + std::string(value) +
                                            "': expected " + expected);
  }

 private:
  std::string name_;
  const boost::property_tree::ptree* tree_;
  std::set<std::string> used_;
};

inline const std::vector<std::string>& known_sections() {
  static const std::vector<std::string> names = {"dataset", "model", "dp",       "dpgmm",
                                                 "ccv",     "dcv",   "sweep",    "mcmc",
                                                 "geometry", "output", "run"};
  return names;
}

/// Section names as written, including sections with no keys.
inline std::set<std::string> section_headers(const std::string& text) {
  std::set<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      names.emplace(trim(t.substr(1, t.size() - 2)));
    }
  }
  return names;
}

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& text) {
  std::filesystem::path p(text);
  if (p.is_relative()) p = base / p;
  return std::filesystem::weakly_canonical(p);
}

inline void read_optional_positive(Section& s, const std::string& key,
                                   std::optional<double>& target) {
  const auto t = s.text(key);
  if (!t) return;
  if (*t == "auto" || *t == "none") {
    target.reset();
    return;
  }
  const auto v = parse_number<double>(*t);
  if (!v) throw s.bad_value(key, *t, "a number, 'auto' or 'none'");
  target = *v;
}

inline void apply_model_block(Section& s, ModelConfig& cfg) {
  struct Visitor {
    Section& s;
    void common(CcvConfig& c) const {
      s.read("a0", c.a0);
      s.read("a1", c.a1);
      s.read("mu00", c.mu00);
      s.read("lambda0", c.lambda0);
      s.read("s0", c.s0);
      s.read("s1", c.s1);
      s.read("eta", c.eta);
      s.read("gamma", c.gamma);
      read_optional_positive(s, "fixed_a", c.fixed_a);
    }
    void operator()(DpConfig& c) const {
      s.read("alpha", c.alpha);
      if (const auto g0 = s.text("g0")) {
        if (*g0 == "uniform") {
          c.g0 = BaseMeasure::uniform();
        } else if (*g0 == "beta") {
          if (c.g0.kind != BaseMeasure::Kind::beta) c.g0 = BaseMeasure::beta(1.0, 1.0);
        } else {
          throw s.bad_value("g0", *g0, "'uniform' or 'beta'");
        }
      }
      if (c.g0.kind == BaseMeasure::Kind::beta) {
        s.read("g0_a", c.g0.a);
        s.read("g0_b", c.g0.b);
      }
      s.read("truncation", c.truncation);
      s.read("max_truncation", c.max_truncation);
      read_optional_positive(s, "bandwidth", c.bandwidth);
    }
    void operator()(DpgmmConfig& c) const {
      s.read("alpha", c.alpha);
      s.read("m", c.m);
      s.read("r", c.r);
      s.read("nu", c.nu);
      s.read("s", c.s);
    }
    void operator()(CcvConfig& c) const { common(c); }
    void operator()(DcvConfig& c) const {
      common(c);
      s.read("phi", c.phi);
      s.read("aux_m", c.aux_m);
    }
  };
  std::visit(Visitor{s}, cfg);
}

inline SeedMode parse_seed_mode(Section& s) {
  const auto t = s.text("seed_mode");
  if (!t || *t == "shared") return SeedMode::shared;
  if (*t == "fresh") return SeedMode::fresh;
  throw s.bad_value("seed_mode", *t, "'shared' or 'fresh'");
}

inline std::vector<double> default_band_values(const SweepSpec& spec) {
  std::vector<double> b = {*std::min_element(spec.values.begin(), spec.values.end()),
                           spec.baseline_value(),
                           *std::max_element(spec.values.begin(), spec.values.end())};
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace detail

/// Builds an ExperimentConfig from INI text. Relative paths resolve against
/// `base_dir`.
inline ExperimentConfig parse_config(const std::string& text,
                                     const std::filesystem::path& base_dir,
                                     const ConfigOverrides& overrides = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, "config line " + std::to_string(e.line()) + ": " +
                                           e.message());
  }
  const auto& known = detail::known_sections();
  for (const auto& [name, child] : tree) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      if (child.empty()) {
        throw Error(ErrorCode::ParseError, "key '" + name + "' appears outside any section");
      }
      throw Error(ErrorCode::ConfigBadParam, "unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return detail::Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;

  detail::Section dataset = section("dataset");
  if (!dataset.present()) throw Error(ErrorCode::ConfigMissing, "missing section [dataset]");
  cfg.dataset_path = detail::resolve(base_dir, dataset.required_text("path"));
  if (!std::filesystem::is_regular_file(cfg.dataset_path)) {
    throw Error(ErrorCode::IoError, "dataset file not found: " + cfg.dataset_path.string());
  }
  if (const auto t = dataset.text("transform")) {
    if (*t == "log") {
      cfg.transform = Transform::log;
    } else if (*t != "none") {
      throw dataset.bad_value("transform", *t, "'none' or 'log'");
    }
  }
  dataset.reject_unknown();

  std::vector<ModelTag> blocks;
  const std::set<std::string> headers = detail::section_headers(text);
  for (ModelTag t : {ModelTag::dp, ModelTag::dpgmm, ModelTag::ccv, ModelTag::dcv}) {
    if (headers.count(std::string(model_name(t)))) blocks.push_back(t);
  }
  detail::Section model = section("model");
  std::optional<ModelTag> declared;
  if (const auto t = model.text("type")) declared = parse_model(*t);
  model.reject_unknown();
  if (blocks.size() > 1) {
    throw Error(ErrorCode::InvalidConfig, "config has more than one model block");
  }
  if (blocks.empty() && !declared) {
    throw Error(ErrorCode::ConfigMissing, "config has no model block");
  }
  if (declared && !blocks.empty() && blocks.front() != *declared) {
    throw Error(ErrorCode::InvalidConfig,
                "[model] type does not match the [" + std::string(model_name(blocks.front())) +
                    "] block");
  }
  const ModelTag tag = declared ? *declared : blocks.front();

  detail::Section sweep = section("sweep");
  if (!sweep.present()) throw Error(ErrorCode::ConfigMissing, "missing section [sweep]");
  cfg.preset = sweep.text("preset");
  if (overrides.preset) cfg.preset = overrides.preset;
  if (cfg.preset && cfg.preset->empty()) cfg.preset.reset();
  SweepSpec& spec = cfg.sweep;
  spec.baseline = default_config(tag);
  if (cfg.preset) {
    const SweepPreset p = find_preset(*cfg.preset);
    if (p.spec.model() != tag) {
      throw Error(ErrorCode::ConfigBadParam,
                  "preset '" + *cfg.preset + "' does not belong to model '" +
                      std::string(model_name(tag)) + "'");
    }
    spec.baseline = p.spec.baseline;
    spec.parameter = p.spec.parameter;
    spec.values = p.spec.values;
    spec.band_values = p.spec.band_values;
  }

  detail::Section block = section(std::string(model_name(tag)));
  detail::apply_model_block(block, spec.baseline);
  block.reject_unknown();

  if (const auto p = sweep.text("parameter")) {
    if (cfg.preset && *p != spec.parameter) {
      throw Error(ErrorCode::ConfigBadParam, "sweep parameter '" + *p +
                                                 "' conflicts with preset '" + *cfg.preset + "'");
    }
    spec.parameter = *p;
  } else if (!cfg.preset) {
    throw Error(ErrorCode::ConfigMissing, "missing key 'parameter' in [sweep]");
  }
  if (!has_parameter(spec.baseline, spec.parameter)) {
    get_parameter(spec.baseline, spec.parameter);
  }
  if (auto v = sweep.numbers("values")) {
    spec.values = std::move(*v);
  } else if (!cfg.preset) {
    throw Error(ErrorCode::ConfigMissing, "missing key 'values' in [sweep]");
  }
  if (spec.values.empty()) throw Error(ErrorCode::InvalidConfig, "[sweep] values is empty");
  std::sort(spec.values.begin(), spec.values.end());
  if (auto b = sweep.numbers("band_values")) {
    spec.band_values = std::move(*b);
    std::sort(spec.band_values.begin(), spec.band_values.end());
  } else if (!cfg.preset) {
    spec.band_values = detail::default_band_values(spec);
  }
  sweep.read("replicates", spec.replicates);
  sweep.read("band_level", spec.band_level);
  spec.seed_mode = detail::parse_seed_mode(sweep);
  if (const auto a = sweep.flag("average")) spec.average_replicates = *a;
  sweep.read("d_components", spec.d_components);
  sweep.read("threads", spec.threads);
  sweep.reject_unknown();

  detail::Section mcmc = section("mcmc");
  mcmc.read("n_samples", spec.mcmc.n_samples);
  mcmc.read("burn_in", spec.mcmc.burn_in);
  mcmc.read("thin", spec.mcmc.thin);
  mcmc.read("seed", spec.mcmc.seed);
  mcmc.reject_unknown();

  detail::Section geometry = section("geometry");
  geometry.read("n_points", spec.n_points);
  geometry.read("karcher_tolerance", spec.karcher.tolerance);
  geometry.read("karcher_step", spec.karcher.step);
  geometry.read("karcher_max_iter", spec.karcher.max_iter);
  geometry.reject_unknown();
  if (!(spec.karcher.tolerance > 0.0) || !(spec.karcher.step > 0.0 && spec.karcher.step <= 1.0) ||
      spec.karcher.max_iter < 1) {
    throw Error(ErrorCode::InvalidConfig,
                "geometry needs karcher_tolerance > 0, karcher_step in (0, 1] and "
                "karcher_max_iter >= 1");
  }

  detail::Section output = section("output");
  cfg.output_dir = detail::resolve(base_dir, output.text("dir").value_or("frsens-out"));
  if (const auto d = output.flag("densities")) cfg.write_densities = *d;
  if (const auto t = output.flag("trace")) cfg.write_trace = *t;
  output.reject_unknown();

  if (overrides.seed) spec.mcmc.seed = *overrides.seed;
  if (overrides.threads) spec.threads = *overrides.threads;
  if (overrides.output_dir) cfg.output_dir = std::filesystem::absolute(*overrides.output_dir);
  spec.keep_baseline_sample = cfg.write_densities || cfg.write_trace;

  validate(spec);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(buf.str(), base, overrides);
}

namespace detail {

inline std::string join_exact(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_exact(xs[i]);
  }
  return out;
}

inline void write_model_block(std::ostream& out, const ModelConfig& cfg) {
  struct Visitor {
    std::ostream& out;
    void kv(const char* key, double v) const { out << key << " = " << format_exact(v) << '\n'; }
    void common(const CcvConfig& c) const {
      kv("a0", c.a0);
      kv("a1", c.a1);
      kv("mu00", c.mu00);
      kv("lambda0", c.lambda0);
      kv("s0", c.s0);
      kv("s1", c.s1);
      kv("eta", c.eta);
      kv("gamma", c.gamma);
      out << "fixed_a = " << (c.fixed_a ? format_exact(*c.fixed_a) : "none") << '\n';
    }
    void operator()(const DpConfig& c) const {
      kv("alpha", c.alpha);
      if (c.g0.kind == BaseMeasure::Kind::beta) {
        out << "g0 = beta\n";
        kv("g0_a", c.g0.a);
        kv("g0_b", c.g0.b);
      } else {
        out << "g0 = uniform\n";
      }
      out << "truncation = " << c.truncation << '\n';
      out << "max_truncation = " << c.max_truncation << '\n';
      out << "bandwidth = " << (c.bandwidth ? format_exact(*c.bandwidth) : "auto") << '\n';
    }
    void operator()(const DpgmmConfig& c) const {
      kv("alpha", c.alpha);
      kv("m", c.m);
      kv("r", c.r);
      kv("nu", c.nu);
      kv("s", c.s);
    }
    void operator()(const CcvConfig& c) const { common(c); }
    void operator()(const DcvConfig& c) const {
      common(c);
      kv("phi", c.phi);
      out << "aux_m = " << c.aux_m << '\n';
    }
  };
  std::visit(Visitor{out}, cfg);
}

}  // namespace detail

/// Canonical config text: every setting explicit, paths absolute. Parsing
/// it back yields the same ExperimentConfig. With `execution` false the
/// output directory and thread count are left out, since neither affects
/// results.
inline std::string serialize_config(const ExperimentConfig& cfg, bool execution = true) {
  const SweepSpec& s = cfg.sweep;
  std::ostringstream out;
  out << "[dataset]\n"
      << "path = " << cfg.dataset_path.string() << '\n'
      << "transform = " << transform_name(cfg.transform) << "\n\n"
      << "[model]\n"
      << "type = " << model_name(cfg.model()) << "\n\n"
      << '[' << model_name(cfg.model()) << "]\n";
  detail::write_model_block(out, s.baseline);
  out << "\n[sweep]\n";
  if (cfg.preset) out << "preset = " << *cfg.preset << '\n';
  out << "parameter = " << s.parameter << '\n'
      << "values = " << detail::join_exact(s.values) << '\n'
      << "band_values = " << detail::join_exact(s.band_values) << '\n'
      << "replicates = " << s.replicates << '\n'
      << "band_level = " << format_exact(s.band_level) << '\n'
      << "seed_mode = " << (s.seed_mode == SeedMode::fresh ? "fresh" : "shared") << '\n'
      << "average = " << (s.average_replicates ? "true" : "false") << '\n'
      << "d_components = " << s.d_components << '\n';
  if (execution) out << "threads = " << s.threads << '\n';
  out << '\n'
      << "[mcmc]\n"
      << "n_samples = " << s.mcmc.n_samples << '\n'
      << "burn_in = " << s.mcmc.burn_in << '\n'
      << "thin = " << s.mcmc.thin << '\n'
      << "seed = " << format_exact(s.mcmc.seed) << "\n\n"
      << "[geometry]\n"
      << "n_points = " << s.n_points << '\n'
      << "karcher_tolerance = " << format_exact(s.karcher.tolerance) << '\n'
      << "karcher_step = " << format_exact(s.karcher.step) << '\n'
      << "karcher_max_iter = " << s.karcher.max_iter << "\n\n"
      << "[output]\n";
  if (execution) out << "dir = " << cfg.output_dir.string() << '\n';
  out << "densities = " << (cfg.write_densities ? "true" : "false") << '\n'
      << "trace = " << (cfg.write_trace ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace frsens
