#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "frsens/config.hpp"
#include "frsens/error.hpp"
#include "frsens/io.hpp"
#include "frsens/karcher.hpp"
#include "frsens/sweep.hpp"
#include "frsens/tpca.hpp"

namespace frsens {

enum ExitCode : int { kExitOk = 0, kExitUserError = 1, kExitInternalError = 2 };

namespace detail {

/// Writes to `path`, or to `fallback` when no path was given.
template <class Fn>
void emit_output(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write(out);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

inline GridPdf first_density(const std::string& path) {
  return read_density_matrix(path).front();
}

inline std::string plural(std::size_t n, const char* word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

}  // namespace detail

/// Runs the command line in `args` (program name excluded). Returns the
/// process exit code; diagnostics go to `err` as `error[CODE]: message`.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Fisher-Rao prior sensitivity analysis for Bayesian nonparametric density models",
               "frsens"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_path, preset, from_path, to_path, input_path, vectors_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  int steps = 7;
  int components = 0;
  KarcherOptions karcher;

  CLI::App* sweep = app.add_subcommand("sweep", "Run a perturbation sweep and write its archive");
  sweep->add_option("--config", config_path, "Experiment config file")->required();
  sweep->add_option("--out", out_path, "Output directory (overrides [output] dir)");
  sweep->add_option("--seed", seed, "Base seed (overrides [mcmc] seed)");
  sweep->add_option("--threads", threads, "Worker threads, 0 for all cores")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--preset", preset, "Preset grid <model>.<parameter>");

  CLI::App* validate_cmd =
      app.add_subcommand("validate-config", "Check a config without running it");
  validate_cmd->add_option("--config", config_path, "Experiment config file")->required();
  validate_cmd->add_option("--preset", preset, "Preset grid <model>.<parameter>");

  CLI::App* geodesic = app.add_subcommand("geodesic", "Points along the geodesic between two densities");
  geodesic->add_option("--from", from_path, "Density matrix file (first row used)")->required();
  geodesic->add_option("--to", to_path, "Density matrix file (first row used)")->required();
  geodesic->add_option("--steps", steps, "Number of points including both endpoints")
      ->check(CLI::Range(2, 100000));
  geodesic->add_option("--out", out_path, "Output density matrix (default stdout)");

  CLI::App* mean = app.add_subcommand("mean", "Karcher mean of the densities in a file");
  mean->add_option("--input", input_path, "Density matrix file")->required();
  mean->add_option("--out", out_path, "Output density matrix (default stdout)");
  mean->add_option("--tolerance", karcher.tolerance, "Gradient norm stopping tolerance")
      ->check(CLI::PositiveNumber);
  mean->add_option("--max-iter", karcher.max_iter, "Iteration cap")->check(CLI::PositiveNumber);

  CLI::App* pca = app.add_subcommand("pca", "Tangent PCA of the densities in a file");
  pca->add_option("--input", input_path, "Density matrix file")->required();
  pca->add_option("--components", components, "Components to report (default all)")
      ->check(CLI::NonNegativeNumber);
  pca->add_option("--out", out_path, "Spectrum CSV (default stdout)");
  pca->add_option("--vectors", vectors_path, "Write principal directions to this file");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[USAGE]: " << e.what() << '\n';
    return kExitUserError;
  }

  try {
    if (sweep->parsed() || validate_cmd->parsed()) {
      ConfigOverrides o;
      o.seed = seed;
      o.threads = threads;
      if (!preset.empty()) o.preset = preset;
      if (!out_path.empty()) o.output_dir = out_path;
      const ExperimentConfig cfg = load_config(config_path, o);
      const Dataset data = load_dataset(cfg.dataset_path, cfg.transform);
      if (validate_cmd->parsed()) {
        for (const std::string& w : validate(cfg.sweep)) err << "warning: " << w << '\n';
        out << "ok: model=" << model_name(cfg.model()) << " parameter=" << cfg.sweep.parameter
            << " values=" << cfg.sweep.values.size()
            << " band_values=" << cfg.sweep.band_values.size()
            << " replicates=" << cfg.sweep.replicates << " observations=" << data.size() << '\n';
        return kExitOk;
      }
      const SweepResult result = run_sweep(data, cfg.sweep);
      for (const std::string& w : result.warnings) err << "warning: " << w << '\n';
      const auto written = write_archive(cfg.output_dir, cfg, data, result);
      for (const auto& p : written) out << "wrote " << p.string() << '\n';
      return kExitOk;
    }

    if (geodesic->parsed()) {
      const auto path = geodesic_path(detail::first_density(from_path),
                                      detail::first_density(to_path), steps);
      detail::emit_output(out_path, out, [&](std::ostream& o) { write_density_matrix(o, path); });
      return kExitOk;
    }

    if (mean->parsed()) {
      const std::vector<Srd> srds = to_srds(read_density_matrix(input_path));
      const KarcherResult km = karcher_mean(srds, karcher);
      const std::vector<GridPdf> rows = {from_srd(km.mean)};
      detail::emit_output(out_path, out, [&](std::ostream& o) { write_density_matrix(o, rows); });
      err << "karcher mean of " << detail::plural(srds.size(), "density") << ": iterations="
          << km.iterations << " gradient_norm=" << format_csv(km.gradient_norm)
          << " converged=" << (km.converged ? "true" : "false")
          << " variance=" << format_csv(karcher_variance(srds, km.mean)) << '\n';
      return kExitOk;
    }

    if (pca->parsed()) {
      const std::vector<Srd> srds = to_srds(read_density_matrix(input_path));
      const TpcaResult t = tangent_pca(srds);
      const int k = components > 0 ? std::min<int>(components, t.eigenvalues.size())
                                   : static_cast<int>(t.eigenvalues.size());
      detail::emit_output(out_path, out, [&](std::ostream& o) {
        o << "component,eigenvalue,cumulative_fraction\n";
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
          acc += t.eigenvalues[i];
          const double frac = t.covariance_trace > 0.0 ? acc / t.covariance_trace : 0.0;
          o << i + 1 << ',' << format_csv(t.eigenvalues[i]) << ',' << format_csv(frac) << '\n';
        }
      });
      if (!vectors_path.empty()) {
        std::vector<Eigen::VectorXd> dirs;
        for (int i = 0; i < k; ++i) dirs.push_back(t.eigenvectors.col(i));
        detail::emit_output(vectors_path, out, [&](std::ostream& o) {
          write_matrix(o, t.mean.grid(), dirs);
        });
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error[" << code_name(e.code()) << "]: " << e.what() << '\n';
    return is_user_error(e.code()) ? kExitUserError : kExitInternalError;
  } catch (const std::exception& e) {
    err << "error[INTERNAL]: " << e.what() << '\n';
    return kExitInternalError;
  }
  err << "error[USAGE]: no subcommand given\n";
  return kExitUserError;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace frsens
