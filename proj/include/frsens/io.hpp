#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "frsens/config.hpp"
#include "frsens/dataset.hpp"
#include "frsens/density.hpp"
#include "frsens/error.hpp"
#include "frsens/grid.hpp"
#include "frsens/sweep.hpp"

namespace frsens {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kCsvDigits = 12;

/// Loads one observation per line. Blank lines and lines starting with '#'
/// are skipped.
inline Dataset load_dataset(const std::filesystem::path& path, Transform transform = Transform::none) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset: " + path.string());
  std::vector<double> values;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto v = detail::parse_number<double>(t);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) +
                                             ": not a number: '" + std::string(t) + "'");
    }
    if (transform == Transform::log) {
      if (*v <= 0.0) {
        throw Error(ErrorCode::NonPositiveForLog,
                    path.string() + ":" + std::to_string(number) +
                        ": log transform needs positive values, got " + std::string(t));
      }
      values.push_back(std::log(*v));
    } else {
      values.push_back(*v);
    }
  }
  if (values.empty()) {
    throw Error(ErrorCode::EmptyDataset, "dataset has no observations: " + path.string());
  }
  return Dataset::from_values(std::move(values), path.stem().string());
}

/// Locale-independent text with 12 significant digits.
inline std::string format_csv(double x) {
  if (x == 0.0) return "0";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, kCsvDigits);
  return std::string(buf, res.ptr);
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "param_value,D,V,E\n";
  for (std::size_t i = 0; i < r.measures.size(); ++i) {
    const MeasureTriple& m = r.measures[i];
    out << format_csv(r.spec.values[i]) << ',' << format_csv(m.d_shift) << ','
        << format_csv(m.v_spread) << ',' << format_csv(m.e_covshape) << '\n';
  }
}

inline void write_bands_csv(std::ostream& out, const SweepResult& r) {
  out << "param_value,measure,lo,hi\n";
  for (const BandRow& b : r.bands) {
    const std::string v = format_csv(b.value);
    out << v << ",D," << format_csv(b.d.first) << ',' << format_csv(b.d.second) << '\n'
        << v << ",V," << format_csv(b.v.first) << ',' << format_csv(b.v.second) << '\n'
        << v << ",E," << format_csv(b.e.first) << ',' << format_csv(b.e.second) << '\n';
  }
}

/// Header row of abscissae, then one grid function per row.
inline void write_matrix(std::ostream& out, const Grid& grid,
                         std::span<const Eigen::VectorXd> rows) {
  for (int i = 0; i < grid.size(); ++i) out << (i ? "," : "") << format_csv(grid.abscissa(i));
  out << '\n';
  for (const Eigen::VectorXd& row : rows) {
    grid.require_size(row);
    for (int i = 0; i < grid.size(); ++i) out << (i ? "," : "") << format_csv(row[i]);
    out << '\n';
  }
}

inline void write_density_matrix(std::ostream& out, std::span<const GridPdf> pdfs) {
  if (pdfs.empty()) throw Error(ErrorCode::EmptyInput, "no densities to write");
  std::vector<Eigen::VectorXd> rows;
  for (const GridPdf& p : pdfs) {
    require_same_grid(pdfs.front().grid(), p.grid());
    rows.push_back(p.values());
  }
  write_matrix(out, pdfs.front().grid(), rows);
}

/// Reads a density-matrix file. Rows are renormalized to unit integral.
inline std::vector<GridPdf> read_density_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open density matrix: " + path.string());
  auto parse_row = [&](const std::string& line, int number) {
    std::vector<double> row;
    for (const std::string& cell : detail::split_list(line)) {
      const auto v = detail::parse_number<double>(cell);
      if (!v) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) +
                                               ": not a number: '" + cell + "'");
      }
      row.push_back(*v);
    }
    return row;
  };
  std::string line;
  int number = 0;
  std::vector<double> header;
  while (header.empty() && std::getline(in, line)) header = parse_row(line, ++number);
  if (header.empty()) throw Error(ErrorCode::EmptyInput, "density matrix is empty: " + path.string());
  const Grid grid(static_cast<int>(header.size()));
  for (int i = 0; i < grid.size(); ++i) {
    if (std::abs(header[i] - grid.abscissa(i)) > 1e-9) {
      throw Error(ErrorCode::GridMismatch,
                  path.string() + ": header is not an equally spaced grid on [0, 1]");
    }
  }
  std::vector<GridPdf> out;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    const std::vector<double> row = parse_row(line, number);
    if (static_cast<int>(row.size()) != grid.size()) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) +
                                             ": expected " + std::to_string(grid.size()) +
                                             " values, got " + std::to_string(row.size()));
    }
    out.push_back(normalize_pdf(grid, Eigen::Map<const Eigen::VectorXd>(row.data(), grid.size())));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "density matrix has no rows: " + path.string());
  return out;
}

inline void write_trace_csv(std::ostream& out, const PosteriorSample& s) {
  out << "draw,clusters,alpha,a,sigma2,mu0\n";
  for (std::size_t i = 0; i < s.trace.size(); ++i) {
    const StateSummary& t = s.trace[i];
    out << i + 1 << ',' << t.clusters << ',' << format_csv(t.alpha) << ',' << format_csv(t.a)
        << ',' << format_csv(t.sigma2) << ',' << format_csv(t.mu0) << '\n';
  }
}

/// Manifest: the canonical config followed by a [run] block.
inline std::string manifest_text(const ExperimentConfig& cfg, const Dataset& data,
                                 const SweepResult& r) {
  std::ostringstream out;
  out << serialize_config(cfg, false) << "\n[run]\n"
      << "version = " << kVersion << '\n'
      << "dataset_n = " << data.size() << '\n'
      << "rescale_shift = " << format_exact(data.shift()) << '\n'
      << "rescale_scale = " << format_exact(data.scale()) << '\n'
      << "base_seed = " << format_exact(r.spec.mcmc.seed) << '\n';
  out << "replicate_seeds = ";
  for (std::size_t i = 0; i < r.baseline_seeds.size(); ++i) {
    out << (i ? ", " : "") << format_exact(r.baseline_seeds[i]);
  }
  out << '\n';
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    out << "warning_" << i + 1 << " = " << r.warnings[i] << '\n';
  }
  out << "wall_clock_seconds = " << format_csv(r.wall_seconds) << '\n';
  return out.str();
}

inline constexpr const char* kManifestName = "manifest.cfg";

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

/// Writes sweep.csv, bands.csv, the manifest and any requested optional
/// files. Returns the paths written.
inline std::vector<std::filesystem::path> write_archive(const std::filesystem::path& dir,
                                                        const ExperimentConfig& cfg,
                                                        const Dataset& data,
                                                        const SweepResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  std::ostringstream sweep, bands;
  write_sweep_csv(sweep, r);
  write_bands_csv(bands, r);
  emit("sweep.csv", sweep.str());
  emit("bands.csv", bands.str());
  if (r.baseline_sample && cfg.write_densities) {
    std::ostringstream d;
    write_density_matrix(d, r.baseline_sample->pdfs);
    emit("densities.csv", d.str());
  }
  if (r.baseline_sample && cfg.write_trace) {
    std::ostringstream t;
    write_trace_csv(t, *r.baseline_sample);
    emit("trace.csv", t.str());
  }
  emit(kManifestName, manifest_text(cfg, data, r));
  return written;
}

}  // namespace frsens
