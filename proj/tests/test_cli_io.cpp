#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frsens/cli.hpp"
#include "frsens/config.hpp"
#include "frsens/io.hpp"
#include "test_support.hpp"

using namespace frsens;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("frsens_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }

  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  const std::string s = read_file(p);
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an frsens::Error";
  return ErrorCode::IoError;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string small_dataset(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::ostringstream s;
  s << "# synthetic\n";
  for (int i = 0; i < n; ++i) s << z(rng) + (i % 2 ? 3.0 : -3.0) << '\n';
  return s.str();
}

const char* kSmallConfig = R"(
[dataset]
path = data.txt

[dpgmm]
alpha = 1

[sweep]
parameter = alpha
values = 0.5, 1, 4
replicates = 2

[mcmc]
n_samples = 30
burn_in = 20
thin = 1
seed = 3

[geometry]
n_points = 128

[output]
dir = out
)";

}  // namespace

TEST(LoadDataset, CommentsCountAndEnvelope) {
  TempDir dir;
  const fs::path p = dir.write("obs.txt", "# header\n\n1.5\n  -2.0\n# mid comment\n4e0\n7\n");
  const Dataset d = load_dataset(p);
  EXPECT_EQ(d.size(), 4);
  const auto u = d.unit_values();
  EXPECT_NEAR(*std::min_element(u.begin(), u.end()), 0.05, 1e-12);
  EXPECT_NEAR(*std::max_element(u.begin(), u.end()), 0.95, 1e-12);
  EXPECT_NEAR(d.from_unit(d.to_unit(4.0)), 4.0, 1e-12);
}

TEST(LoadDataset, EnvelopeAlreadyInPlaceIsIdentity) {
  TempDir dir;
  const Dataset d = load_dataset(dir.write("obs.txt", "0.05\n0.3\n0.95\n0.5\n"));
  EXPECT_NEAR(d.scale(), 1.0, 1e-12);
  EXPECT_NEAR(d.shift(), 0.0, 1e-12);
}

TEST(LoadDataset, LogTransform) {
  TempDir dir;
  const fs::path p = dir.write("obs.txt", "1\n10\n100\n");
  const Dataset d = load_dataset(p, Transform::log);
  EXPECT_NEAR(d.values()[2], std::log(100.0), 1e-15);
  const fs::path bad = dir.write("bad.txt", "1\n# c\n0\n");
  try {
    load_dataset(bad, Transform::log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveForLog);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, ParseErrorsCarryLineNumbers) {
  TempDir dir;
  try {
    load_dataset(dir.write("obs.txt", "1\n2\n3,5\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([&] { load_dataset(dir.write("e.txt", "# only\n")); }),
            ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([&] { load_dataset(dir.path() / "missing.txt"); }), ErrorCode::IoError);
}

TEST(FormatCsv, TwelveSignificantDigits) {
  EXPECT_EQ(format_csv(0.1), "0.1");
  EXPECT_EQ(format_csv(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_csv(-2.0 / 3.0 * 1e-7), "-6.66666666667e-08");
  EXPECT_EQ(format_csv(-0.0), "0");
  EXPECT_EQ(format_csv(12345.678), "12345.678");
}

TEST(DensityMatrix, RoundTrip) {
  TempDir dir;
  const Grid g(64);
  std::mt19937_64 rng(1);
  std::vector<GridPdf> pdfs;
  for (int i = 0; i < 3; ++i) pdfs.push_back(test_support::random_mixture(g, rng));
  std::ostringstream s;
  write_density_matrix(s, pdfs);
  const fs::path p = dir.write("m.csv", s.str());
  const auto back = read_density_matrix(p);
  ASSERT_EQ(back.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((back[i].values() - pdfs[i].values()).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_EQ(code_of([&] { read_density_matrix(dir.write("h.csv", "0,0.3,1\n1,1,1\n")); }),
            ErrorCode::InvalidGrid);
  std::string shifted = s.str();
  shifted.replace(0, 1, "0.01");
  EXPECT_EQ(code_of([&] { read_density_matrix(dir.write("s.csv", shifted)); }),
            ErrorCode::GridMismatch);
}

TEST(Config, MinimalFileAndDefaults) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 1));
  const ExperimentConfig cfg = parse_config(kSmallConfig, dir.path());
  EXPECT_EQ(cfg.model(), ModelTag::dpgmm);
  const std::string bare = "[dataset]\npath = data.txt\n[ccv]\n[sweep]\npreset = ccv.eta\n";
  EXPECT_EQ(parse_config(bare, dir.path()).model(), ModelTag::ccv);
  EXPECT_EQ(cfg.dataset_path, fs::weakly_canonical(dir.path() / "data.txt"));
  EXPECT_EQ(cfg.output_dir, fs::weakly_canonical(dir.path() / "out"));
  EXPECT_EQ(cfg.sweep.values, (std::vector<double>{0.5, 1.0, 4.0}));
  EXPECT_EQ(cfg.sweep.band_values, (std::vector<double>{0.5, 1.0, 4.0}));
  EXPECT_EQ(cfg.sweep.mcmc.seed, 3u);
  EXPECT_EQ(cfg.sweep.n_points, 128);
  EXPECT_DOUBLE_EQ(std::get<DpgmmConfig>(cfg.sweep.baseline).r, 1.0 / 9.0);
}

TEST(Config, Errors) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 1));
  auto parse_with = [&](const std::string& from, const std::string& to) {
    std::string text = kSmallConfig;
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    text.replace(pos, from.size(), to);
    return [text, &dir] { parse_config(text, dir.path()); };
  };
  EXPECT_EQ(code_of(parse_with("alpha = 1", "alpha = 1\nkappa = 2")), ErrorCode::ConfigBadParam);
  EXPECT_EQ(code_of(parse_with("parameter = alpha", "parameter = kappa")),
            ErrorCode::ConfigBadParam);
  EXPECT_EQ(code_of(parse_with("[geometry]", "[colour]")), ErrorCode::ConfigBadParam);
  EXPECT_EQ(code_of(parse_with("path = data.txt", "path = nowhere.txt")), ErrorCode::IoError);
  EXPECT_EQ(code_of(parse_with("[dataset]\npath = data.txt", "")), ErrorCode::ConfigMissing);
  EXPECT_EQ(code_of(parse_with("values = 0.5, 1, 4\n", "")), ErrorCode::ConfigMissing);
  EXPECT_EQ(code_of(parse_with("[dpgmm]", "[ccv]\na0 = 2\n[dpgmm]")), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of(parse_with("values = 0.5, 1, 4", "values = 0.5, 2, 4")),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of(parse_with("seed = 3", "seed = three")), ErrorCode::ParseError);
  EXPECT_EQ(code_of(parse_with("seed = 3", "seed = 3\nseed = 4")), ErrorCode::ParseError);
  EXPECT_EQ(code_of(parse_with("[dpgmm]", "[dcv]\n[dpgmm]")), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of(parse_with("[dpgmm]", "[model]\ntype = mystery\n[dpgmm]")),
            ErrorCode::UnknownModel);
  EXPECT_EQ(code_of(parse_with("[dpgmm]", "[model]\ntype = dcv\n[dpgmm]")),
            ErrorCode::InvalidConfig);
}

TEST(Config, PresetsAndOverrides) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 1));
  const std::string text = R"(
[dataset]
path = data.txt
[dcv]
s0 = 3
[sweep]
preset = dcv.phi
)";
  const ExperimentConfig cfg = parse_config(text, dir.path());
  EXPECT_EQ(cfg.sweep.parameter, "phi");
  EXPECT_EQ(cfg.sweep.values, find_preset("dcv.phi").spec.values);
  EXPECT_EQ(std::get<DcvConfig>(cfg.sweep.baseline).s0, 3.0);

  ConfigOverrides o;
  o.seed = 99;
  o.threads = 4;
  o.preset = "dcv.gamma";
  o.output_dir = dir.path() / "elsewhere";
  const ExperimentConfig over = parse_config(text, dir.path(), o);
  EXPECT_EQ(over.sweep.parameter, "gamma");
  EXPECT_EQ(over.sweep.mcmc.seed, 99u);
  EXPECT_EQ(over.sweep.threads, 4);
  EXPECT_EQ(over.output_dir, dir.path() / "elsewhere");

  o.preset = "dpgmm.alpha";
  EXPECT_EQ(code_of([&] { parse_config(text, dir.path(), o); }), ErrorCode::ConfigBadParam);
  o.preset = "dcv.kappa";
  EXPECT_EQ(code_of([&] { parse_config(text, dir.path(), o); }), ErrorCode::ConfigBadParam);
}

TEST(Config, SerializeRoundTrip) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 1));
  const char* variants[] = {
      kSmallConfig,
      "[dataset]\npath = data.txt\n[dp]\ng0 = beta\ng0_a = 2\n[sweep]\npreset = dp.g0_b\n",
      "[dataset]\npath = data.txt\ntransform = none\n[ccv]\nfixed_a = 0.3\n[sweep]\n"
      "parameter = eta\nvalues = 1, 3, 1e1\nseed_mode = fresh\naverage = yes\n",
  };
  for (const char* text : variants) {
    const ExperimentConfig cfg = parse_config(text, dir.path());
    const std::string once = serialize_config(cfg);
    const ExperimentConfig again = parse_config(once, fs::path("/"));
    EXPECT_EQ(serialize_config(again), once);
  }
}

TEST(Cli, SweepWritesArchiveAndManifestReproduces) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 2));
  const fs::path cfg = dir.write("exp.cfg", kSmallConfig);
  const CliRun first = cli({"sweep", "--config", cfg.string(), "--threads", "2"});
  ASSERT_EQ(first.code, 0) << first.err;
  const fs::path out = dir.path() / "out";
  ASSERT_TRUE(fs::exists(out / "sweep.csv"));
  ASSERT_TRUE(fs::exists(out / "bands.csv"));
  ASSERT_TRUE(fs::exists(out / kManifestName));
  EXPECT_EQ(count_lines(out / "sweep.csv"), 1 + 3);
  EXPECT_EQ(count_lines(out / "bands.csv"), 1 + 3 * 3);
  EXPECT_NE(first.err.find("warning:"), std::string::npos);

  const fs::path copy = dir.path() / "copy";
  const CliRun second = cli({"sweep", "--config", (out / kManifestName).string(), "--out",
                             copy.string()});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(read_file(out / "sweep.csv"), read_file(copy / "sweep.csv"));
  EXPECT_EQ(read_file(out / "bands.csv"), read_file(copy / "bands.csv"));
  auto strip_clock = [](std::string s) {
    const auto pos = s.find("wall_clock_seconds");
    return s.substr(0, pos);
  };
  EXPECT_EQ(strip_clock(read_file(out / kManifestName)),
            strip_clock(read_file(copy / kManifestName)));

  const CliRun reseeded = cli({"sweep", "--config", cfg.string(), "--seed", "4", "--out",
                               (dir.path() / "reseeded").string()});
  ASSERT_EQ(reseeded.code, 0) << reseeded.err;
  EXPECT_NE(read_file(out / "sweep.csv"), read_file(dir.path() / "reseeded" / "sweep.csv"));
  EXPECT_NE(read_file(dir.path() / "reseeded" / kManifestName).find("seed = 4\n"),
            std::string::npos);
}

TEST(Cli, ValidateConfig) {
  TempDir dir;
  dir.write("data.txt", small_dataset(40, 1));
  const CliRun ok = cli({"validate-config", "--config", dir.write("a.cfg", kSmallConfig).string()});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out.rfind("ok:", 0), 0u);

  std::string bad = kSmallConfig;
  bad.replace(bad.find("alpha = 1"), 9, "alpha = 1\nkappa = 2");
  const CliRun r = cli({"validate-config", "--config", dir.write("b.cfg", bad).string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error[CONFIG_BAD_PARAM]:", 0), 0u) << r.err;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"sweep"}).code, 1);
  EXPECT_EQ(cli({"transmogrify"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  const CliRun missing = cli({"sweep", "--config", "/nonexistent/frsens.cfg"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.err.rfind("error[IO_ERROR]:", 0), 0u);

  TempDir dir;
  dir.write("data.txt", "0.1\n0.2\n0.3\n0.4\n0.6\n");
  const std::string text = R"(
[dataset]
path = data.txt
[dp]
alpha = 5
truncation = 50
max_truncation = 50
[sweep]
parameter = alpha
values = 5
[mcmc]
n_samples = 25
)";
  const CliRun internal = cli({"sweep", "--config", dir.write("t.cfg", text).string()});
  EXPECT_EQ(internal.code, 2) << internal.err;
  EXPECT_EQ(internal.err.rfind("error[TRUNCATION_TOO_SMALL]:", 0), 0u) << internal.err;
}

TEST(Cli, GeodesicMeanAndPca) {
  TempDir dir;
  const Grid g(Grid::kDefaultPoints);
  const std::vector<GridPdf> a = {test_support::uniform_pdf(g)};
  const std::vector<GridPdf> b = {test_support::linear_pdf(g)};
  std::ostringstream sa, sb;
  write_density_matrix(sa, a);
  write_density_matrix(sb, b);
  const fs::path pa = dir.write("a.pdf.csv", sa.str());
  const fs::path pb = dir.write("b.pdf.csv", sb.str());

  const CliRun geo = cli({"geodesic", "--from", pa.string(), "--to", pb.string(), "--steps", "7"});
  ASSERT_EQ(geo.code, 0) << geo.err;
  const fs::path path_file = dir.write("path.csv", geo.out);
  const auto path = read_density_matrix(path_file);
  ASSERT_EQ(path.size(), 7u);
  EXPECT_LT((path.front().values() - a[0].values()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((path.back().values() - b[0].values()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(fr_distance(path[0], path[3]), 0.5 * fr_distance(a[0], b[0]), 1e-8);

  const fs::path mean_file = dir.path() / "mean.csv";
  const CliRun mean = cli({"mean", "--input", path_file.string(), "--out", mean_file.string()});
  ASSERT_EQ(mean.code, 0) << mean.err;
  const auto m = read_density_matrix(mean_file);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_LT(fr_distance(m[0], path[3]), 1e-6);
  EXPECT_NE(mean.err.find("converged=true"), std::string::npos);

  const fs::path vec_file = dir.path() / "vectors.csv";
  const CliRun pca = cli({"pca", "--input", path_file.string(), "--components", "3", "--vectors",
                          vec_file.string()});
  ASSERT_EQ(pca.code, 0) << pca.err;
  std::istringstream lines(pca.out);
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "component,eigenvalue,cumulative_fraction");
  EXPECT_EQ(first.substr(first.rfind(',') + 1), "1");
  EXPECT_EQ(count_lines(vec_file), 1 + 3);

  const CliRun bad = cli({"geodesic", "--from", pa.string(), "--to", pb.string(), "--steps", "1"});
  EXPECT_EQ(bad.code, 1);
}
