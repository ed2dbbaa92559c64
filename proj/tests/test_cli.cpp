#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfmm/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kCli = RFMM_CLI_PATH;
const fs::path kData = RFMM_TEST_DATA;

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + kCli.string() + " " + args + " > /dev/null 2> " +
                          (fs::temp_directory_path() / "rfmm_cli_stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_stderr() { return slurp(fs::temp_directory_path() / "rfmm_cli_stderr.txt"); }

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "rfmm_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, PriceSchemaAndDeterminism) {
  const auto a = fresh_dir("price_a"), b = fresh_dir("price_b");
  const std::string cfg = "--config " + (kData / "run.json").string();
  ASSERT_EQ(run("price " + cfg + " --out " + a.string()), 0) << last_stderr();
  ASSERT_EQ(run("price " + cfg + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "price.csv"), slurp(b / "price.csv"));

  const auto rows = read_rows(a / "price.csv");
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"expiry", "tenor", "strike", "fmm_iv", "fmm_se", "smm_iv", "smm_se",
                                               "asymptotic_iv"}));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double fmm = std::stod(rows[r][3]), fse = std::stod(rows[r][4]);
    const double smm = std::stod(rows[r][5]), sse = std::stod(rows[r][6]);
    EXPECT_GE(fse, 0.0);
    EXPECT_GE(sse, 0.0);
    // Overlapping two-standard-error bands.
    EXPECT_LT(std::abs(fmm - smm), 2.0 * (fse + sse)) << "row " << r;
  }
}

TEST(Cli, SeedOverridesChangeOutput) {
  const auto a = fresh_dir("seed_a"), b = fresh_dir("seed_b"), c = fresh_dir("seed_c");
  const std::string cfg = "price --config " + (kData / "run.json").string();
  ASSERT_EQ(run(cfg + " --out " + a.string() + " --seed 5"), 0);
  ASSERT_EQ(run(cfg + " --out " + b.string(), "RFMM_SEED=5"), 0);
  ASSERT_EQ(run(cfg + " --out " + c.string() + " --seed 6", "RFMM_SEED=5"), 0);
  EXPECT_EQ(slurp(a / "price.csv"), slurp(b / "price.csv"));
  EXPECT_NE(slurp(a / "price.csv"), slurp(c / "price.csv"));
  EXPECT_EQ(run(cfg + " --out " + a.string(), "RFMM_SEED=abc"), 2);
}

TEST(Cli, DegenerateCapletMatchesBlack) {
  const auto d = fresh_dir("degenerate");
  std::ofstream(d / "curve.csv") << "maturity_years,discount_factor\n1,0.970873786\n2,0.942595909\n";
  std::ofstream(d / "params.txt") << "kappa = 0\nhurst = 0.3\nalpha = 0.2, 0.2\nrho0 = -0.5, -0.5\n"
                                     "rate_corr = 1, 0.9, 0.9, 1\n";
  std::ofstream(d / "run.json") << R"({"curve": "curve.csv", "params": "params.txt", "out_dir": "out",
    "mc": {"n_paths": 20000, "seed": 3, "steps_per_year": 24},
    "price": {"swaptions": [{"expiry": 1, "tenor": 1}], "strike_offsets": [-0.005, 0, 0.005]}})";
  ASSERT_EQ(run("price --config " + (d / "run.json").string()), 0) << last_stderr();
  const auto rows = read_rows(d / "out" / "price.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_NEAR(std::stod(rows[r][3]), 0.2, 3.0 * std::stod(rows[r][4]) + 1e-6);
    EXPECT_NEAR(std::stod(rows[r][5]), 0.2, 1e-5);
  }
}

TEST(Cli, MissingCurveFile) {
  const auto d = fresh_dir("missing");
  std::ofstream(d / "run.json") << R"({"curve": "nope.csv", "params": "p.txt",
    "price": {"swaptions": [{"expiry": 1, "tenor": 1}]}})";
  EXPECT_EQ(run("price --config " + (d / "run.json").string()), 2);
  EXPECT_NE(last_stderr().find("nope.csv"), std::string::npos) << last_stderr();
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("price"), 2);
  EXPECT_EQ(run("bogus --config x.json"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, EmptySurfaceWritesNothing) {
  const auto d = fresh_dir("empty_surface");
  fs::copy_file(kData / "curve.csv", d / "curve.csv");
  std::ofstream(d / "surface.csv") << "expiry_years,tenor_years,strike_offset,market_iv\n";
  std::ofstream(d / "run.json") << R"({"curve": "curve.csv", "surface": "surface.csv", "out_dir": "out"})";
  EXPECT_EQ(run("calibrate --config " + (d / "run.json").string()), 2);
  EXPECT_FALSE(fs::exists(d / "out"));
}

TEST(Cli, OtherCommandsProduceTheirFiles) {
  const auto d = fresh_dir("others");
  const std::string cfg = "--config " + (kData / "run.json").string() + " --out " + d.string();
  ASSERT_EQ(run("simulate " + cfg), 0) << last_stderr();
  ASSERT_EQ(run("map-smm " + cfg), 0) << last_stderr();
  EXPECT_TRUE(fs::exists(d / "simulate.csv"));
  const auto v = read_rows(d / "map_smm.csv");
  EXPECT_EQ(v.size(), 258u);  // header + 257 points over one year
  EXPECT_EQ(v[0], (std::vector<std::string>{"t", "v", "vbar"}));
  EXPECT_EQ(read_rows(d / "map_smm_summary.csv").size(), 2u);
}
