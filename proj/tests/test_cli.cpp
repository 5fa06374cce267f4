#include "zpf/commands.hpp"
#include "zpf/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zpf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CommandContext context(const std::string& name, const std::string& config) {
  CommandContext ctx;
  ctx.config = RunConfig::parse(config);
  ctx.out_dir = (fs::temp_directory_path() / ("zpf_cli_" + name)).string();
  fs::remove_all(ctx.out_dir);
  return ctx;
}

}  // namespace

TEST(RunConfig, ParseSerializeRoundTrip) {
  const std::string text =
      "# global\nmodel = blbq\np = 1/3   # AKLT\nD = 1, 2,3\n\n[fluct]\nN_k = 256\n"
      "[sweep-p]\np_list = 0 0.5 0.633\n";
  const auto cfg = RunConfig::parse(text);
  EXPECT_EQ(RunConfig::parse(cfg.serialize()), cfg);
  EXPECT_EQ(RunConfig::parse(cfg.serialize()).serialize(), cfg.serialize());
  EXPECT_EQ(cfg.str("fluct", "model", ""), "blbq");
  EXPECT_DOUBLE_EQ(cfg.num("fluct", "p", 0), 1.0 / 3.0);
  EXPECT_EQ(cfg.integer("fluct", "N_k", 0), 256);
  EXPECT_EQ(cfg.integer("ed", "N_k", 7), 7);
  EXPECT_EQ(cfg.ints("", "D", {}), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(cfg.nums("sweep-p", "p_list", {}).size(), 3u);
}

TEST(RunConfig, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 0.633, 6.02214076e23}) {
    EXPECT_EQ(parse_number(format_number(v)), v);
    EXPECT_EQ(std::stod(csv_number(v)), v);
  }
  RunConfig c;
  c.set("", "tol", format_number(1e-9));
  EXPECT_EQ(RunConfig::parse(c.serialize()).num("", "tol", 0), 1e-9);
}

TEST(RunConfig, Errors) {
  EXPECT_THROW(RunConfig::parse("justakey\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[broken\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("D = two\n").integer("", "D", 1), ConfigError);
  EXPECT_THROW(RunConfig::parse("D = 2.5\n").integer("", "D", 1), ConfigError);
  EXPECT_THROW(parse_number("1/0"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[ed]\nwat = 1\n").require_known("ed", {"N"}), ConfigError);
  EXPECT_NO_THROW(RunConfig::parse("wat = 1\n").require_known("ed", {"N"}));
}

TEST(Commands, ConfigurationErrorsExitThree) {
  EXPECT_EQ(run_command("ed", context("e1", "bogus = 1\n")).exit_code, kExitConfig);
  EXPECT_EQ(run_command("ed", context("e2", "[nosuch]\nN = 4\n")).exit_code, kExitConfig);
  EXPECT_EQ(run_command("ed", context("e3", "[ed]\nD = 4\n")).exit_code, kExitConfig);
  EXPECT_EQ(run_command("fluct", context("e4", "model = ising\n")).exit_code, kExitConfig);
  EXPECT_EQ(run_command("ed", context("e5", "bc = twisted\n")).exit_code, kExitConfig);
  EXPECT_EQ(run_command("sweep-p", context("e6", "model = heis_stag\n")).exit_code, kExitConfig);
  EXPECT_THROW(command_keys("nosuch"), ConfigError);
}

TEST(Commands, EdWritesCsvAndManifest) {
  const auto ctx = context("ed", "model = blbq\np = 1/3\n[ed]\nN = 4, 6\nbc = periodic\n");
  const auto res = run_command("ed", ctx);
  ASSERT_EQ(res.exit_code, kExitOk);
  const std::string csv = slurp(ctx.out_dir + "/ed.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,bc,energy,density,residual");
  const auto row = csv.find("\n6,periodic,");
  ASSERT_NE(row, std::string::npos);
  // The AKLT ring of six sites has energy exactly -4.
  EXPECT_NEAR(std::stod(csv.substr(row + 12)), -4.0, 1e-9);
  const std::string manifest = slurp(ctx.out_dir + "/ed.manifest.txt");
  EXPECT_NE(manifest.find("seed = 7"), std::string::npos);
  EXPECT_NE(manifest.find("N = 4, 6"), std::string::npos);
  EXPECT_NE(manifest.find("Eigen"), std::string::npos);
}

TEST(Commands, CrosscheckPassesAndCatchesCorruptDelta) {
  const std::string base = "model = heis_stag\nh = 0.2\n[crosscheck]\nD = 1\nL = 6\n";
  EXPECT_EQ(run_command("crosscheck", context("cc1", base)).exit_code, kExitOk);
  EXPECT_EQ(run_command("crosscheck", context("cc2", base + "corrupt = delta_sign\n")).exit_code,
            kExitNumerical);
  EXPECT_EQ(run_command("crosscheck", context("cc3", base + "corrupt = other\n")).exit_code,
            kExitConfig);
}

TEST(Commands, SweepIsReproducibleWithWarmCache) {
  const std::string cfg =
      "model = heis_stag\nh = 0.2\n[sweep-d]\nD = 1, 2\nreference = -0.4968402\nN_k = 64\n";
  auto ctx = context("sd", cfg);
  ctx.threads = 2;
  ASSERT_EQ(run_command("sweep-d", ctx).exit_code, kExitOk);
  const std::string cold = slurp(ctx.out_dir + "/sweep_d.csv");
  ASSERT_EQ(run_command("sweep-d", ctx).exit_code, kExitOk);
  EXPECT_EQ(slurp(ctx.out_dir + "/sweep_d.csv"), cold);
  EXPECT_EQ(cold.substr(0, cold.find('\n')),
            "D,E_mps,E_total,E_ref,surplus_mps,surplus_total,flag");
  const std::string svg = slurp(ctx.out_dir + "/sweep_d.svg");
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Commands, GramSpectrumTable) {
  const auto ctx = context("gs", "[gram-spectrum]\nL = 12\ny_max = 4\n");
  ASSERT_EQ(run_command("gram-spectrum", ctx).exit_code, kExitOk);
  std::istringstream csv(slurp(ctx.out_dir + "/gram_spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("y,branch,E_analytic,E_numeric,abs_err", 0), 0u);
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < 5; ++i) std::getline(ls, cell, ',');
    EXPECT_LT(std::stod(cell), 1e-8) << line;
  }
  EXPECT_EQ(rows, 8);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](int i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](int i) {
                 if (i == 7) throw Error("boom");
               }),
               Error);
}
