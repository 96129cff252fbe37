#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "ltg/cli.hpp"
#include "ltg/parallel.hpp"

using namespace ltg;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ltg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() / ("ltg_cli_test_" + std::to_string(::getpid()) + "_" +
                                                  std::to_string(counter++) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::vector<std::vector<std::string>> data_rows(const fs::path& path) {
  std::istringstream in(output::data_section(output::read_text(path)));
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

TEST(Cli, AnalyticStaticLimit) {
  const auto dir = scratch("analytic");
  const auto cfg = write_config(dir, R"({"command": "analytic", "rtn": {"gamma": 0.0},
      "time_grid": {"t_min": 0.0, "t_max": 3.141592653589793, "points": 101}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(dir / "out" / "analytic.csv");
  ASSERT_EQ(rows[0], (std::vector<std::string>{"series", "t", "re", "im", "abs", "entanglement"}));
  int ge_rows = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][0] != "GE") continue;
    ++ge_rows;
    const double t = std::stod(rows[i][1]);
    EXPECT_NEAR(std::stod(rows[i][4]), std::abs(std::cos(4 * t)), 1e-12);
  }
  EXPECT_EQ(ge_rows, 101);
}

TEST(Cli, EmptySweepGivesEmptyTable) {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, R"({"command": "transition-delta", "sweep": {"deltas": []}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(dir / "transition-delta.csv");
  EXPECT_EQ(rows.size(), 1u);
}

TEST(Cli, RunsAreByteIdenticalAcrossThreadCounts) {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, R"({"command": "mc-moment", "mc": {"realizations": 2000},
      "time_grid": {"t_min": 0.0, "t_max": 2.0, "points": 50}})");
  set_thread_count(1);
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--seed", "99", "--out", (dir / "a").string()}).code, 0);
  set_thread_count(4);
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--seed", "99", "--out", (dir / "b").string()}).code, 0);
  set_thread_count(0);
  const auto a = output::read_text(dir / "a" / "mc-moment.csv");
  const auto b = output::read_text(dir / "b" / "mc-moment.csv");
  EXPECT_EQ(output::data_section(a), output::data_section(b));
  EXPECT_NE(a.find("# master_seed: 99"), std::string::npos);
  EXPECT_NE(a.find("\"seed\":99"), std::string::npos);
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--seed", "100", "--out", (dir / "c").string()}).code, 0);
  EXPECT_NE(output::data_section(a), output::data_section(output::read_text(dir / "c" / "mc-moment.csv")));
}

TEST(Cli, RerunReproducesDataSection) {
  const auto dir = scratch("rerun");
  const auto cfg = write_config(dir, R"({"command": "optics-table", "optics": {"table_widths_nm": [0, 15, 40]}})");
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  const auto first = output::read_text(dir / "a" / "optics-table.csv");
  // The calibrated theta0 is recorded in the embedded config.
  const auto embedded = output::read_embedded_config(dir / "a" / "optics-table.csv");
  EXPECT_TRUE(embedded.at("optics").at("theta0_rad").is_number());
  const auto r = invoke({"rerun", "--from", (dir / "a" / "optics-table.csv").string(), "--out", (dir / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(output::data_section(first), output::data_section(output::read_text(dir / "b" / "optics-table.csv")));
}

TEST(Cli, ValidateReportsProblems) {
  const auto dir = scratch("validate");
  const auto ok = write_config(dir, R"({"preset": "fig3-right"})");
  const auto good = invoke({"validate", "--config", ok.string()});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_TRUE(good.err.empty());

  const auto odd = write_config(dir, R"({"command": "transition-delta", "kernel": {"order": 3}})");
  const auto r1 = invoke({"validate", "--config", odd.string()});
  EXPECT_EQ(r1.code, 1);
  EXPECT_NE(r1.err.find("even"), std::string::npos);

  const auto wide = write_config(dir, R"({"command": "transition-spectral", "sweep": {"spectral_widths_nm": [200]}})");
  const auto r2 = invoke({"validate", "--config", wide.string()});
  EXPECT_EQ(r2.code, 1);
  EXPECT_NE(r2.err.find("calibrated optics range [0, 60]"), std::string::npos) << r2.err;

  const auto r3 = invoke({"validate", "--config", (dir / "missing.json").string()});
  EXPECT_EQ(r3.code, 1);
  EXPECT_NE(r3.err.find("cannot read"), std::string::npos);

  const auto typo = write_config(dir, R"({"kernal": {}})");
  const auto r4 = invoke({"validate", "--config", typo.string()});
  EXPECT_EQ(r4.code, 1);
  EXPECT_NE(r4.err.find("/kernal"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"run"}).code, 1);
  EXPECT_EQ(invoke({"run", "--preset", "nope"}).code, 1);
  // Visibility below the calibration curve cannot be inverted.
  const auto cfg = write_config(dir, R"({"command": "calibrate-wcp",
      "measurement": {"true_w_cp": 40.0, "curve_w_min": 0.5, "curve_w_max": 2.0, "shot_noise": false}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, CalibrationPresetWritesAllTables) {
  const auto dir = scratch("calib");
  const auto r = invoke({"run", "--preset", "figS-calibration", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "figS-calibration.csv"));
  EXPECT_TRUE(fs::exists(dir / "figS-calibration_curve.csv"));
  const auto summary = data_rows(dir / "figS-calibration_summary.csv");
  bool found = false;
  for (const auto& row : summary) found = found || row[0] == "w_cp_estimate";
  EXPECT_TRUE(found);
  const auto vh = data_rows(dir / "figS-calibration.csv");
  EXPECT_EQ(vh.size(), 21u);
  const std::string text = output::read_text(dir / "figS-calibration.csv");
  EXPECT_NE(text.find("p=0.927"), std::string::npos);
  EXPECT_NE(text.find("w_cp=3.1"), std::string::npos);
}
