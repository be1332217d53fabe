// End-to-end checks of the command-line tool.

#include <tripod/config.hpp>
#include <tripod/scan.hpp>

#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tripod_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string config(const char* name) {
    return std::string(TRIPOD_SOURCE_DIR) + "/configs/" + name;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(const std::string& args) const {
    const std::string cmd =
        std::string(TRIPOD_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::vector<std::vector<double>> rows(const std::string& csv) {
    std::vector<std::vector<double>> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::istringstream fields(line);
      std::string f;
      while (std::getline(fields, f, ',')) row.push_back(std::stod(f));
      out.push_back(row);
    }
    return out;
  }

  fs::path dir_;
};

const std::string kSmallGrid = R"(units: {rate: gamma0, time: 1/gamma0}
fano: {q12: 2, q13: 1, q23: 1.2}
pulses:
  width_factor: 2
  pump:    {gamma: 1, center: 0.5, width: 1}
  stokes:  {gamma: 1, center: -0.5, width: 1}
  control: {shape: constant, gamma: 4}
detuning: {policy: static}
grid: {tol: 1.0e-8}
scan:
  detuning: {sum: [-2, 14], diff: [-6, 6], steps: [5, 4], gamma3: [0, 4]}
)";

}  // namespace

TEST_F(CliTest, ZeroPulsesStayInInitialState) {
  ASSERT_EQ(run("propagate --config " + config("zero_pulses.yaml") + " --out " + path("z.csv")), 0);
  const std::string csv = read(path("z.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,P1,P2,P3,Pi,norm");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto r = rows(csv);
  ASSERT_EQ(r.size(), 21u);
  for (const auto& row : r) EXPECT_EQ(row[1], 1.0);
  EXPECT_TRUE(fs::exists(path("z.csv.meta.json")));
}

TEST_F(CliTest, PropagateMatchesLibraryBitForBit) {
  ASSERT_EQ(run("propagate --config " + config("fig3_width.yaml") + " --out " + path("f3.csv")),
            0);
  const tripod::SystemConfig c = tripod::load_config(config("fig3_width.yaml"));
  std::ostringstream expected;
  tripod::write_csv(expected, tripod::trajectory_table(tripod::run_propagate(c)));
  EXPECT_EQ(read(path("f3.csv")), expected.str());
}

TEST_F(CliTest, ToleranceFlagOverridesConfig) {
  ASSERT_EQ(run("propagate --config " + config("fig3_width.yaml") + " --tol 1e-6 --out " +
                path("a.csv")),
            0);
  const auto meta = nlohmann::json::parse(read(path("a.csv.meta.json")));
  EXPECT_EQ(meta["tol"].get<double>(), 1e-6);
}

TEST_F(CliTest, ScanOutputIdenticalAcrossWorkerCounts) {
  const std::string cfg = write("grid.yaml", kSmallGrid);
  ASSERT_EQ(run("scan-detuning --config " + cfg + " --workers 1 --out " + path("w1.csv")), 0);
  ASSERT_EQ(run("scan-detuning --config " + cfg + " --workers 3 --out " + path("w3.csv")), 0);
  ASSERT_EQ(run("scan-detuning --config " + cfg + " --workers 1 --out " + path("again.csv")), 0);
  const std::string one = read(path("w1.csv"));
  EXPECT_EQ(one, read(path("w3.csv")));
  EXPECT_EQ(one, read(path("again.csv")));
  const auto r = rows(one);
  EXPECT_EQ(r.size(), 40u);
  for (const auto& row : r) EXPECT_NEAR(row[3] + row[4] + row[5] + row[6], 1.0, 1e-6);

  const auto meta = nlohmann::json::parse(read(path("w1.csv.meta.json")));
  EXPECT_EQ(meta["scan"]["delta_sum_range"], "-2.000000,14.000000");
}

TEST_F(CliTest, AreaScanWritesFig2Curves) {
  ASSERT_EQ(run("scan-area --config " + config("fig2_area.yaml") + " --out " + path("a.csv")), 0);
  const auto r = rows(read(path("a.csv")));
  ASSERT_EQ(r.size(), 101u);
  EXPECT_NEAR(r.back()[4], 1.0 / 3.0, 1e-4);
}

TEST_F(CliTest, WidthScanRuns) {
  const std::string cfg = write(
      "w.yaml", "fano: {q12: 2, q13: 5, q23: 5.5}\npulses:\n  width_factor: 2\n"
                "  pump: {gamma: 1}\n  stokes: {gamma: 1}\n  control: {shape: constant, gamma: 3}\n"
                "scan:\n  width: {min: 0.1, max: 1, steps: 4}\n");
  ASSERT_EQ(run("scan-width --config " + cfg + " --workers 2 --out " + path("w.csv")), 0);
  const std::string csv = read(path("w.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "T,gamma3_T,P1,P2,P3,Pi");
  EXPECT_EQ(rows(csv).size(), 4u);
}

TEST_F(CliTest, ReportClassifiesAndBoundsWindow) {
  ASSERT_EQ(run("report --config " + config("equal_q.yaml") + " --out " + path("eq.json")), 0);
  const auto eq = nlohmann::json::parse(read(path("eq.json")));
  EXPECT_EQ(eq["transfer_regime"], "DelayControlled");
  EXPECT_NE(eq["landau_zener"]["note"].get<std::string>().find("hab identically zero"),
            std::string::npos);
  EXPECT_TRUE(eq["adiabaticity_window"]["upper"].is_null());
  EXPECT_TRUE(eq["adiabatic_transfer"]["ordering_satisfied"].get<bool>());

  ASSERT_EQ(run("report --config " + config("fig3_width.yaml") + " --out " + path("f3.json")), 0);
  const auto f3 = nlohmann::json::parse(read(path("f3.json")));
  EXPECT_NEAR(f3["adiabaticity_window"]["lower"].get<double>(), 0.2, 0.02);
  EXPECT_NEAR(f3["adiabaticity_window"]["upper"].get<double>(), 8.0, 1e-12);
  EXPECT_EQ(f3["transfer_regime"], "ReturnViaPhi2");
  EXPECT_EQ(f3["schema_version"], 1);
  EXPECT_LT(f3["peak"]["commutator_defect"].get<double>(), 1e-12);
}

TEST_F(CliTest, ConfigErrorsExitWithOne) {
  const std::string bad = write("bad.yaml", "fano: {q12: 1, q13: 1}\n");
  EXPECT_EQ(run("propagate --config " + bad + " --out " + path("x.csv")), 1);
  EXPECT_NE(read(path("stderr.txt")).find("q23"), std::string::npos);
  EXPECT_EQ(run("propagate --config " + path("missing.yaml")), 1);
  EXPECT_EQ(run("propagate"), 1);
  EXPECT_EQ(run("frobnicate --config " + bad), 1);
}

TEST_F(CliTest, NumericFailureExitsWithTwo) {
  EXPECT_EQ(run("propagate --config " + config("fig3_width.yaml") + " --tol 1e-300 --out " +
                path("x.csv")),
            2);
  EXPECT_NE(read(path("stderr.txt")).find("underflow"), std::string::npos);
}
