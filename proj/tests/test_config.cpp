#include <tripod/config.hpp>

#include <gtest/gtest.h>

#include <string>

using namespace tripod;

namespace {

const std::string kMinimal = R"(fano: {q12: 2, q13: 5, q23: 5.5}
pulses:
  pump:    {gamma: 1, center: 0.5, width: 1}
  stokes:  {gamma: 1, center: -0.5, width: 1}
  control: {shape: constant, gamma: 3}
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string config_path(const char* name) {
  return std::string(TRIPOD_SOURCE_DIR) + "/configs/" + name;
}

}  // namespace

TEST(ParseConfig, MinimalDefaults) {
  const SystemConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.fano.q23, 5.5);
  EXPECT_TRUE(std::holds_alternative<AutoTrap>(c.policy));
  EXPECT_EQ(c.initial_state, 1);
  EXPECT_EQ(c.grid.tol, 1e-10);
  EXPECT_EQ(c.grid.samples, 512u);
  EXPECT_EQ(std::get<Gaussian>(c.pulses.pump).width, 1.0);
  EXPECT_EQ(std::get<Constant>(c.pulses.control).gamma, 3.0);
  EXPECT_FALSE(c.scan.area.has_value());
}

TEST(ParseConfig, WidthFactorScalesGaussians) {
  const SystemConfig c = parse_config(kMinimal + "grid: {tol: 1.0e-9}\n" +
                                      "initial_state: 2\n");
  EXPECT_EQ(c.grid.tol, 1e-9);
  EXPECT_EQ(c.initial_state, 2);
  const SystemConfig scaled = parse_config(
      "fano: {q12: 1, q13: 1, q23: 1}\npulses:\n  width_factor: 2\n"
      "  pump: {gamma: 1, center: 0.5, width: 1.5}\n  stokes: {gamma: 1}\n"
      "  control: {shape: constant, gamma: 0}\n");
  EXPECT_EQ(std::get<Gaussian>(scaled.pulses.pump).width, 3.0);
  EXPECT_EQ(std::get<Gaussian>(scaled.pulses.pump).center, 0.5);
  EXPECT_EQ(scaled.width_factor, 2.0);
}

TEST(ParseConfig, StaticPolicyAndScans) {
  const SystemConfig c = parse_config(kMinimal + R"(detuning: {policy: static, delta1: 0.5, delta2: -1}
scan:
  area: {min: 0, max: 4, steps: 9, numeric_check: true}
  width: {min: 0.1, max: 2, steps: 5}
  detuning: {sum: [0, 1], diff: [-1, 1], steps: [3, 4], gamma3: [0, 2]}
)");
  const auto& s = std::get<StaticDetuning>(c.policy);
  EXPECT_EQ(s.delta1, 0.5);
  EXPECT_EQ(s.delta2, -1.0);
  ASSERT_TRUE(c.scan.area && c.scan.width && c.scan.detuning);
  EXPECT_TRUE(c.scan.area->numeric_check);
  EXPECT_EQ(c.scan.area->steps, 9u);
  EXPECT_EQ(c.scan.width->delay_ratio, 0.5);
  EXPECT_EQ(c.scan.detuning->sum_steps, 3u);
  EXPECT_EQ(c.scan.detuning->diff_steps, 4u);
  EXPECT_EQ(c.scan.detuning->gamma3.size(), 2u);
}

TEST(ParseConfig, SharedEnvelope) {
  const SystemConfig c = parse_config(R"(fano: {q12: 5, q13: 5, q23: 5}
pulses:
  envelope: {center: 1, width: 2}
  pump: {shape: shared, gamma: 1}
  stokes: {shape: shared, gamma: 2}
  control: {shape: shared, gamma: 3}
)");
  const auto& e = std::get<SharedEnvelope>(c.pulses.control);
  EXPECT_EQ(e.gamma, 3.0);
  EXPECT_EQ(e.envelope.center, 1.0);
  EXPECT_EQ(e.envelope.width, 2.0);
}

TEST(ParseConfig, ErrorsCarryLineAndField) {
  EXPECT_EQ(error_of("fano: {q12: 1, q13: 1, q23: 1}\npulses:\n  pump: {gamma: -1}\n"
                     "  stokes: {gamma: 1}\n  control: {gamma: 1}\n")
                .substr(0, 2),
            "3:");
  EXPECT_NE(error_of(kMinimal + "grid: {tol: 0}\n").find("grid.tol"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "bogus: 1\n").find("unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "initial_state: 4\n").find("initial_state"), std::string::npos);
  EXPECT_NE(error_of("fano: {q12: 1, q13: x, q23: 1}\n").find("fano.q13"), std::string::npos);
  EXPECT_NE(error_of("fano: {q12: 1, q13: 1}\n").find("q23"), std::string::npos);
  EXPECT_NE(error_of("fano: [1, 2\n").find("1:"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "detuning: {policy: sideways}\n").find("detuning.policy"),
            std::string::npos);
  EXPECT_NE(error_of(kMinimal + "units: {rate: eV}\n").find("units.rate"), std::string::npos);
}

TEST(ParseConfig, SharedShapeNeedsEnvelope) {
  EXPECT_NE(error_of("fano: {q12: 1, q13: 1, q23: 1}\npulses:\n  pump: {shape: shared, gamma: 1}\n"
                     "  stokes: {gamma: 1}\n  control: {gamma: 1}\n")
                .find("pulses.envelope"),
            std::string::npos);
}

TEST(LoadConfig, ShippedConfigsParse) {
  for (const char* name : {"fig2_area.yaml", "fig3_width.yaml", "fig4_detuning.yaml",
                           "zero_pulses.yaml", "equal_q.yaml"}) {
    EXPECT_NO_THROW(load_config(config_path(name))) << name;
  }
  const SystemConfig fig4 = load_config(config_path("fig4_detuning.yaml"));
  ASSERT_TRUE(fig4.scan.detuning.has_value());
  EXPECT_EQ(fig4.scan.detuning->sum_steps, 121u);
  EXPECT_EQ(fig4.scan.detuning->sum_min, -2.0);
  EXPECT_EQ(fig4.scan.detuning->diff_max, 6.0);
}

TEST(LoadConfig, MissingFileNamesPath) {
  try {
    load_config("/nonexistent/tripod.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/tripod.yaml"), std::string::npos);
  }
}
