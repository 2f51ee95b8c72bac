#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "massim/config.hpp"

using namespace massim;

TEST(Units, Conversions) {
  EXPECT_DOUBLE_EQ(dbm_to_watt(30.0), 1.0);
  EXPECT_DOUBLE_EQ(dbm_to_watt(0.0), 1e-3);
  EXPECT_NEAR(dbm_to_watt(-114.0), 3.98107170553497e-15, 1e-27);
  EXPECT_DOUBLE_EQ(db_to_linear(10.0), 10.0);
  EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
  EXPECT_NEAR(db_to_linear(5.0), 3.1622776601683795, 1e-15);
  EXPECT_DOUBLE_EQ(linear_to_db(100.0), 20.0);
  EXPECT_DOUBLE_EQ(mw_to_watt(500.0), 0.5);
}

TEST(Config, DefaultsValidate) {
  ScenarioConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.num_links(), 30);
  EXPECT_EQ(cfg.num_actions(), 16 * 4 + 1);
}

TEST(Config, ValidateRejectsBadValues) {
  ScenarioConfig cfg;
  cfg.num_subchannels = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.power_levels_mw = {600.0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.qos.p_latency_max = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.max_d2d_distance_m = cfg.cell_radius_m;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Config, DefaultProfilesMix) {
  ScenarioConfig cfg;
  auto profiles = default_profiles(cfg);
  ASSERT_EQ(profiles.size(), 30u);
  int normal = 0;
  for (const auto& p : profiles) {
    if (p.service == ServiceClass::normal) {
      ++normal;
      EXPECT_EQ(p.arrival_rate, 0.0);
    } else {
      EXPECT_GT(p.arrival_rate, 0.0);
    }
  }
  EXPECT_EQ(normal, 6);  // one in five links
  for (int i = 0; i < 20; ++i) EXPECT_EQ(profiles[i].kind, LinkKind::cellular);
  for (int i = 20; i < 30; ++i) EXPECT_EQ(profiles[i].kind, LinkKind::d2d);
}

TEST(Config, FileRoundTrip) {
  ScenarioConfig cfg;
  cfg.cell_radius_m = 123.0;
  cfg.num_cdevices = 7;
  cfg.power_levels_mw = {10.0, 20.0};
  cfg.max_power_c_mw = 20.0;
  cfg.max_power_d_mw = 20.0;
  cfg.reward.ee_mode = RewardConfig::EeMode::network;
  auto path = std::filesystem::temp_directory_path() / "massim_cfg_test.cfg";
  {
    std::ofstream f(path);
    save_config(cfg, f);
  }
  ScenarioConfig back = load_config(path.string());
  EXPECT_EQ(back.cell_radius_m, 123.0);
  EXPECT_EQ(back.num_cdevices, 7);
  ASSERT_EQ(back.power_levels_mw.size(), 2u);
  EXPECT_EQ(back.power_levels_mw[1], 20.0);
  EXPECT_EQ(back.reward.ee_mode, RewardConfig::EeMode::network);
  std::filesystem::remove(path);
}

TEST(Config, ParseErrorsCarryLocation) {
  auto path = std::filesystem::temp_directory_path() / "massim_cfg_bad.cfg";
  {
    std::ofstream f(path);
    f << "cell_radius_m = 100\nnot_a_key = 1\n";
  }
  try {
    load_config(path.string());
    FAIL() << "expected parse failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Config, EnvOverrides) {
  ScenarioConfig cfg;
  setenv("MASSIM_CELL_RADIUS_M", "222", 1);
  setenv("MASSIM_NUM_CDEVICES", "9", 1);
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.cell_radius_m, 222.0);
  EXPECT_EQ(cfg.num_cdevices, 9);
  unsetenv("MASSIM_CELL_RADIUS_M");
  unsetenv("MASSIM_NUM_CDEVICES");
}
