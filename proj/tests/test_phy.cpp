#include <gtest/gtest.h>

#include "massim/phy.hpp"

using namespace massim;

namespace {

// 1 C-device, 1 D2D pair, 1 subchannel, hand-set gains.
struct Fixture {
  ScenarioConfig cfg;
  ChannelState ch;
  AssignmentMatrix a{1, 1, 1};

  Fixture() {
    cfg.num_cdevices = 1;
    cfg.num_d2d_pairs = 1;
    cfg.num_subchannels = 1;
    ch.h_k = {1e-9};
    ch.h_m = {1e-8};
    ch.g_km = {1e-12};
    ch.g_mB = {1e-11};
    ch.g_mm = {0.0};
  }
};

}  // namespace

TEST(Phy, CellularSinrHandValue) {
  Fixture f;
  f.a.set_cellular(0, 0, 200.0);
  f.a.set_d2d(0, 0, 100.0);
  // 0.2 * 1e-9 / (0.1 * 1e-11 + 10^-14.4)
  EXPECT_NEAR(sinr_cellular(0, 0, f.a, f.ch, f.cfg), 199.206942876170, 1e-9);
}

TEST(Phy, CellularSinrNoInterference) {
  Fixture f;
  f.a.set_cellular(0, 0, 200.0);
  double expected = 0.2 * 1e-9 / dbm_to_watt(-114.0);
  EXPECT_NEAR(sinr_cellular(0, 0, f.a, f.ch, f.cfg), expected, expected * 1e-12);
}

TEST(Phy, D2dSinrWithCoChannelC) {
  Fixture f;
  f.a.set_cellular(0, 0, 200.0);
  f.a.set_d2d(0, 0, 100.0);
  EXPECT_NEAR(sinr_d2d(0, 0, f.a, f.ch, f.cfg), 4902.41565866263, 1e-8);
}

TEST(Phy, D2dSinrCoChannelTermVanishesWithoutC) {
  Fixture f;
  f.a.set_d2d(0, 0, 100.0);
  double expected = 0.1 * 1e-8 / dbm_to_watt(-114.0);
  EXPECT_NEAR(sinr_d2d(0, 0, f.a, f.ch, f.cfg), expected, expected * 1e-12);
}

TEST(Phy, D2dToD2dInterference) {
  ScenarioConfig cfg;
  cfg.num_cdevices = 0;
  cfg.num_d2d_pairs = 2;
  cfg.num_subchannels = 1;
  ChannelState ch;
  ch.h_k = {};
  ch.h_m = {1e-8, 1e-8};
  ch.g_km = {};
  ch.g_mB = {0.0, 0.0};
  ch.g_mm = {0.0, 2e-12, 3e-12, 0.0};  // (m'=0,m=1)=2e-12, (m'=1,m=0)=3e-12
  AssignmentMatrix a(0, 2, 1);
  a.set_d2d(0, 0, 100.0);
  a.set_d2d(1, 0, 100.0);
  double s0 = sinr_d2d(0, 0, a, ch, cfg);
  double e0 = 0.1 * 1e-8 / (0.1 * 3e-12 + dbm_to_watt(-114.0));
  EXPECT_NEAR(s0, e0, e0 * 1e-12);
  double s1 = sinr_d2d(1, 0, a, ch, cfg);
  double e1 = 0.1 * 1e-8 / (0.1 * 2e-12 + dbm_to_watt(-114.0));
  EXPECT_NEAR(s1, e1, e1 * 1e-12);
}

TEST(Phy, RatesSumOverSubchannels) {
  ScenarioConfig cfg;
  cfg.num_cdevices = 1;
  cfg.num_d2d_pairs = 0;
  cfg.num_subchannels = 2;
  ChannelState ch;
  ch.N = 2;
  ch.h_k = {1e-9, 1e-9};
  AssignmentMatrix a(1, 0, 2);
  a.set_cellular(0, 0, 200.0);
  a.set_cellular(0, 1, 100.0);
  LinkRates r = link_rates(a, ch, cfg);
  double s0 = 0.2e-9 / dbm_to_watt(-114.0);
  double s1 = 0.1e-9 / dbm_to_watt(-114.0);
  EXPECT_NEAR(r.rate_c[0], std::log2(1.0 + s0) + std::log2(1.0 + s1), 1e-9);
  EXPECT_NEAR(r.sinr(0, 0), s0, s0 * 1e-12);
  EXPECT_NEAR(r.sinr(0, 1), s1, s1 * 1e-12);
}

TEST(Phy, NetworkEeHandValue) {
  Fixture f;
  f.a.set_cellular(0, 0, 200.0);
  f.a.set_d2d(0, 0, 100.0);
  LinkRates r = link_rates(f.a, f.ch, f.cfg);
  EXPECT_NEAR(r.rate(0), 7.64534819531396, 1e-9);
  EXPECT_NEAR(r.rate(1), 12.2595713475857, 1e-9);
  // (r_c + r_d) / (0.2 + 0.1 + 2 * 0.05) W
  EXPECT_NEAR(network_ee(f.a, r, f.cfg), 49.7622988572491, 1e-8);
}

TEST(Phy, EmptyAssignmentZeroRateFiniteEe) {
  Fixture f;
  LinkRates r = link_rates(f.a, f.ch, f.cfg);
  EXPECT_EQ(r.rate(0), 0.0);
  EXPECT_EQ(r.rate(1), 0.0);
  // only circuit power in the denominator
  EXPECT_DOUBLE_EQ(network_ee(f.a, r, f.cfg), 0.0);
}

TEST(Phy, ConstraintChecks) {
  ScenarioConfig cfg;
  cfg.num_cdevices = 2;
  cfg.num_d2d_pairs = 1;
  cfg.num_subchannels = 2;
  AssignmentMatrix a(2, 1, 2);
  EXPECT_TRUE(check_constraints(a, cfg).all_ok());

  a.set_cellular(0, 0, 200.0);
  a.set_cellular(1, 0, 100.0);  // two C-devices on subchannel 0
  auto rep = check_constraints(a, cfg);
  EXPECT_FALSE(rep.single_cdevice_ok);
  EXPECT_TRUE(rep.power_c_ok);

  AssignmentMatrix b(2, 1, 2);
  b.set_cellular(0, 0, 400.0);
  b.set_cellular(0, 1, 400.0);  // 800 mW total > 500 mW budget
  rep = check_constraints(b, cfg);
  EXPECT_FALSE(rep.power_c_ok);
  EXPECT_TRUE(rep.single_cdevice_ok);

  AssignmentMatrix c(2, 1, 2);
  c.pd(0, 1) = 50.0;  // power without occupancy
  rep = check_constraints(c, cfg);
  EXPECT_FALSE(rep.power_rho_consistent);

  AssignmentMatrix d(2, 1, 2);
  d.rho_c[0] = 2;  // non-binary indicator
  rep = check_constraints(d, cfg);
  EXPECT_FALSE(rep.binary_ok);
}
