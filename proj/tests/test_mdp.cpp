#include <gtest/gtest.h>

#include "massim/mdp.hpp"

using namespace massim;

TEST(Action, EncodeDecode) {
  const int P = 4;
  EXPECT_TRUE(AgentAction::idle().is_idle());
  for (int n = 0; n < 16; ++n) {
    for (int p = 0; p < P; ++p) {
      AgentAction a = AgentAction::transmit(n, p, P);
      EXPECT_FALSE(a.is_idle());
      EXPECT_EQ(a.subchannel(P), n);
      EXPECT_EQ(a.power_level(P), p);
    }
  }
  EXPECT_EQ(AgentAction::transmit(0, 0, P).index, 1);
  EXPECT_EQ(AgentAction::transmit(15, 3, P).index, 64);
}

TEST(State, QualityMapping) {
  EXPECT_DOUBLE_EQ(quality_to_unit(-20.0), 0.0);
  EXPECT_DOUBLE_EQ(quality_to_unit(40.0), 1.0);
  EXPECT_DOUBLE_EQ(quality_to_unit(10.0), 0.5);
  EXPECT_DOUBLE_EQ(quality_to_unit(-50.0), 0.0);  // clipped
  EXPECT_DOUBLE_EQ(quality_to_unit(80.0), 1.0);
}

TEST(State, EncodeLayoutAndClipping) {
  ScenarioConfig cfg;
  cfg.num_subchannels = 3;
  EXPECT_EQ(state_dimension(cfg), 8);
  LinkProfile p;
  p.mean_packet_bits = 100.0;
  LinkObservation obs;
  obs.channel_busy = {1, 0, 1};
  obs.channel_quality_db = {10.0, -20.0, 40.0};
  obs.queued_bits = 500.0;
  obs.qos_window = 0.75;
  AgentState s = encode_state(obs, p, cfg);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  EXPECT_DOUBLE_EQ(s[2], 1.0);
  EXPECT_DOUBLE_EQ(s[3], 0.5);
  EXPECT_DOUBLE_EQ(s[4], 0.0);
  EXPECT_DOUBLE_EQ(s[5], 1.0);
  EXPECT_DOUBLE_EQ(s[6], 0.5);  // 500 / (10 * 100)
  EXPECT_DOUBLE_EQ(s[7], 0.75);
  obs.queued_bits = 1e9;
  EXPECT_DOUBLE_EQ(encode_state(obs, p, cfg)[6], 1.0);  // clipped
}

TEST(Qos, UrllcIndicators) {
  LinkProfile p;
  p.service = ServiceClass::urllc;
  p.qos.sinr_min_db = 5.0;
  const double ok_sinr = db_to_linear(6.0);
  const double bad_sinr = db_to_linear(4.0);
  // rate above the floor and SINR above the threshold: success
  auto ind = qos_indicators(p, 2.0, ok_sinr, true, 1.5);
  EXPECT_EQ(ind.chi_urllc, 0);
  EXPECT_EQ(ind.chi_nor, 0);
  // rate misses the floor
  EXPECT_EQ(qos_indicators(p, 1.0, ok_sinr, true, 1.5).chi_urllc, 1);
  // SINR misses the threshold
  EXPECT_EQ(qos_indicators(p, 2.0, bad_sinr, true, 1.5).chi_urllc, 1);
  // silent slot with a queue: rate 0 fails the floor, SINR not evaluated
  EXPECT_EQ(qos_indicators(p, 0.0, 0.0, false, 1.5).chi_urllc, 1);
}

TEST(Qos, NormalIndicators) {
  LinkProfile p;
  p.service = ServiceClass::normal;
  p.qos.rate_min_normal = 3.5;
  EXPECT_EQ(qos_indicators(p, 3.5, 0.0, true, 0.0).chi_nor, 0);  // boundary passes
  EXPECT_EQ(qos_indicators(p, 3.4, 0.0, true, 0.0).chi_nor, 1);
  EXPECT_EQ(qos_indicators(p, 3.4, 0.0, true, 0.0).chi_urllc, 0);
}

TEST(Reward, Arithmetic) {
  RewardConfig rc;
  rc.c1 = 2.0;
  rc.c2 = 3.0;
  rc.ee_scale = 10.0;
  QosIndicators none;
  EXPECT_DOUBLE_EQ(reward(50.0, none, rc), 5.0);
  QosIndicators u{1, 0};
  EXPECT_DOUBLE_EQ(reward(50.0, u, rc), 3.0);
  QosIndicators n{0, 1};
  EXPECT_DOUBLE_EQ(reward(50.0, n, rc), 2.0);
}

TEST(Reward, PerLinkEe) {
  ScenarioConfig cfg;
  cfg.num_cdevices = 1;
  cfg.num_d2d_pairs = 1;
  cfg.num_subchannels = 1;
  AssignmentMatrix a(1, 1, 1);
  a.set_cellular(0, 0, 200.0);
  LinkRates r;
  r.N = 1;
  r.rate_c = {5.0};
  r.rate_d = {2.0};
  r.sinr_per_subchannel.assign(2, 0.0);
  // own rate over own transmit + circuit power
  EXPECT_DOUBLE_EQ(per_link_ee(0, r, a, cfg), 5.0 / 0.25);
  // idle link burns only circuit power
  EXPECT_DOUBLE_EQ(per_link_ee(1, r, a, cfg), 2.0 / 0.05);
  cfg.reward.ee_mode = RewardConfig::EeMode::network;
  double net = network_ee(a, r, cfg);
  EXPECT_DOUBLE_EQ(per_link_ee(0, r, a, cfg), net);
  EXPECT_DOUBLE_EQ(per_link_ee(1, r, a, cfg), net);
}
