#include <gtest/gtest.h>

#include "massim/env.hpp"

using namespace massim;

namespace {

ScenarioConfig small_cfg() {
  ScenarioConfig cfg;
  cfg.num_cdevices = 3;
  cfg.num_d2d_pairs = 2;
  cfg.num_subchannels = 4;
  cfg.cell_radius_m = 120.0;
  cfg.max_d2d_distance_m = 40.0;
  return cfg;
}

std::vector<AgentAction> all_idle(int z) { return std::vector<AgentAction>(z); }

}  // namespace

TEST(Env, ConstructionAndShapes) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  EXPECT_EQ(env.num_links(), 5);
  EXPECT_EQ(env.num_actions(), 4 * 4 + 1);
  EXPECT_EQ(env.slot(), 0u);
  for (int i = 0; i < env.num_links(); ++i) {
    EXPECT_EQ(env.state(i).size(), static_cast<std::size_t>(state_dimension(cfg)));
    EXPECT_EQ(env.qos_window(i), 1.0);
    if (env.profiles()[i].service == ServiceClass::urllc) {
      EXPECT_GT(env.rate_min(i), 0.0);
    }
  }
  EXPECT_THROW(Environment(cfg, {}), std::invalid_argument);
}

TEST(Env, StepValidatesActions) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  EXPECT_THROW(env.step({}), std::invalid_argument);
  auto bad = all_idle(5);
  bad[0].index = env.num_actions();
  EXPECT_THROW(env.step(bad), std::out_of_range);
}

TEST(Env, CollisionRemovesBothCDevices) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 1.0;  // full-buffer links so everyone radiates
  Environment env(cfg, default_profiles(cfg));
  auto actions = all_idle(5);
  actions[0] = AgentAction::transmit(2, 0, 4);
  actions[1] = AgentAction::transmit(2, 1, 4);  // same subchannel, both cellular
  auto res = env.step(actions);
  EXPECT_EQ(res.collided[0], 1);
  EXPECT_EQ(res.collided[1], 1);
  EXPECT_EQ(res.transmitted[0], 1);
  EXPECT_EQ(res.link_rate[0], 0.0);
  EXPECT_EQ(res.link_rate[1], 0.0);
  // the assignment they were removed from stays feasible
  EXPECT_TRUE(check_constraints(res.assignment, cfg).all_ok());
  EXPECT_EQ(res.assignment.rc(0, 2), 0);
  EXPECT_EQ(res.assignment.rc(1, 2), 0);
  // both count as failed transmissions
  EXPECT_EQ(res.qos_counted[0], 1);
  EXPECT_EQ(res.chi_nor[0], 1);
}

TEST(Env, D2dPairsMayShareSubchannel) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 1.0;
  Environment env(cfg, default_profiles(cfg));
  auto actions = all_idle(5);
  actions[3] = AgentAction::transmit(1, 0, 4);
  actions[4] = AgentAction::transmit(1, 3, 4);
  auto res = env.step(actions);
  EXPECT_EQ(res.collided[3], 0);
  EXPECT_EQ(res.collided[4], 0);
  EXPECT_EQ(res.assignment.rd(0, 1), 1);
  EXPECT_EQ(res.assignment.rd(1, 1), 1);
  EXPECT_GT(res.link_rate[3], 0.0);
}

TEST(Env, UrllcSilentWithoutTraffic) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 0.0;       // all URLLC
  cfg.urllc_arrival_rate = 1e-9;   // effectively never any data
  Environment env(cfg, default_profiles(cfg));
  auto actions = all_idle(5);
  for (int i = 0; i < 5; ++i) actions[i] = AgentAction::transmit(i % 4, 3, 4);
  auto res = env.step(actions);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(res.transmitted[i], 0);   // transmit action without data is silent
    EXPECT_EQ(res.qos_counted[i], 0);
    EXPECT_EQ(res.rewards[i], 0.0);
  }
  EXPECT_EQ(res.network_ee, 0.0);
}

TEST(Env, UrllcIdleWithDataCountsAsFailure) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 0.0;
  cfg.urllc_arrival_rate = 5.0;  // data arrives essentially every slot
  Environment env(cfg, default_profiles(cfg));
  env.step(all_idle(5));  // slot 0 admits the first arrivals
  auto res = env.step(all_idle(5));
  bool any_counted_failure = false;
  for (int i = 0; i < 5; ++i) {
    if (res.qos_counted[i]) {
      EXPECT_EQ(res.chi_urllc[i], 1);
      EXPECT_LT(res.rewards[i], 0.0);
      any_counted_failure = true;
    }
  }
  EXPECT_TRUE(any_counted_failure);
}

TEST(Env, DeterministicReplay) {
  auto cfg = small_cfg();
  Environment a(cfg, default_profiles(cfg));
  Environment b(cfg, default_profiles(cfg));
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    std::vector<AgentAction> actions(5);
    for (auto& act : actions) act = {rng.uniform_int(a.num_actions())};
    auto ra = a.step(actions);
    auto rb = b.step(actions);
    EXPECT_EQ(ra.network_ee, rb.network_ee);
    EXPECT_EQ(ra.rewards, rb.rewards);
    EXPECT_EQ(ra.chi_urllc, rb.chi_urllc);
  }
  EXPECT_EQ(a.states(), b.states());
}

TEST(Env, ResetStateRestartsStreams) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  Rng rng(3);
  std::vector<AgentAction> actions(5);
  for (auto& a : actions) a = {rng.uniform_int(env.num_actions())};
  auto first = env.step(actions);
  env.reset_state();
  EXPECT_EQ(env.slot(), 0u);
  auto again = env.step(actions);
  EXPECT_EQ(first.network_ee, again.network_ee);
  EXPECT_EQ(first.rewards, again.rewards);
}

TEST(Env, BusyFlagsExcludeSelf) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 1.0;
  Environment env(cfg, default_profiles(cfg));
  auto actions = all_idle(5);
  actions[0] = AgentAction::transmit(0, 0, 4);
  actions[3] = AgentAction::transmit(1, 0, 4);
  env.step(actions);
  const auto& obs0 = env.observation(0);
  EXPECT_EQ(obs0.channel_busy[0], 0);  // own occupancy masked out
  EXPECT_EQ(obs0.channel_busy[1], 1);  // the D2D link is visible
  const auto& obs1 = env.observation(1);
  EXPECT_EQ(obs1.channel_busy[0], 1);
  const auto& obs3 = env.observation(3);
  EXPECT_EQ(obs3.channel_busy[1], 0);
  EXPECT_EQ(obs3.channel_busy[0], 1);
}

TEST(Env, QosWindowTracksFailures) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 0.0;
  cfg.urllc_arrival_rate = 5.0;
  Environment env(cfg, default_profiles(cfg));
  for (int t = 0; t < 10; ++t) env.step(all_idle(5));
  // idle links with queued data keep failing, the window collapses
  for (int i = 0; i < 5; ++i) EXPECT_LT(env.qos_window(i), 0.2);
}

TEST(Env, SuccessfulUrllcTransmissionDrainsQueue) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 0.0;
  cfg.urllc_arrival_rate = 0.5;
  cfg.fading_enabled = false;
  Environment env(cfg, default_profiles(cfg));
  int successes = 0;
  for (int t = 0; t < 100; ++t) {
    // links 0..3 transmit alone on their own subchannels at max power
    std::vector<AgentAction> actions(5);
    for (int i = 0; i < 4; ++i) actions[i] = AgentAction::transmit(i, 3, 4);
    auto res = env.step(actions);
    for (int i = 0; i < 4; ++i)
      if (res.transmitted[i] && !res.chi_urllc[i]) ++successes;
  }
  EXPECT_GT(successes, 10);
  // a served rate of >= rate_min (about 1.5 kbit per slot) keeps the
  // 256 bit/slot offered load stable
  for (int i = 0; i < 4; ++i) EXPECT_LT(env.queued_bits(i), 20 * 512.0);
}

TEST(Env, CollidedUrllcTransmissionFailsAndDropsAPacket) {
  auto cfg = small_cfg();
  cfg.normal_fraction = 0.0;
  cfg.urllc_arrival_rate = 5.0;
  Environment env(cfg, default_profiles(cfg));
  env.step(all_idle(5));
  ASSERT_GT(env.queued_bits(0), 0.0);
  auto actions = all_idle(5);
  actions[0] = AgentAction::transmit(0, 0, 4);
  actions[1] = AgentAction::transmit(0, 0, 4);
  auto res = env.step(actions);
  EXPECT_EQ(res.collided[0], 1);
  EXPECT_EQ(res.chi_urllc[0], 1);
  EXPECT_EQ(res.link_rate[0], 0.0);
  EXPECT_LT(res.rewards[0], 0.0);
}
