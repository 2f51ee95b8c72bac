#include <gtest/gtest.h>

#include "massim/coop.hpp"

using namespace massim;

namespace {

LinkProfile urllc_profile(int id) {
  LinkProfile p;
  p.link_id = id;
  p.service = ServiceClass::urllc;
  return p;
}

QFn table_fn(std::vector<double> values) {
  return [values](const AgentState&) { return values; };
}

}  // namespace

TEST(Coop, BregmanDistance) {
  AgentProfile a, b;
  a.f = {1, 0, 1, 0, 0.5, 0.5, 0.6, 0, 0.3};
  b = a;
  EXPECT_EQ(bregman_distance(a, b), 0.0);
  b.f[0] = 0.0;
  b.f[4] = 0.8;
  EXPECT_NEAR(bregman_distance(a, b), 1.0 + 0.09, 1e-15);
  EXPECT_EQ(bregman_distance(a, b), bregman_distance(b, a));
}

TEST(Coop, ProfileFeatures) {
  LinkProfile p = urllc_profile(0);
  p.qos.sinr_min_db = 15.0;
  p.qos.latency_max_s = 5e-3;
  p.qos.p_latency_max = 1e-4;
  p.arrival_rate = 0.05;
  AgentProfile a = AgentProfile::from(p);
  EXPECT_EQ(a.f[0], 1.0);  // cellular
  EXPECT_EQ(a.f[2], 1.0);  // urllc
  EXPECT_EQ(a.f[3], 0.0);
  EXPECT_DOUBLE_EQ(a.f[4], 0.5);
  EXPECT_DOUBLE_EQ(a.f[5], 0.5);
  EXPECT_DOUBLE_EQ(a.f[6], 0.5);
  EXPECT_EQ(a.f[7], 0.0);  // normal-only feature
  EXPECT_DOUBLE_EQ(a.f[8], 0.5);
}

TEST(Coop, ExpertSelection) {
  AgentProfile learner = AgentProfile::from(urllc_profile(0));
  AgentProfile near = learner;
  near.f[8] += 0.1;  // distance 0.01
  AgentProfile far = learner;
  far.f[0] = 0.0;
  far.f[1] = 1.0;  // distance 2
  std::vector<std::pair<int, AgentProfile>> neighbors{{3, far}, {7, near}};
  auto pick = select_expert(learner, neighbors, 0.5);
  ASSERT_TRUE(pick.has_value());
  EXPECT_EQ(*pick, 7);
  // shrink the ball below every distance: no expert
  EXPECT_FALSE(select_expert(learner, neighbors, 0.001).has_value());
  // exact ties break toward the lowest link id
  std::vector<std::pair<int, AgentProfile>> tied{{9, near}, {4, near}};
  EXPECT_EQ(*select_expert(learner, tied, 0.5), 4);
}

TEST(Coop, BlendModels) {
  Rng r1(1), r2(2);
  Mlp a = Mlp::make({2, 3}, r1);
  Mlp b = Mlp::make({2, 3}, r2);
  AgentState s{0.4, -0.2};
  auto qa = a.forward(s);
  auto qb = b.forward(s);
  auto blended = blend_models(a, b, 0.25)(s);
  for (std::size_t i = 0; i < qa.size(); ++i)
    EXPECT_NEAR(blended[i], 0.25 * qa[i] + 0.75 * qb[i], 1e-15);
  // mu extremes reproduce the endpoints
  EXPECT_EQ(blend_models(a, b, 1.0)(s), qa);
  EXPECT_EQ(blend_models(a, b, 0.0)(s), qb);
  EXPECT_THROW(blend_models(a, b, 1.5), std::invalid_argument);
  Mlp c = Mlp::make({3, 3}, r1);
  EXPECT_THROW(blend_models(a, c, 0.5), std::invalid_argument);
}

TEST(Coop, TransferRateDecay) {
  double mu = 0.8;
  mu = decay_transfer_rate(mu, 0.95);
  EXPECT_DOUBLE_EQ(mu, 0.76);
  for (int i = 0; i < 200; ++i) mu = decay_transfer_rate(mu, 0.95);
  EXPECT_LT(mu, 0.01);
  TransferConfig bad;
  bad.kappa = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Coop, PartitionIsExact) {
  ScenarioConfig cfg;
  cfg.num_cdevices = 7;
  cfg.num_d2d_pairs = 4;
  cfg.cell_radius_m = 100.0;
  cfg.max_d2d_distance_m = 30.0;
  Topology topo = generate_topology(cfg);
  for (int g = 1; g <= 4; ++g) {
    GroupAssignment ga = partition_groups(topo, g);
    std::vector<int> seen(11, 0);
    for (std::size_t gi = 0; gi < ga.groups.size(); ++gi) {
      EXPECT_LE(ga.groups[gi].size(), static_cast<std::size_t>(g));
      for (int m : ga.groups[gi]) {
        ++seen[m];
        EXPECT_EQ(ga.member_group[m], static_cast<int>(gi));
      }
    }
    for (int c : seen) EXPECT_EQ(c, 1);  // every link in exactly one group
  }
  GroupAssignment singles = GroupAssignment::singletons(5);
  EXPECT_EQ(singles.groups.size(), 5u);
  EXPECT_EQ(singles.member_group[3], 3);
}

TEST(Coop, GroupQSums) {
  EXPECT_DOUBLE_EQ(group_q({1.0, -2.0, 4.5}), 3.5);
  EXPECT_DOUBLE_EQ(group_q({}), 0.0);
}

TEST(Coop, SequentialGreedySeesAnnouncements) {
  // 2 members, 2 subchannels, 1 power level. Member 2's utility depends on
  // the busy flag member 1 announces (state component 0 is subchannel 0 busy).
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {0, 0};
  ctx.states = {AgentState{0, 0, 0, 0, 0, 0}, AgentState{0, 0, 0, 0, 0, 0}};
  // member 1 prefers subchannel 0
  ctx.evaluators.push_back(table_fn({0.0, 5.0, 1.0}));
  // member 2 prefers subchannel 0 when free, subchannel 1 when 0 is busy
  ctx.evaluators.push_back([](const AgentState& s) {
    return s[0] > 0.5 ? std::vector<double>{0.0, -1.0, 3.0}
                      : std::vector<double>{0.0, 4.0, 1.0};
  });
  auto actions = joint_action(ctx, JointMode::sequential_greedy);
  EXPECT_EQ(actions[0].index, 1);  // subchannel 0
  EXPECT_EQ(actions[1].index, 2);  // avoided the announced subchannel
}

TEST(Coop, CellularMembersNeverShareWithinGroup) {
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {1, 1};
  ctx.states = {AgentState(6, 0.0), AgentState(6, 0.0)};
  // both want subchannel 0 badly
  ctx.evaluators.push_back(table_fn({0.0, 10.0, 1.0}));
  ctx.evaluators.push_back(table_fn({0.0, 10.0, 1.0}));
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive}) {
    auto actions = joint_action(ctx, mode);
    EXPECT_EQ(actions[0].index, 1);
    EXPECT_EQ(actions[1].index, 2);  // blocked from the taken subchannel
  }
}

TEST(Coop, ExhaustiveBeatsGreedyWhenGreedyIsMyopic) {
  // Member 1 marginally prefers subchannel 0, but taking it wrecks member
  // 2's only good option; the exhaustive search coordinates them.
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {0, 0};
  ctx.states = {AgentState(6, 0.0), AgentState(6, 0.0)};
  ctx.evaluators.push_back(table_fn({0.0, 2.0, 1.9}));
  ctx.evaluators.push_back([](const AgentState& s) {
    return s[0] > 0.5 ? std::vector<double>{0.0, 0.1, 0.1}
                      : std::vector<double>{0.0, 10.0, 0.1};
  });
  auto greedy = joint_action(ctx, JointMode::sequential_greedy);
  auto best = joint_action(ctx, JointMode::exhaustive);
  EXPECT_GE(joint_action_value(ctx, best), joint_action_value(ctx, greedy));
  EXPECT_EQ(best[0].index, 2);   // exhaustive leaves subchannel 0 free
  EXPECT_EQ(best[1].index, 1);
}

TEST(Coop, ExhaustiveGuards) {
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {0, 0, 0, 0};
  ctx.states.assign(4, AgentState(6, 0.0));
  for (int i = 0; i < 4; ++i) ctx.evaluators.push_back(table_fn({0.0, 1.0, 1.0}));
  EXPECT_THROW(joint_action(ctx, JointMode::exhaustive), std::invalid_argument);
}

TEST(Coop, JointSelectionSensesObservedBusy) {
  // A cellular member avoids a subchannel flagged busy in its own
  // observation, not only one announced within the group.
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {1};
  ctx.states = {AgentState{1, 0, 0, 0, 0, 0}};  // subchannel 0 busy
  ctx.evaluators.push_back(table_fn({0.0, 10.0, 1.0}));
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive})
    EXPECT_EQ(joint_action(ctx, mode)[0].index, 2);
  // both flagged: the mask is void and the plain argmax returns
  ctx.states = {AgentState{1, 1, 0, 0, 0, 0}};
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive})
    EXPECT_EQ(joint_action(ctx, mode)[0].index, 1);
  // a D2D member ignores the flag
  ctx.is_cellular = {0};
  ctx.states = {AgentState{1, 0, 0, 0, 0, 0}};
  EXPECT_EQ(joint_action(ctx, JointMode::sequential_greedy)[0].index, 1);
}

TEST(Coop, JointSelectionWorkConservation) {
  JointContext ctx;
  ctx.num_subchannels = 2;
  ctx.num_power_levels = 1;
  ctx.is_cellular = {1};
  ctx.states = {AgentState{0, 0, 0, 0, 0, 0}};
  ctx.evaluators.push_back(table_fn({10.0, 1.0, 2.0}));
  ctx.must_transmit = {1};
  // idle would win on Q alone; the flag forces the best transmit action
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive})
    EXPECT_EQ(joint_action(ctx, mode)[0].index, 2);
  // without the flag the idle action stays available
  ctx.must_transmit = {0};
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive})
    EXPECT_EQ(joint_action(ctx, mode)[0].index, 0);
  // the flag respects sensing: subchannel 1 busy leaves only n0
  ctx.must_transmit = {1};
  ctx.states = {AgentState{0, 1, 0, 0, 0, 0}};
  for (JointMode mode : {JointMode::sequential_greedy, JointMode::exhaustive})
    EXPECT_EQ(joint_action(ctx, mode)[0].index, 1);
}
