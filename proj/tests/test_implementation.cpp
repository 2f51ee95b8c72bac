#include <gtest/gtest.h>

#include "massim/implementation.hpp"
#include "massim/train.hpp"

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

std::vector<Mlp> tiny_models(const ScenarioConfig& cfg, int z) {
  std::vector<Mlp> models;
  for (int i = 0; i < z; ++i) {
    Rng rng(100 + i);
    models.push_back(
        Mlp::make({state_dimension(cfg), 8, cfg.num_actions()}, rng));
  }
  return models;
}

}  // namespace

TEST(Implementation, RunsAndRecordsStats) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  auto models = tiny_models(cfg, 5);
  GroupAssignment groups = partition_groups(env.topology(), 2);
  ImplementationConfig icfg;
  auto res = run_implementation(models, env, groups, icfg, 40);
  ASSERT_EQ(res.slots.size(), 40u);
  for (std::size_t t = 0; t < res.slots.size(); ++t) {
    EXPECT_EQ(res.slots[t].slot, t);
    EXPECT_GE(res.slots[t].coop_groups, 0);
  }
}

TEST(Implementation, ModelCountValidated) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  auto models = tiny_models(cfg, 3);
  EXPECT_THROW(run_implementation(models, env, GroupAssignment::singletons(5),
                                  ImplementationConfig{}, 5),
               std::invalid_argument);
}

TEST(Implementation, NewAgentStartsTransferAndEndsIt) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  auto models = tiny_models(cfg, 5);
  // one group holding everyone, so an expert within psi_rad exists
  GroupAssignment groups = partition_groups(env.topology(), 5);
  ImplementationConfig icfg;
  icfg.poor_window_slots = 5;
  icfg.transfer.mu0 = 0.5;
  icfg.transfer.kappa = 0.5;  // mu halves per slot: ends within a few slots
  icfg.transfer.psi_rad = 10.0;
  std::vector<std::uint8_t> fresh(5, 0);
  fresh[1] = 1;  // agent 1 marked as newly joined
  auto res = run_implementation(models, env, groups, icfg, 30, fresh);

  bool started = false, ended = false;
  for (const auto& e : res.events) {
    if (e.agent == 1 && e.event_type == "transfer_start") {
      started = true;
      EXPECT_NE(e.expert, 1);
      EXPECT_DOUBLE_EQ(e.mu, 0.5);
    }
    if (e.agent == 1 && e.event_type == "transfer_end") ended = true;
  }
  EXPECT_TRUE(started);
  EXPECT_TRUE(ended);
  EXPECT_GT(res.slots[0].transfer_active, 0);
}

TEST(Implementation, TransferDisabledProducesNoEvents) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  auto models = tiny_models(cfg, 5);
  ImplementationConfig icfg;
  icfg.transfer_enabled = false;
  std::vector<std::uint8_t> fresh(5, 1);
  auto res = run_implementation(models, env, GroupAssignment::singletons(5), icfg, 20, fresh);
  EXPECT_TRUE(res.events.empty());
  for (const auto& s : res.slots) EXPECT_EQ(s.transfer_active, 0);
}

TEST(Implementation, SingletonGroupsNeverFindExperts) {
  auto cfg = small_cfg();
  Environment env(cfg, default_profiles(cfg));
  auto models = tiny_models(cfg, 5);
  ImplementationConfig icfg;
  icfg.poor_window_slots = 2;
  std::vector<std::uint8_t> fresh(5, 1);
  auto res = run_implementation(models, env, GroupAssignment::singletons(5), icfg, 20, fresh);
  EXPECT_TRUE(res.events.empty());  // no neighbors, so no transfer can start
}
