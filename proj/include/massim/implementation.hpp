#pragma once

#include <string>
#include <vector>

#include "massim/coop.hpp"
#include "massim/env.hpp"
#include "massim/metrics.hpp"

namespace massim {

struct ImplementationConfig {
  TransferConfig transfer;
  bool transfer_enabled = true;
  JointMode joint_mode = JointMode::sequential_greedy;
  int poor_window_slots = 100;   // consecutive slots below threshold before transfer
  double poor_threshold = 0.5;   // QoS satisfaction trigger level
  double mu_stop = 0.01;         // transfer ends once mu decays below this
};

struct TransferEvent {
  std::uint64_t slot = 0;
  int agent = -1;
  std::string event_type;  // "transfer_start" | "transfer_end"
  int expert = -1;
  double mu = 0.0;
};

struct ImplementationResult {
  std::vector<SlotStats> slots;
  std::vector<TransferEvent> events;
};

// Distributed cooperative implementation stage: per slot each agent observes;
// poor-performing (or externally marked new) agents run the transfer branch
// with a blended Q and decaying mu, everyone else selects a cooperative joint
// action per group. No network weights are changed here; policies are the
// argmax of the (possibly blended) trained models.
inline ImplementationResult run_implementation(
    const std::vector<Mlp>& models, Environment& env, const GroupAssignment& groups,
    const ImplementationConfig& icfg, int num_slots,
    const std::vector<std::uint8_t>& initially_new = {}) {
  const int z = env.num_links();
  if (static_cast<int>(models.size()) != z)
    throw std::invalid_argument("run_implementation: one model per link required");
  const int P = static_cast<int>(env.config().power_levels_mw.size());
  icfg.transfer.validate();

  std::vector<AgentProfile> features;
  features.reserve(z);
  for (const LinkProfile& p : env.profiles()) features.push_back(AgentProfile::from(p));

  struct TransferState {
    bool active = false;
    int expert = -1;
    double mu = 0.0;
    int poor_streak = 0;
  };
  std::vector<TransferState> transfer(z);
  if (icfg.transfer_enabled) {
    for (std::size_t i = 0; i < initially_new.size() && i < static_cast<std::size_t>(z); ++i)
      if (initially_new[i]) transfer[i].poor_streak = icfg.poor_window_slots;
  }

  ImplementationResult out;
  out.slots.reserve(num_slots);

  for (int t = 0; t < num_slots; ++t) {
    // Transfer triggers are evaluated on the current QoS satisfaction window.
    if (icfg.transfer_enabled) {
      for (int i = 0; i < z; ++i) {
        TransferState& ts = transfer[i];
        if (ts.active) continue;
        // A full streak (including the pre-charged one of a newly joined
        // agent) stays armed until the trigger below consumes it.
        if (ts.poor_streak < icfg.poor_window_slots) {
          if (env.qos_window(i) < icfg.poor_threshold) ++ts.poor_streak;
          else ts.poor_streak = 0;
        }
        if (ts.poor_streak >= icfg.poor_window_slots) {
          std::vector<std::pair<int, AgentProfile>> neighbors;
          for (int j : groups.groups[groups.member_group[i]])
            if (j != i) neighbors.emplace_back(j, features[j]);
          if (auto expert = select_expert(features[i], neighbors, icfg.transfer.psi_rad)) {
            ts.active = true;
            ts.expert = *expert;
            ts.mu = icfg.transfer.mu0;
            out.events.push_back({env.slot(), i, "transfer_start", ts.expert, ts.mu});
          }
          ts.poor_streak = 0;
        }
      }
    }

    std::vector<AgentAction> actions(z);
    int coop_groups = 0;
    int transfer_active = 0;

    // Transfer branch: blended-Q argmax on the agent's own observation.
    for (int i = 0; i < z; ++i) {
      if (!transfer[i].active) continue;
      ++transfer_active;
      QFn blended = blend_models(models[transfer[i].expert], models[i], transfer[i].mu);
      AgentState s = env.state(i);
      std::vector<double> q = blended(s);
      actions[i] = {argmax_sensing(q, s, i < env.config().num_cdevices,
                                   env.config().num_subchannels, P, env.backlogged(i))};
    }

    // Cooperative branch: joint selection per group over non-transferring
    // members.
    for (const std::vector<int>& members : groups.groups) {
      JointContext ctx;
      ctx.num_subchannels = env.config().num_subchannels;
      ctx.num_power_levels = P;
      std::vector<int> active_members;
      for (int i : members) {
        if (transfer[i].active) continue;
        active_members.push_back(i);
        ctx.is_cellular.push_back(i < env.config().num_cdevices ? 1 : 0);
        ctx.states.push_back(env.state(i));
        ctx.must_transmit.push_back(env.backlogged(i) ? 1 : 0);
        const Mlp* net = &models[i];
        ctx.evaluators.push_back([net](const AgentState& s) { return net->forward(s); });
      }
      if (active_members.empty()) continue;
      if (active_members.size() > 1) ++coop_groups;
      std::vector<AgentAction> chosen = joint_action(ctx, icfg.joint_mode);
      for (std::size_t j = 0; j < active_members.size(); ++j)
        actions[active_members[j]] = chosen[j];
    }

    const std::uint64_t slot = env.slot();
    Environment::StepResult res = env.step(actions);
    SlotStats stats = summarize_slot(slot, res, env.profiles());
    stats.transfer_active = transfer_active;
    stats.coop_groups = coop_groups;
    out.slots.push_back(stats);

    // Transfer rate decays after each learning step; transfer ends once the
    // expert's influence is negligible.
    for (int i = 0; i < z; ++i) {
      TransferState& ts = transfer[i];
      if (!ts.active) continue;
      ts.mu = decay_transfer_rate(ts.mu, icfg.transfer.kappa);
      if (ts.mu < icfg.mu_stop) {
        out.events.push_back({env.slot(), i, "transfer_end", ts.expert, ts.mu});
        ts.active = false;
        ts.expert = -1;
        ts.mu = 0.0;
        ts.poor_streak = 0;
      }
    }
  }
  return out;
}

}  // namespace massim
