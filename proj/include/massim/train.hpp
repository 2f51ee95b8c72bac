#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "massim/coop.hpp"
#include "massim/dqn.hpp"
#include "massim/env.hpp"
#include "massim/metrics.hpp"

namespace massim {

struct TrainConfig {
  double beta = 1e-3;            // weight step for Eq.-(22)-style descent
  double gamma = 0.95;           // discount
  double eps0 = 1.0;
  double eps_min = 0.05;
  double eps_decay = 0.995;      // per-episode multiplicative decay
  int batch_size = 64;
  int episodes = 2000;
  int steps_per_episode = 200;   // T
  int target_sync_period = 100;  // in update steps; 0 = faithful single-network loss
  int updates_per_episode = 1;   // mini-batches per agent per episode
  int buffer_capacity = 50000;
  std::vector<int> hidden{250, 250, 100};
  std::uint64_t seed = 1;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainConfig: gamma outside (0,1)");
    if (eps0 < eps_min || eps0 > 1.0 || eps_min < 0.0)
      throw std::invalid_argument("TrainConfig: epsilon schedule invalid");
    if (batch_size < 1 || steps_per_episode < 1 || buffer_capacity < 1)
      throw std::invalid_argument("TrainConfig: counts must be positive");
  }
};

enum class TrainMode { independent, cooperative };

struct EpisodeMetrics {
  int episode = 0;
  double mean_ee = 0.0;
  double success_all = 1.0;
  double success_urllc = 1.0;
  double success_normal = 1.0;
  double mean_reward = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  std::vector<Mlp> models;
  std::vector<EpisodeMetrics> metrics;
};

inline std::vector<int> qnetwork_sizes(const ScenarioConfig& scenario,
                                       const TrainConfig& cfg) {
  std::vector<int> sizes{state_dimension(scenario)};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(scenario.num_actions());
  return sizes;
}

// DQN training loop: per episode, T steps of observe / epsilon-greedy act /
// reward / store, then per-agent mini-batch sampling, loss and gradient step,
// policy refresh. In cooperative mode the exploit-side actions are selected
// jointly per group (sequential greedy) and exploring members avoid the
// subchannels their group has already claimed for cellular use. The
// environment runs continuously across episodes so fading is never replayed.
inline TrainResult train(Environment& env, const TrainConfig& cfg, TrainMode mode,
                         const GroupAssignment* groups = nullptr) {
  cfg.validate();
  if (mode == TrainMode::cooperative && groups == nullptr)
    throw std::invalid_argument("train: cooperative mode requires a group assignment");
  const int z = env.num_links();
  const int P = static_cast<int>(env.config().power_levels_mw.size());

  TrainResult out;
  std::vector<Mlp> targets;
  std::vector<ReplayBuffer> buffers;
  std::vector<Rng> explore_rng, sample_rng;
  const std::vector<int> sizes = qnetwork_sizes(env.config(), cfg);
  for (int i = 0; i < z; ++i) {
    Rng init_rng(Rng::derive(cfg.seed, 0x1217, i));
    out.models.push_back(Mlp::make(sizes, init_rng));
    targets.push_back(out.models.back());
    buffers.emplace_back(cfg.buffer_capacity);
    explore_rng.emplace_back(Rng::derive(cfg.seed, 0xE391, i));
    sample_rng.emplace_back(Rng::derive(cfg.seed, 0x5A2B, i));
  }
  std::vector<int> update_steps(z, 0);

  double epsilon = cfg.eps0;
  std::vector<AgentState> prev_states = env.states();
  Mlp::Grad grad;

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    std::vector<SlotStats> episode_slots;
    episode_slots.reserve(cfg.steps_per_episode);
    double reward_sum = 0.0;

    for (int t = 0; t < cfg.steps_per_episode; ++t) {
      std::vector<AgentAction> actions(z);
      std::vector<std::uint8_t> exploring(z, 0);
      for (int i = 0; i < z; ++i)
        exploring[i] = explore_rng[i].uniform() < epsilon ? 1 : 0;

      if (mode == TrainMode::independent) {
        for (int i = 0; i < z; ++i) {
          actions[i] = exploring[i]
                           ? AgentAction{explore_rng[i].uniform_int(env.num_actions())}
                           : AgentAction{argmax_sensing(out.models[i].forward(prev_states[i]),
                                                        prev_states[i],
                                                        i < env.config().num_cdevices,
                                                        env.config().num_subchannels, P,
                                                        env.backlogged(i))};
        }
      } else {
        const int N = env.config().num_subchannels;
        for (const std::vector<int>& members : groups->groups) {
          JointContext ctx;
          ctx.num_subchannels = N;
          ctx.num_power_levels = P;
          std::vector<int> exploit_members;
          for (int i : members) {
            if (exploring[i]) continue;
            exploit_members.push_back(i);
            ctx.is_cellular.push_back(i < env.config().num_cdevices ? 1 : 0);
            ctx.states.push_back(prev_states[i]);
            ctx.must_transmit.push_back(env.backlogged(i) ? 1 : 0);
            const Mlp* net = &out.models[i];
            ctx.evaluators.push_back([net](const AgentState& s) { return net->forward(s); });
          }
          std::vector<AgentAction> chosen;
          if (!exploit_members.empty()) {
            chosen = joint_action(ctx, JointMode::sequential_greedy);
            for (std::size_t j = 0; j < exploit_members.size(); ++j)
              actions[exploit_members[j]] = chosen[j];
          }
          // Coordinated exploration: group members share their choices, so a
          // cellular explorer draws uniformly from the subchannels no group
          // member has already claimed for cellular use. It may still probe
          // channels its own sensing flags as busy; those out-of-group
          // collision penalties are what teach the nets which channels are
          // contested.
          std::uint64_t group_c_mask = 0;
          for (std::size_t j = 0; j < exploit_members.size(); ++j) {
            if (chosen[j].is_idle() || !ctx.is_cellular[j]) continue;
            group_c_mask |= 1ULL << chosen[j].subchannel(P);
          }
          for (int i : members) {
            if (!exploring[i]) continue;
            const bool cellular = i < env.config().num_cdevices;
            std::vector<int> cand;
            for (int a = 1; a < env.num_actions(); ++a) {
              if (cellular && (group_c_mask & (1ULL << ((a - 1) / P)))) continue;
              cand.push_back(a);
            }
            if (cand.empty() || !env.backlogged(i)) cand.push_back(0);
            actions[i] = {cand[explore_rng[i].uniform_int(static_cast<int>(cand.size()))]};
            if (cellular && !actions[i].is_idle())
              group_c_mask |= 1ULL << actions[i].subchannel(P);
          }
        }
      }

      const std::uint64_t slot = env.slot();
      Environment::StepResult res = env.step(actions);
      std::vector<AgentState> next_states = env.states();
      for (int i = 0; i < z; ++i) {
        buffers[i].push({prev_states[i], actions[i].index, res.rewards[i], next_states[i]});
        reward_sum += res.rewards[i];
      }
      episode_slots.push_back(summarize_slot(slot, res, env.profiles()));
      prev_states.swap(next_states);
    }

    for (int i = 0; i < z; ++i) {
      if (buffers[i].size() < static_cast<std::size_t>(cfg.batch_size)) continue;
      for (int u = 0; u < cfg.updates_per_episode; ++u) {
        auto batch = buffers[i].sample(cfg.batch_size, sample_rng[i]);
        const Mlp& target = cfg.target_sync_period == 0 ? out.models[i] : targets[i];
        td_loss(out.models[i], target, batch, cfg.gamma, grad);
        sgd_step(out.models[i], grad, cfg.beta);
        ++update_steps[i];
        if (cfg.target_sync_period > 0 && update_steps[i] % cfg.target_sync_period == 0)
          targets[i] = out.models[i];
      }
    }

    EpisodeMetrics em;
    em.episode = episode;
    em.mean_ee = mean_network_ee(episode_slots);
    em.success_all = success_probability(episode_slots, ClassFilter::all);
    em.success_urllc = success_probability(episode_slots, ClassFilter::urllc);
    em.success_normal = success_probability(episode_slots, ClassFilter::normal);
    em.mean_reward = reward_sum / (static_cast<double>(cfg.steps_per_episode) * z);
    em.epsilon = epsilon;
    out.metrics.push_back(em);

    epsilon = std::max(cfg.eps_min, epsilon * cfg.eps_decay);
  }
  return out;
}

}  // namespace massim
