#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "massim/dqn.hpp"
#include "massim/env.hpp"
#include "massim/metrics.hpp"
#include "massim/mlp.hpp"

namespace massim {

// Random multi-access: every link draws an action uniformly each slot.
inline std::vector<AgentAction> random_ma_step(int num_links, int num_actions, Rng& rng) {
  std::vector<AgentAction> actions(num_links);
  for (int i = 0; i < num_links; ++i) actions[i] = {rng.uniform_int(num_actions)};
  return actions;
}

inline std::vector<SlotStats> run_random(Environment& env, int num_slots, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0xBA5E));
  std::vector<SlotStats> out;
  out.reserve(num_slots);
  for (int t = 0; t < num_slots; ++t) {
    const std::uint64_t slot = env.slot();
    auto res = env.step(random_ma_step(env.num_links(), env.num_actions(), rng));
    out.push_back(summarize_slot(slot, res, env.profiles()));
  }
  return out;
}

// Fully distributed DQN: every agent independently plays the greedy action of
// its own trained network with carrier sensing, no grouping and no transfer.
inline std::vector<AgentAction> fully_distributed_step(
    const std::vector<Mlp>& models, const std::vector<AgentState>& states, int num_cdevices,
    int num_subchannels, int num_power_levels,
    const std::vector<std::uint8_t>& must_transmit = {}) {
  std::vector<AgentAction> actions(models.size());
  for (std::size_t i = 0; i < models.size(); ++i)
    actions[i] = {argmax_sensing(models[i].forward(states[i]), states[i],
                                 static_cast<int>(i) < num_cdevices, num_subchannels,
                                 num_power_levels,
                                 !must_transmit.empty() && must_transmit[i] != 0)};
  return actions;
}

inline std::vector<SlotStats> run_fully_distributed(const std::vector<Mlp>& models,
                                                    Environment& env, int num_slots) {
  if (static_cast<int>(models.size()) != env.num_links())
    throw std::invalid_argument("run_fully_distributed: one model per link required");
  std::vector<SlotStats> out;
  out.reserve(num_slots);
  for (int t = 0; t < num_slots; ++t) {
    std::vector<AgentState> states;
    std::vector<std::uint8_t> must(models.size(), 0);
    states.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
      states.push_back(env.state(static_cast<int>(i)));
      must[i] = env.backlogged(static_cast<int>(i)) ? 1 : 0;
    }
    const std::uint64_t slot = env.slot();
    auto res = env.step(fully_distributed_step(
        models, states, env.config().num_cdevices, env.config().num_subchannels,
        static_cast<int>(env.config().power_levels_mw.size()), must));
    out.push_back(summarize_slot(slot, res, env.profiles()));
  }
  return out;
}

namespace detail {

// Incremental network-EE evaluator for the centralized coordinate-ascent
// baseline. Each link occupies at most one subchannel, so a move only touches
// the sum rate of the vacated and the entered subchannel.
class CentralizedPlanner {
 public:
  CentralizedPlanner(const ScenarioConfig& cfg, const ChannelState& ch,
                     std::vector<std::uint8_t> eligible)
      : cfg_(cfg), ch_(ch), eligible_(std::move(eligible)),
        K_(cfg.num_cdevices), M_(cfg.num_d2d_pairs), N_(cfg.num_subchannels),
        chosen_n_(K_ + M_, -1), chosen_p_(K_ + M_, 0),
        occupants_(N_), subchannel_rate_(N_, 0.0) {}

  int chosen_subchannel(int i) const { return chosen_n_[i]; }
  int chosen_power(int i) const { return chosen_p_[i]; }

  bool cellular_free(int n, int except_link) const {
    for (int i : occupants_[n])
      if (i < K_ && i != except_link) return false;
    return true;
  }

  double total_ee() const {
    double rate = 0.0;
    for (double r : subchannel_rate_) rate += r;
    double power_w = total_power_w_ + (K_ + M_) * mw_to_watt(cfg_.circuit_power_mw);
    return rate / power_w;
  }

  // EE if link i moved to (n, p_idx); n = -1 means idle.
  double ee_if(int i, int n, int p_idx) const {
    double rate = 0.0;
    for (double r : subchannel_rate_) rate += r;
    double power_w = total_power_w_;
    const int old_n = chosen_n_[i];
    if (old_n >= 0) {
      rate -= subchannel_rate_[old_n];
      rate += rate_without(old_n, i);
      power_w -= mw_to_watt(cfg_.power_levels_mw[chosen_p_[i]]);
    }
    if (n >= 0 && n != old_n) {
      rate -= subchannel_rate_[n];
      rate += rate_with(n, i, p_idx);
      power_w += mw_to_watt(cfg_.power_levels_mw[p_idx]);
    } else if (n >= 0) {
      // Same subchannel, possibly different power.
      rate -= rate_without(old_n, i);
      rate += rate_with_replaced(n, i, p_idx);
      power_w += mw_to_watt(cfg_.power_levels_mw[p_idx]);
    }
    power_w += (K_ + M_) * mw_to_watt(cfg_.circuit_power_mw);
    return rate / power_w;
  }

  void apply(int i, int n, int p_idx) {
    const int old_n = chosen_n_[i];
    if (old_n >= 0) {
      auto& occ = occupants_[old_n];
      occ.erase(std::find(occ.begin(), occ.end(), i));
      total_power_w_ -= mw_to_watt(cfg_.power_levels_mw[chosen_p_[i]]);
      subchannel_rate_[old_n] = sum_rate(old_n, occupants_[old_n]);
    }
    chosen_n_[i] = n;
    chosen_p_[i] = p_idx;
    if (n >= 0) {
      occupants_[n].push_back(i);
      total_power_w_ += mw_to_watt(cfg_.power_levels_mw[p_idx]);
      subchannel_rate_[n] = sum_rate(n, occupants_[n]);
    }
  }

 private:
  double power_w_of(int i) const { return mw_to_watt(cfg_.power_levels_mw[chosen_p_[i]]); }

  double gain_between(int from, int to_d2d_m) const {
    return from < K_ ? ch_.g_km_at(from, to_d2d_m, M_)
                     : ch_.g_mm_at(from - K_, to_d2d_m, M_);
  }

  // Sum rate of a concrete occupant set on subchannel n; "override" lets a
  // candidate link's power be substituted without mutating state.
  double sum_rate_set(int n, const std::vector<int>& occ, int override_link,
                      double override_p_w) const {
    const double noise = cfg_.noise_w();
    double total = 0.0;
    for (int i : occ) {
      const double p_i = i == override_link ? override_p_w : power_w_of(i);
      double interf = 0.0;
      double signal;
      if (i < K_) {
        for (int j : occ) {
          if (j == i || j < K_) continue;
          interf += (j == override_link ? override_p_w : power_w_of(j)) * ch_.g_mB[j - K_];
        }
        signal = p_i * ch_.h_k_at(i, n);
      } else {
        const int m = i - K_;
        for (int j : occ) {
          if (j == i) continue;
          interf += (j == override_link ? override_p_w : power_w_of(j)) * gain_between(j, m);
        }
        signal = p_i * ch_.h_m_at(m, n);
      }
      total += std::log2(1.0 + signal / (interf + noise));
    }
    return total;
  }

  double sum_rate(int n, const std::vector<int>& occ) const {
    return sum_rate_set(n, occ, -1, 0.0);
  }

  double rate_without(int n, int link) const {
    std::vector<int> occ;
    for (int j : occupants_[n])
      if (j != link) occ.push_back(j);
    return sum_rate_set(n, occ, -1, 0.0);
  }
  double rate_with(int n, int link, int p_idx) const {
    std::vector<int> occ = occupants_[n];
    occ.push_back(link);
    return sum_rate_set(n, occ, link, mw_to_watt(cfg_.power_levels_mw[p_idx]));
  }
  double rate_with_replaced(int n, int link, int p_idx) const {
    return sum_rate_set(n, occupants_[n], link, mw_to_watt(cfg_.power_levels_mw[p_idx]));
  }

  const ScenarioConfig& cfg_;
  const ChannelState& ch_;
  std::vector<std::uint8_t> eligible_;
  int K_, M_, N_;
  std::vector<int> chosen_n_, chosen_p_;
  std::vector<std::vector<int>> occupants_;
  std::vector<double> subchannel_rate_;
  double total_power_w_ = 0.0;
};

}  // namespace detail

// Centralized grouped multi-access: a genie with this slot's channel runs
// coordinate ascent on network EE over all links that have traffic, one link
// at a time, until a full sweep makes no improvement. The search space is the
// same discrete action set the agents have; C-device co-channel conflicts are
// excluded, so the result is always constraint-feasible.
inline std::vector<AgentAction> centralized_g_ma_step(const Environment& env,
                                                      int max_sweeps = 6) {
  const ScenarioConfig& cfg = env.config();
  const int z = env.num_links();
  const int K = cfg.num_cdevices, N = cfg.num_subchannels;
  const int P = static_cast<int>(cfg.power_levels_mw.size());
  const ChannelState ch = env.peek_channel();

  std::vector<std::uint8_t> eligible(z, 0);
  for (int i = 0; i < z; ++i) eligible[i] = env.has_traffic(i) ? 1 : 0;

  detail::CentralizedPlanner plan(cfg, ch, eligible);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int i = 0; i < z; ++i) {
      if (!eligible[i]) continue;
      double best_ee = plan.total_ee();
      int best_n = plan.chosen_subchannel(i), best_p = plan.chosen_power(i);
      for (int n = -1; n < N; ++n) {
        if (n >= 0 && i < K && !plan.cellular_free(n, i)) continue;
        for (int p = 0; p < (n < 0 ? 1 : P); ++p) {
          double ee = plan.ee_if(i, n, n < 0 ? 0 : p);
          if (ee > best_ee + 1e-12) {
            best_ee = ee;
            best_n = n;
            best_p = n < 0 ? 0 : p;
          }
        }
      }
      if (best_n != plan.chosen_subchannel(i) || best_p != plan.chosen_power(i)) {
        plan.apply(i, best_n, best_p);
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<AgentAction> actions(z);
  for (int i = 0; i < z; ++i) {
    int n = plan.chosen_subchannel(i);
    actions[i] = n < 0 ? AgentAction::idle() : AgentAction::transmit(n, plan.chosen_power(i), P);
  }
  return actions;
}

// Preamble reservation stage of the grouped-access scheme: every link the
// planner scheduled announces itself on a random preamble from a finite pool,
// and links whose preamble collides get no grant this slot. The planner's
// assignment stays collision-free and EE-greedy, but access is contended, so
// reservation clashes (not channel quality) bound its reliability.
inline std::vector<AgentAction> preamble_contention(std::vector<AgentAction> actions,
                                                    int pool, Rng& rng) {
  std::vector<int> preamble(actions.size(), -1);
  std::vector<int> count(pool, 0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].is_idle()) continue;
    preamble[i] = rng.uniform_int(pool);
    ++count[preamble[i]];
  }
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (preamble[i] >= 0 && count[preamble[i]] > 1) actions[i] = AgentAction::idle();
  return actions;
}

inline std::vector<SlotStats> run_centralized(Environment& env, int num_slots,
                                              std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x93A1B));
  std::vector<SlotStats> out;
  out.reserve(num_slots);
  for (int t = 0; t < num_slots; ++t) {
    const std::uint64_t slot = env.slot();
    auto actions = preamble_contention(centralized_g_ma_step(env),
                                       env.config().preamble_pool, rng);
    auto res = env.step(actions);
    out.push_back(summarize_slot(slot, res, env.profiles()));
  }
  return out;
}

}  // namespace massim
