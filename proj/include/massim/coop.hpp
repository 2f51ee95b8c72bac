#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "massim/config.hpp"
#include "massim/dqn.hpp"
#include "massim/env.hpp"
#include "massim/mlp.hpp"

namespace massim {

// Normalized feature vector exchanged between neighbors when searching for an
// expert: device type, service type, and the QoS parameters.
struct AgentProfile {
  std::array<double, 9> f{};

  static AgentProfile from(const LinkProfile& p) {
    AgentProfile a;
    a.f[0] = p.kind == LinkKind::cellular ? 1.0 : 0.0;
    a.f[1] = p.kind == LinkKind::d2d ? 1.0 : 0.0;
    a.f[2] = p.service == ServiceClass::urllc ? 1.0 : 0.0;
    a.f[3] = p.service == ServiceClass::normal ? 1.0 : 0.0;
    auto unit = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    a.f[4] = unit(p.qos.sinr_min_db / 30.0);
    a.f[5] = unit(p.qos.latency_max_s / 0.01);
    a.f[6] = p.service == ServiceClass::urllc
                 ? unit(-std::log10(p.qos.p_latency_max) / 8.0)
                 : 0.0;
    a.f[7] = p.service == ServiceClass::normal ? unit(p.qos.rate_min_normal / 10.0) : 0.0;
    a.f[8] = unit(p.arrival_rate / 0.1);
    return a;
  }
};

// Squared Euclidean distance over the normalized features (the Bregman
// divergence generated by the squared norm); symmetric, zero iff equal.
inline double bregman_distance(const AgentProfile& a, const AgentProfile& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.f.size(); ++i) {
    double diff = a.f[i] - b.f[i];
    d += diff * diff;
  }
  return d;
}

// The neighbor with minimum distance inside the ball of radius psi_rad, ties
// broken by lowest link id; empty optional when the ball is empty.
inline std::optional<int> select_expert(
    const AgentProfile& learner,
    const std::vector<std::pair<int, AgentProfile>>& neighbors, double psi_rad) {
  std::optional<int> best;
  double best_dist = 0.0;
  for (const auto& [link_id, prof] : neighbors) {
    double d = bregman_distance(learner, prof);
    if (d > psi_rad) continue;
    if (!best || d < best_dist || (d == best_dist && link_id < *best)) {
      best = link_id;
      best_dist = d;
    }
  }
  return best;
}

using QFn = std::function<std::vector<double>(const AgentState&)>;

// Q-value blending of Eq.-style transfer: outputs (not parameters) are mixed,
// which is exact for arbitrary function approximators.
inline QFn blend_models(const Mlp& transfer, const Mlp& current, double mu) {
  if (!transfer.same_architecture(current))
    throw std::invalid_argument("blend_models: architecture mismatch");
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("blend_models: mu outside [0,1]");
  return [&transfer, &current, mu](const AgentState& s) {
    std::vector<double> qt = transfer.forward(s);
    std::vector<double> qc = current.forward(s);
    for (std::size_t i = 0; i < qt.size(); ++i) qt[i] = mu * qt[i] + (1.0 - mu) * qc[i];
    return qt;
  };
}

inline double decay_transfer_rate(double mu, double kappa) { return kappa * mu; }

struct TransferConfig {
  double psi_rad = 0.5;
  double mu0 = 0.8;
  double kappa = 0.95;

  void validate() const {
    if (psi_rad <= 0.0) throw std::invalid_argument("TransferConfig: psi_rad must be > 0");
    if (mu0 < 0.0 || mu0 > 1.0) throw std::invalid_argument("TransferConfig: mu0 outside [0,1]");
    if (kappa <= 0.0 || kappa >= 1.0)
      throw std::invalid_argument("TransferConfig: kappa outside (0,1)");
  }
};

struct GroupAssignment {
  std::vector<std::vector<int>> groups;  // member link ids, sorted
  std::vector<int> member_group;         // link id -> group index

  static GroupAssignment singletons(int num_links) {
    GroupAssignment g;
    g.groups.resize(num_links);
    g.member_group.resize(num_links);
    for (int i = 0; i < num_links; ++i) {
      g.groups[i] = {i};
      g.member_group[i] = i;
    }
    return g;
  }
};

inline Vec2 link_position(const Topology& topo, int link_id) {
  const int K = static_cast<int>(topo.cdevices.size());
  return link_id < K ? topo.cdevices[link_id] : topo.d2d_tx[link_id - K];
}

// Greedy geographic clustering: seed each group with the unassigned link
// nearest the BS, fill with its group_size-1 nearest unassigned neighbors.
// Always an exact partition.
inline GroupAssignment partition_groups(const Topology& topo, int group_size) {
  if (group_size < 1) throw std::invalid_argument("partition_groups: group_size must be >= 1");
  const int z = static_cast<int>(topo.cdevices.size() + topo.d2d_tx.size());
  std::vector<bool> assigned(z, false);
  GroupAssignment out;
  out.member_group.assign(z, -1);
  int remaining = z;
  while (remaining > 0) {
    int seed = -1;
    double seed_dist = 0.0;
    for (int i = 0; i < z; ++i) {
      if (assigned[i]) continue;
      double d = distance(link_position(topo, i), topo.bs);
      if (seed < 0 || d < seed_dist) {
        seed = i;
        seed_dist = d;
      }
    }
    std::vector<int> members{seed};
    assigned[seed] = true;
    --remaining;
    while (static_cast<int>(members.size()) < group_size && remaining > 0) {
      int best = -1;
      double best_dist = 0.0;
      for (int i = 0; i < z; ++i) {
        if (assigned[i]) continue;
        double d = distance(link_position(topo, i), link_position(topo, seed));
        if (best < 0 || d < best_dist) {
          best = i;
          best_dist = d;
        }
      }
      members.push_back(best);
      assigned[best] = true;
      --remaining;
    }
    std::sort(members.begin(), members.end());
    int gi = static_cast<int>(out.groups.size());
    for (int m : members) out.member_group[m] = gi;
    out.groups.push_back(std::move(members));
  }
  return out;
}

// Sum of member utilities (the group Q of the joint action).
inline double group_q(const std::vector<double>& member_q_values) {
  double total = 0.0;
  for (double q : member_q_values) total += q;
  return total;
}

enum class JointMode { sequential_greedy, exhaustive };

struct JointContext {
  int num_subchannels = 0;
  int num_power_levels = 0;
  std::vector<std::uint8_t> is_cellular;  // per member, in member order
  std::vector<AgentState> states;         // base state per member
  std::vector<QFn> evaluators;            // per member
  // Per-member work-conserving flag: a set entry drops the idle action
  // whenever at least one transmit action is admissible. Empty means none.
  std::vector<std::uint8_t> must_transmit;
};

namespace detail {

inline AgentState with_announcements(const AgentState& base, std::uint64_t busy_mask,
                                     int num_subchannels) {
  AgentState s = base;
  for (int n = 0; n < num_subchannels; ++n)
    if (busy_mask & (1ULL << n)) s[n] = 1.0;
  return s;
}

// Actions allowed for a member given the subchannels already announced by
// earlier cellular members (C-C collision avoidance within a group).
inline bool action_allowed(int action, bool cellular, std::uint64_t c_mask, int P) {
  if (action == 0 || !cellular) return true;
  int n = (action - 1) / P;
  return (c_mask & (1ULL << n)) == 0;
}

inline std::uint64_t busy_bits(const AgentState& s, int num_subchannels) {
  std::uint64_t b = 0;
  for (int n = 0; n < num_subchannels; ++n)
    if (s[n] > 0.5) b |= 1ULL << n;
  return b;
}

// Listen-before-talk mask on top of the hard within-group rule: a cellular
// member also avoids subchannels flagged busy in its (announcement-augmented)
// observation. Void when no subchannel is left, matching argmax_sensing.
inline bool sense_void(std::uint64_t sense, int num_subchannels) {
  for (int n = 0; n < num_subchannels; ++n)
    if ((sense & (1ULL << n)) == 0) return false;
  return true;
}

inline bool action_admissible(int action, bool cellular, std::uint64_t c_mask,
                              std::uint64_t sense, bool sense_is_void, int P) {
  if (!action_allowed(action, cellular, c_mask, P)) return false;
  if (action == 0 || !cellular || sense_is_void) return true;
  int n = (action - 1) / P;
  return (sense & (1ULL << n)) == 0;
}

struct JointSearch {
  const JointContext* ctx;
  int members;
  // Memoized member Q vectors keyed by the announcement masks seen so far.
  std::vector<std::map<std::uint64_t, std::vector<double>>> memo;

  const std::vector<double>& member_q(int i, std::uint64_t busy_mask) {
    auto it = memo[i].find(busy_mask);
    if (it != memo[i].end()) return it->second;
    AgentState s = with_announcements(ctx->states[i], busy_mask, ctx->num_subchannels);
    return memo[i].emplace(busy_mask, ctx->evaluators[i](s)).first->second;
  }

  bool member_must_transmit(int i) const {
    return !ctx->must_transmit.empty() && ctx->must_transmit[i] != 0;
  }

  double best_tail(int i, std::uint64_t busy_mask, std::uint64_t c_mask,
                   std::vector<int>& choice) {
    const int P = ctx->num_power_levels;
    const auto& q = member_q(i, busy_mask);
    const std::uint64_t sense = busy_bits(ctx->states[i], ctx->num_subchannels) | busy_mask;
    const bool voided = sense_void(sense, ctx->num_subchannels);
    bool any_tx = false;
    for (int a = 1; a < static_cast<int>(q.size()) && !any_tx; ++a)
      if (action_admissible(a, ctx->is_cellular[i], c_mask, sense, voided, P)) any_tx = true;
    const bool skip_idle = member_must_transmit(i) && any_tx;
    double best = 0.0;
    int best_a = -1;
    std::vector<int> best_rest, rest;
    for (int a = 0; a < static_cast<int>(q.size()); ++a) {
      if (a == 0 && skip_idle) continue;
      if (!action_admissible(a, ctx->is_cellular[i], c_mask, sense, voided, P)) continue;
      std::uint64_t nb = busy_mask, nc = c_mask;
      if (a != 0) {
        int n = (a - 1) / P;
        nb |= 1ULL << n;
        if (ctx->is_cellular[i]) nc |= 1ULL << n;
      }
      double value = q[a];
      rest.clear();
      if (i + 1 < members) value += best_tail(i + 1, nb, nc, rest);
      if (best_a < 0 || value > best) {
        best = value;
        best_a = a;
        best_rest = rest;
      }
    }
    choice.clear();
    choice.push_back(best_a);
    choice.insert(choice.end(), best_rest.begin(), best_rest.end());
    return best;
  }
};

}  // namespace detail

// Joint action selection for one group, members in link-id order. Earlier
// members' picks are marked busy in later members' observations; later
// cellular members never reuse a subchannel announced by an earlier cellular
// member, and cellular members listen before talking: subchannels flagged
// busy in their own observation are excluded too unless none is left. Members
// flagged must_transmit skip the idle action while a transmit action remains
// admissible (work conservation for backlogged deadline traffic).
// Exhaustive mode enumerates the same feasible set and returns the true
// argmax of the summed member utilities (groups of at most 3).
inline std::vector<AgentAction> joint_action(const JointContext& ctx, JointMode mode) {
  const int members = static_cast<int>(ctx.states.size());
  if (ctx.num_subchannels > 63)
    throw std::invalid_argument("joint_action: more than 63 subchannels unsupported");
  std::vector<AgentAction> actions(members);
  if (members == 0) return actions;
  const int P = ctx.num_power_levels;

  if (mode == JointMode::exhaustive) {
    if (members > 3)
      throw std::invalid_argument("joint_action: exhaustive mode limited to groups of 3");
    detail::JointSearch search{&ctx, members, {}};
    search.memo.resize(members);
    std::vector<int> choice;
    search.best_tail(0, 0, 0, choice);
    for (int i = 0; i < members; ++i) actions[i] = {choice[i]};
    return actions;
  }

  std::uint64_t busy_mask = 0, c_mask = 0;
  for (int i = 0; i < members; ++i) {
    AgentState s = detail::with_announcements(ctx.states[i], busy_mask, ctx.num_subchannels);
    std::vector<double> q = ctx.evaluators[i](s);
    const std::uint64_t sense = detail::busy_bits(s, ctx.num_subchannels);
    const bool voided = detail::sense_void(sense, ctx.num_subchannels);
    const bool must = !ctx.must_transmit.empty() && ctx.must_transmit[i] != 0;
    int best = -1;
    for (int a = 0; a < static_cast<int>(q.size()); ++a) {
      if (a == 0 && must) continue;
      if (!detail::action_admissible(a, ctx.is_cellular[i], c_mask, sense, voided, P))
        continue;
      if (best < 0 || q[a] > q[best]) best = a;
    }
    if (best < 0) best = 0;  // no admissible transmit action left
    actions[i] = {best};
    if (best != 0) {
      int n = (best - 1) / P;
      busy_mask |= 1ULL << n;
      if (ctx.is_cellular[i]) c_mask |= 1ULL << n;
    }
  }
  return actions;
}

// Scores a concrete joint action under the same order-dependent objective the
// selection modes optimize (each member's Q evaluated with earlier members'
// announcements applied).
inline double joint_action_value(const JointContext& ctx,
                                 const std::vector<AgentAction>& actions) {
  const int P = ctx.num_power_levels;
  std::uint64_t busy_mask = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    AgentState s = detail::with_announcements(ctx.states[i], busy_mask, ctx.num_subchannels);
    std::vector<double> q = ctx.evaluators[i](s);
    total += q[actions[i].index];
    if (!actions[i].is_idle())
      busy_mask |= 1ULL << actions[i].subchannel(P);
  }
  return total;
}

}  // namespace massim
