#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "massim/config.hpp"
#include "massim/mdp.hpp"
#include "massim/phy.hpp"
#include "massim/scenario.hpp"
#include "massim/urllc.hpp"

namespace massim {

// Discrete-time network environment. Each slot is a single serialized
// transaction: sample the block-fading channel, admit Poisson traffic, apply
// all agents' actions, resolve C-device collisions, evaluate rates and QoS
// indicators, serve queues, and refresh every agent's local observation.
class Environment {
 public:
  static constexpr int kQosWindowSlots = 50;

  struct StepResult {
    AssignmentMatrix assignment;
    LinkRates rates;
    double network_ee = 0.0;
    std::vector<double> rewards;
    std::vector<double> link_rate;       // achieved rate per link (0 if silent)
    std::vector<double> ee_value;        // EE term used in the reward, unscaled
    std::vector<std::uint8_t> transmitted;
    std::vector<std::uint8_t> collided;
    std::vector<std::uint8_t> chi_urllc;
    std::vector<std::uint8_t> chi_nor;
    std::vector<std::uint8_t> qos_counted;  // link-slots entering success stats
  };

  Environment(ScenarioConfig cfg, std::vector<LinkProfile> profiles)
      : cfg_(std::move(cfg)), profiles_(std::move(profiles)),
        topology_(generate_topology(cfg_)),
        traffic_rng_(Rng::derive(cfg_.rng_seed, 0x7A4F1C)) {
    cfg_.validate();
    if (static_cast<int>(profiles_.size()) != cfg_.num_links())
      throw std::invalid_argument("Environment: profile count != K + M");
    rate_min_.assign(profiles_.size(), 0.0);
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      profiles_[i].validate();
      if (profiles_[i].service == ServiceClass::urllc && profiles_[i].arrival_rate > 0.0)
        rate_min_[i] = min_rate_urllc(profiles_[i], cfg_).rate_min_urllc;
    }
    reset_state();
  }

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<LinkProfile>& profiles() const { return profiles_; }
  const Topology& topology() const { return topology_; }
  int num_links() const { return cfg_.num_links(); }
  int num_actions() const { return cfg_.num_actions(); }
  std::uint64_t slot() const { return slot_; }
  double rate_min(int link) const { return rate_min_[link]; }
  double queued_bits(int link) const { return observations_[link].queued_bits; }
  double qos_window(int link) const { return observations_[link].qos_window; }

  // True for a deadline-traffic link whose observed queue is non-empty; such
  // links are work-conserving and never pick the idle action voluntarily.
  bool backlogged(int link) const {
    return profiles_[link].service == ServiceClass::urllc &&
           observations_[link].queued_bits > 0.0;
  }

  // True when the link would actually radiate given a transmit action.
  bool has_traffic(int link) const {
    return profiles_[link].service == ServiceClass::normal || !queues_[link].empty();
  }

  const LinkObservation& observation(int link) const { return observations_[link]; }

  AgentState state(int link) const {
    return encode_state(observations_[link], profiles_[link], cfg_);
  }

  std::vector<AgentState> states() const {
    std::vector<AgentState> out;
    out.reserve(profiles_.size());
    for (std::size_t i = 0; i < profiles_.size(); ++i)
      out.push_back(state(static_cast<int>(i)));
    return out;
  }

  // The channel realization the next step() call will use.
  ChannelState peek_channel() const { return sample_channel(topology_, cfg_, slot_); }

  void reset_state() {
    slot_ = 0;
    queues_.assign(profiles_.size(), {});
    qos_history_.assign(profiles_.size(), {});
    observations_.assign(profiles_.size(), LinkObservation{});
    for (auto& obs : observations_) {
      obs.channel_busy.assign(cfg_.num_subchannels, 0);
      obs.channel_quality_db.assign(cfg_.num_subchannels, kQualityFloorDb);
      obs.queued_bits = 0.0;
      obs.qos_window = 1.0;
    }
    traffic_rng_ = Rng(Rng::derive(cfg_.rng_seed, 0x7A4F1C));
  }

  StepResult step(const std::vector<AgentAction>& actions) {
    const int K = cfg_.num_cdevices, M = cfg_.num_d2d_pairs, N = cfg_.num_subchannels;
    const int Z = K + M;
    const int P = static_cast<int>(cfg_.power_levels_mw.size());
    if (static_cast<int>(actions.size()) != Z)
      throw std::invalid_argument("Environment::step: one action per link required");

    const ChannelState channel = sample_channel(topology_, cfg_, slot_);

    StepResult res;
    res.assignment = AssignmentMatrix(K, M, N);
    res.rewards.assign(Z, 0.0);
    res.link_rate.assign(Z, 0.0);
    res.ee_value.assign(Z, 0.0);
    res.transmitted.assign(Z, 0);
    res.collided.assign(Z, 0);
    res.chi_urllc.assign(Z, 0);
    res.chi_nor.assign(Z, 0);
    res.qos_counted.assign(Z, 0);

    // A transmit action only radiates when there is data to send.
    std::vector<int> chosen_subchannel(Z, -1);
    for (int i = 0; i < Z; ++i) {
      const AgentAction& a = actions[i];
      if (a.index < 0 || a.index >= cfg_.num_actions())
        throw std::out_of_range("Environment::step: action index out of range");
      if (a.is_idle() || !has_traffic(i)) continue;
      res.transmitted[i] = 1;
      chosen_subchannel[i] = a.subchannel(P);
    }

    // Constraint (10c) collision semantics: C-devices picking the same
    // subchannel all fail for the slot and are removed from the assignment.
    std::vector<int> c_count(N, 0);
    for (int k = 0; k < K; ++k)
      if (chosen_subchannel[k] >= 0) ++c_count[chosen_subchannel[k]];
    for (int i = 0; i < Z; ++i) {
      if (chosen_subchannel[i] < 0) continue;
      const int n = chosen_subchannel[i];
      const double p_mw = cfg_.power_levels_mw[actions[i].power_level(P)];
      if (i < K) {
        if (c_count[n] > 1) {
          res.collided[i] = 1;
          continue;
        }
        res.assignment.set_cellular(i, n, p_mw);
      } else {
        res.assignment.set_d2d(i - K, n, p_mw);
      }
    }

    res.rates = link_rates(res.assignment, channel, cfg_);
    res.network_ee = network_ee(res.assignment, res.rates, cfg_);

    // Rewards, indicators, and queue service.
    for (int i = 0; i < Z; ++i) {
      const LinkProfile& prof = profiles_[i];
      const bool active = res.transmitted[i] && !res.collided[i];
      const double rate = active ? res.rates.rate(i) : 0.0;
      res.link_rate[i] = rate;
      const int n = chosen_subchannel[i];
      const double sinr = active ? res.rates.sinr(i, n) : 0.0;

      QosIndicators ind;
      bool counted = false;
      if (prof.service == ServiceClass::urllc) {
        // Idling while holding data is a service failure; it enters the
        // success statistics so schemes cannot trade reliability for silence.
        const bool has_data = !queues_[i].empty();
        counted = res.transmitted[i] != 0 || has_data;
        if (counted) ind = qos_indicators(prof, rate, sinr, active, rate_min_[i]);
      } else {
        counted = res.transmitted[i] != 0;
        ind = qos_indicators(prof, rate, sinr, active, 0.0);
      }
      res.chi_urllc[i] = static_cast<std::uint8_t>(ind.chi_urllc);
      res.chi_nor[i] = static_cast<std::uint8_t>(ind.chi_nor);
      res.qos_counted[i] = counted ? 1 : 0;

      res.ee_value[i] = per_link_ee(i, res.rates, res.assignment, cfg_);
      res.rewards[i] = reward(res.ee_value[i], ind, cfg_.reward);

      // URLLC queue service / failure-drop semantics.
      if (prof.service == ServiceClass::urllc && !queues_[i].empty()) {
        if (active && ind.chi_urllc == 0) {
          double budget = cfg_.subchannel_bandwidth_hz * rate * cfg_.slot_duration_s;
          while (!queues_[i].empty() && budget > 0.0) {
            if (queues_[i].front() <= budget) {
              budget -= queues_[i].front();
              queues_[i].pop_front();
            } else {
              queues_[i].front() -= budget;
              budget = 0.0;
            }
          }
        } else if (res.transmitted[i]) {
          // Unsuccessful URLLC service: the packet transmission is stopped
          // and the packet dropped.
          queues_[i].pop_front();
        }
      }

      if (counted) {
        bool ok = ind.chi_urllc == 0 && ind.chi_nor == 0;
        auto& hist = qos_history_[i];
        hist.push_back(ok ? 1 : 0);
        if (static_cast<int>(hist.size()) > kQosWindowSlots) hist.pop_front();
      }
    }

    // Late-arrival queueing: packets arriving during this slot become visible
    // (and servable) from the next slot on. Admitting them before the action
    // is applied would let an agent radiate a packet it could not have known
    // about when it chose the action, with its empty-queue policy deciding
    // the subchannel.
    for (int i = 0; i < Z; ++i) {
      if (profiles_[i].service != ServiceClass::urllc) continue;
      int arrivals = traffic_rng_.poisson(profiles_[i].arrival_rate);
      for (int a = 0; a < arrivals; ++a)
        queues_[i].push_back(traffic_rng_.exponential(profiles_[i].mean_packet_bits));
    }

    refresh_observations(channel, res.assignment, chosen_subchannel, res.transmitted);
    ++slot_;
    return res;
  }

 private:
  void refresh_observations(const ChannelState& channel, const AssignmentMatrix& a,
                            const std::vector<int>& chosen_subchannel,
                            const std::vector<std::uint8_t>& transmitted) {
    const int K = cfg_.num_cdevices, M = cfg_.num_d2d_pairs, N = cfg_.num_subchannels;
    const int Z = K + M;
    const double p_ref_w = mw_to_watt(cfg_.power_levels_mw.front());
    const double noise = cfg_.noise_w();

    // Per-subchannel aggregate interference powers seen at the BS and the
    // per-receiver D2D aggregates are assembled once.
    std::vector<double> bs_interf(N, 0.0);  // D2D tx -> BS
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        if (a.rd(m, n)) bs_interf[n] += mw_to_watt(a.pd(m, n)) * channel.g_mB[m];

    for (int i = 0; i < Z; ++i) {
      LinkObservation& obs = observations_[i];
      for (int n = 0; n < N; ++n) {
        // Carrier sensing: every radiating transmitter is audible, including
        // the members of a collided pair that the assignment drops. Otherwise
        // a contested subchannel reads free right after a collision and the
        // colliders retry it forever.
        bool busy = false;
        for (int j = 0; j < Z && !busy; ++j)
          if (j != i && transmitted[j] && chosen_subchannel[j] == n) busy = true;
        obs.channel_busy[n] = busy ? 1 : 0;

        double sinr;
        if (i < K) {
          sinr = p_ref_w * channel.h_k_at(i, n) / (bs_interf[n] + noise);
        } else {
          const int m = i - K;
          double interf = 0.0;
          for (int k = 0; k < K; ++k)
            if (a.rc(k, n)) interf += mw_to_watt(a.pc(k, n)) * channel.g_km_at(k, m, M);
          for (int mp = 0; mp < M; ++mp)
            if (mp != m && a.rd(mp, n))
              interf += mw_to_watt(a.pd(mp, n)) * channel.g_mm_at(mp, m, M);
          sinr = p_ref_w * channel.h_m_at(m, n) / (interf + noise);
        }
        obs.channel_quality_db[n] = linear_to_db(std::max(sinr, 1e-30));
      }
      double queued = 0.0;
      for (double b : queues_[i]) queued += b;
      obs.queued_bits = queued;
      const auto& hist = qos_history_[i];
      if (hist.empty()) {
        obs.qos_window = 1.0;
      } else {
        int ok = 0;
        for (auto v : hist) ok += v;
        obs.qos_window = static_cast<double>(ok) / static_cast<double>(hist.size());
      }
    }
  }

  ScenarioConfig cfg_;
  std::vector<LinkProfile> profiles_;
  Topology topology_;
  Rng traffic_rng_;
  std::uint64_t slot_ = 0;
  std::vector<double> rate_min_;
  std::vector<std::deque<double>> queues_;
  std::vector<std::deque<std::uint8_t>> qos_history_;
  std::vector<LinkObservation> observations_;
};

}  // namespace massim
