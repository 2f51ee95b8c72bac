#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "massim/config.hpp"
#include "massim/phy.hpp"
#include "massim/urllc.hpp"

namespace massim {

// Discrete per-agent choice: index 0 is the explicit idle action; index
// 1 + n*P + p transmits on subchannel n at power level p (P levels).
struct AgentAction {
  int index = 0;

  bool is_idle() const { return index == 0; }
  int subchannel(int num_power_levels) const { return (index - 1) / num_power_levels; }
  int power_level(int num_power_levels) const { return (index - 1) % num_power_levels; }

  static AgentAction idle() { return {0}; }
  static AgentAction transmit(int subchannel, int power_level, int num_power_levels) {
    return {1 + subchannel * num_power_levels + power_level};
  }
};

// Observation vector, dimension 2N + 2, all components in [0, 1]:
// [busy flags (N), channel quality (N), traffic load, QoS satisfaction].
using AgentState = std::vector<double>;

// What a link locally observed about the previous slot.
struct LinkObservation {
  std::vector<std::uint8_t> channel_busy;  // N, other links' occupancy
  std::vector<double> channel_quality_db;  // N, measured SINR in dB
  double queued_bits = 0.0;
  double qos_window = 1.0;  // moving success fraction, initialized to 1
};

inline constexpr double kQualityFloorDb = -20.0;
inline constexpr double kQualityCeilDb = 40.0;

inline double quality_to_unit(double sinr_db) {
  double v = (sinr_db - kQualityFloorDb) / (kQualityCeilDb - kQualityFloorDb);
  return std::min(1.0, std::max(0.0, v));
}

inline int state_dimension(const ScenarioConfig& cfg) {
  return 2 * cfg.num_subchannels + 2;
}

// Deterministic encoding of the previous-slot observation. Traffic load is
// normalized by 10 mean packet sizes and clipped.
inline AgentState encode_state(const LinkObservation& obs, const LinkProfile& profile,
                               const ScenarioConfig& cfg) {
  const int n = cfg.num_subchannels;
  AgentState s(2 * n + 2, 0.0);
  for (int i = 0; i < n; ++i) s[i] = obs.channel_busy[i] ? 1.0 : 0.0;
  for (int i = 0; i < n; ++i) s[n + i] = quality_to_unit(obs.channel_quality_db[i]);
  s[2 * n] = std::min(1.0, obs.queued_bits / (10.0 * profile.mean_packet_bits));
  s[2 * n + 1] = std::min(1.0, std::max(0.0, obs.qos_window));
  return s;
}

struct QosIndicators {
  int chi_urllc = 0;
  int chi_nor = 0;
};

// URLLC links fail when the achieved rate misses the Lambert-W bound or any
// used subchannel falls below the SINR threshold; normal links fail on the
// minimum-rate floor. The non-applicable indicator is always zero.
// used_subchannel < 0 means no subchannel in use this slot.
inline QosIndicators qos_indicators(const LinkProfile& profile, double achieved_rate,
                                    double min_used_sinr_linear, bool has_used_subchannel,
                                    double rate_min_urllc) {
  QosIndicators ind;
  if (profile.service == ServiceClass::urllc) {
    bool rate_fail = achieved_rate < rate_min_urllc;
    bool sinr_fail =
        has_used_subchannel && !reliability_ok(min_used_sinr_linear, profile.qos);
    ind.chi_urllc = (rate_fail || sinr_fail) ? 1 : 0;
  } else {
    ind.chi_nor = achieved_rate < profile.qos.rate_min_normal ? 1 : 0;
  }
  return ind;
}

// QoS-aware reward: EE utility minus weighted failure penalties.
inline double reward(double ee_value, const QosIndicators& ind, const RewardConfig& rc) {
  return ee_value / rc.ee_scale - rc.c1 * ind.chi_urllc - rc.c2 * ind.chi_nor;
}

// Per-link EE: own rate over own consumed power (transmit + circuit), in W.
// In network mode every agent shares the Eq.-(10)-style network value instead.
inline double per_link_ee(int link_id, const LinkRates& rates, const AssignmentMatrix& a,
                          const ScenarioConfig& cfg) {
  if (cfg.reward.ee_mode == RewardConfig::EeMode::network)
    return network_ee(a, rates, cfg);
  double power_w = mw_to_watt(cfg.circuit_power_mw);
  if (link_id < a.K) {
    for (int n = 0; n < a.N; ++n)
      if (a.rc(link_id, n)) power_w += mw_to_watt(a.pc(link_id, n));
  } else {
    int m = link_id - a.K;
    for (int n = 0; n < a.N; ++n)
      if (a.rd(m, n)) power_w += mw_to_watt(a.pd(m, n));
  }
  return rates.rate(link_id) / power_w;
}

}  // namespace massim
