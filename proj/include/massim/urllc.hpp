#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>

#include "massim/config.hpp"
#include "massim/lambert.hpp"
#include "massim/rng.hpp"

namespace massim {

struct UrllcBound {
  double f_i = 0.0;            // F_i = a / (1 - e^a), a = mean arrivals per deadline
  double w_argument = 0.0;     // p_max * F_i * e^{F_i}
  double rate_min_urllc = 0.0; // bps/Hz

  void validate() const {
    const double inv_e = std::exp(-1.0);
    if (!(w_argument >= -inv_e) || !(w_argument < 0.0))
      throw std::domain_error("UrllcBound: Lambert argument outside [-1/e, 0)");
    if (!(rate_min_urllc > 0.0))
      throw std::domain_error("UrllcBound: rate bound must be positive");
  }
};

// Latency-to-rate transform: converts the probabilistic deadline
// (T_max, p_latency_max) of a Poisson/exponential traffic stream into a
// minimum sustained spectral rate via the lower Lambert branch.
inline UrllcBound min_rate_urllc(const LinkProfile& profile, const ScenarioConfig& cfg) {
  if (profile.service != ServiceClass::urllc)
    throw std::invalid_argument("min_rate_urllc: profile is not a URLLC link");
  if (!(profile.arrival_rate > 0.0))
    throw std::invalid_argument("min_rate_urllc: arrival rate must be positive");
  const double t_max = profile.qos.latency_max_s;
  if (!(t_max > 0.0)) throw std::invalid_argument("min_rate_urllc: T_max must be positive");

  // arrival_rate is per slot; the deadline window spans T_max / slot_duration slots.
  const double a = profile.arrival_rate * (t_max / cfg.slot_duration_s);
  UrllcBound b;
  b.f_i = a / (1.0 - std::exp(a));
  b.w_argument = profile.qos.p_latency_max * b.f_i * std::exp(b.f_i);
  const double w = lambert_w_minus1(b.w_argument);  // throws on domain violation
  const double wt = cfg.subchannel_bandwidth_hz * t_max;
  b.rate_min_urllc = profile.mean_packet_bits / wt * (b.f_i - w);
  b.validate();
  return b;
}

// Total latency decomposition: transmission + queueing + processing.
// Reported as infinity for rate = 0.
inline double total_latency(double bits, double rate_bps_hz, double queue_wait_s,
                            const ScenarioConfig& cfg) {
  if (rate_bps_hz <= 0.0) return std::numeric_limits<double>::infinity();
  return bits / (cfg.subchannel_bandwidth_hz * rate_bps_hz) + queue_wait_s +
         cfg.qos.t_pc_s;
}

// Per-slot reliability event: the outage event is SINR < SINR_min, so the
// boundary value passes.
inline bool reliability_ok(double sinr_linear, const QosThresholds& qos) {
  if (sinr_linear < 0.0) throw std::invalid_argument("reliability_ok: negative SINR");
  return sinr_linear >= db_to_linear(qos.sinr_min_db);
}

// Queue-simulation oracle for the latency-to-rate transform. Simulates a FIFO
// queue: Poisson(arrival_rate) packets arrive at each slot boundary with
// exponential sizes (mean mean_packet_bits), service drains
// W * rate * slot_duration bits per slot (completion interpolated within the
// slot), and t_pc is added per packet. Returns the fraction of packets whose
// total latency exceeds T_max.
inline double queue_latency_oracle(const LinkProfile& profile, double rate_bps_hz,
                                   const ScenarioConfig& cfg, std::int64_t num_slots,
                                   std::uint64_t seed = 12345) {
  if (profile.arrival_rate <= 0.0) return 0.0;
  const double bits_per_slot =
      cfg.subchannel_bandwidth_hz * rate_bps_hz * cfg.slot_duration_s;
  if (bits_per_slot <= 0.0) return 1.0;

  Rng rng(Rng::derive(seed, 0x09ACEULL));
  struct Packet {
    double arrival_slot;
    double bits;
  };
  std::deque<Packet> queue;
  std::int64_t total_packets = 0;
  std::int64_t violations = 0;

  for (std::int64_t slot = 0; slot < num_slots; ++slot) {
    int arrivals = rng.poisson(profile.arrival_rate);
    for (int i = 0; i < arrivals; ++i) {
      queue.push_back({static_cast<double>(slot), rng.exponential(profile.mean_packet_bits)});
      ++total_packets;
    }
    double budget = bits_per_slot;
    while (!queue.empty() && budget > 0.0) {
      Packet& head = queue.front();
      if (head.bits <= budget) {
        budget -= head.bits;
        double completion_slot =
            static_cast<double>(slot) + (bits_per_slot - budget) / bits_per_slot;
        double latency =
            (completion_slot - head.arrival_slot) * cfg.slot_duration_s + profile.qos.t_pc_s;
        if (latency > profile.qos.latency_max_s) ++violations;
        queue.pop_front();
      } else {
        head.bits -= budget;
        budget = 0.0;
      }
    }
  }
  // Backlog left at the horizon: a packet that cannot finish before its
  // deadline any more is a certain violation; one still inside its deadline
  // has an undecided fate and leaves the sample.
  for (const Packet& p : queue) {
    double min_latency =
        (static_cast<double>(num_slots) - p.arrival_slot) * cfg.slot_duration_s +
        profile.qos.t_pc_s;
    if (min_latency > profile.qos.latency_max_s) ++violations;
    else --total_packets;
  }
  if (total_packets <= 0) return 0.0;
  return static_cast<double>(violations) / static_cast<double>(total_packets);
}

}  // namespace massim
