#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "massim/env.hpp"

namespace massim {

// Per-slot accounting shared by every evaluation path.
struct SlotStats {
  std::uint64_t slot = 0;
  double network_ee = 0.0;
  double mean_reward = 0.0;
  int counted = 0, success = 0;
  int counted_urllc = 0, success_urllc = 0;
  int counted_nor = 0, success_nor = 0;
  int transfer_active = 0;
  int coop_groups = 0;
};

inline SlotStats summarize_slot(std::uint64_t slot, const Environment::StepResult& res,
                                const std::vector<LinkProfile>& profiles) {
  SlotStats s;
  s.slot = slot;
  s.network_ee = res.network_ee;
  double reward_sum = 0.0;
  const int z = static_cast<int>(profiles.size());
  for (int i = 0; i < z; ++i) {
    reward_sum += res.rewards[i];
    if (!res.qos_counted[i]) continue;
    bool ok = res.chi_urllc[i] == 0 && res.chi_nor[i] == 0;
    ++s.counted;
    s.success += ok;
    if (profiles[i].service == ServiceClass::urllc) {
      ++s.counted_urllc;
      s.success_urllc += ok;
    } else {
      ++s.counted_nor;
      s.success_nor += ok;
    }
  }
  s.mean_reward = z > 0 ? reward_sum / z : 0.0;
  return s;
}

// Success probability over a span of slot records: the fraction of counted
// link-slot transmissions whose indicators are both zero.
enum class ClassFilter { all, urllc, normal };

inline double success_probability(const std::vector<SlotStats>& slots, ClassFilter filter) {
  if (slots.empty()) throw std::invalid_argument("success_probability: empty input");
  long counted = 0, success = 0;
  for (const SlotStats& s : slots) {
    switch (filter) {
      case ClassFilter::all: counted += s.counted; success += s.success; break;
      case ClassFilter::urllc: counted += s.counted_urllc; success += s.success_urllc; break;
      case ClassFilter::normal: counted += s.counted_nor; success += s.success_nor; break;
    }
  }
  if (counted == 0) return 1.0;
  return static_cast<double>(success) / static_cast<double>(counted);
}

inline double mean_network_ee(const std::vector<SlotStats>& slots) {
  if (slots.empty()) return 0.0;
  double total = 0.0;
  for (const SlotStats& s : slots) total += s.network_ee;
  return total / static_cast<double>(slots.size());
}

inline double mean_reward(const std::vector<SlotStats>& slots) {
  if (slots.empty()) return 0.0;
  double total = 0.0;
  for (const SlotStats& s : slots) total += s.mean_reward;
  return total / static_cast<double>(slots.size());
}

}  // namespace massim
