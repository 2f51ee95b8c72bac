#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "massim/config.hpp"
#include "massim/scenario.hpp"

namespace massim {

// Binary subchannel indicators and per-(link, subchannel) transmit powers for
// one slot. Powers are held in mW (matching the external unit convention);
// conversion to W happens inside the evaluation routines.
struct AssignmentMatrix {
  int K = 0, M = 0, N = 0;
  std::vector<std::uint8_t> rho_c;  // K*N
  std::vector<std::uint8_t> rho_d;  // M*N
  std::vector<double> power_c_mw;   // K*N
  std::vector<double> power_d_mw;   // M*N

  AssignmentMatrix() = default;
  AssignmentMatrix(int K_, int M_, int N_)
      : K(K_), M(M_), N(N_),
        rho_c(static_cast<std::size_t>(K_) * N_, 0),
        rho_d(static_cast<std::size_t>(M_) * N_, 0),
        power_c_mw(static_cast<std::size_t>(K_) * N_, 0.0),
        power_d_mw(static_cast<std::size_t>(M_) * N_, 0.0) {}

  std::uint8_t& rc(int k, int n) { return rho_c[k * N + n]; }
  std::uint8_t rc(int k, int n) const { return rho_c[k * N + n]; }
  std::uint8_t& rd(int m, int n) { return rho_d[m * N + n]; }
  std::uint8_t rd(int m, int n) const { return rho_d[m * N + n]; }
  double& pc(int k, int n) { return power_c_mw[k * N + n]; }
  double pc(int k, int n) const { return power_c_mw[k * N + n]; }
  double& pd(int m, int n) { return power_d_mw[m * N + n]; }
  double pd(int m, int n) const { return power_d_mw[m * N + n]; }

  void set_cellular(int k, int n, double p_mw) {
    rc(k, n) = 1;
    pc(k, n) = p_mw;
  }
  void set_d2d(int m, int n, double p_mw) {
    rd(m, n) = 1;
    pd(m, n) = p_mw;
  }
  void clear_cellular(int k) {
    for (int n = 0; n < N; ++n) { rc(k, n) = 0; pc(k, n) = 0.0; }
  }
  void clear_d2d(int m) {
    for (int n = 0; n < N; ++n) { rd(m, n) = 0; pd(m, n) = 0.0; }
  }
};

struct LinkRates {
  std::vector<double> rate_c;  // K, bps/Hz
  std::vector<double> rate_d;  // M, bps/Hz
  // Z x N row-major, links ordered cellular 0..K-1 then D2D K..K+M-1.
  // Zero where the link does not occupy the subchannel.
  std::vector<double> sinr_per_subchannel;
  int N = 0;

  double rate(int link_id) const {
    return link_id < static_cast<int>(rate_c.size())
               ? rate_c[link_id]
               : rate_d[link_id - rate_c.size()];
  }
  double sinr(int link_id, int n) const { return sinr_per_subchannel[link_id * N + n]; }
};

struct ConstraintReport {
  bool binary_ok = true;         // (10b) indicators in {0,1}
  bool single_cdevice_ok = true; // (10c) at most one C-device per subchannel
  bool power_c_ok = true;        // (10d) per-C-device power budget
  bool power_d_ok = true;        // (10e) per-D2D power budget
  bool power_rho_consistent = true;  // power zero wherever rho is zero
  bool all_ok() const {
    return binary_ok && single_cdevice_ok && power_c_ok && power_d_ok &&
           power_rho_consistent;
  }
};

inline void check_index(int i, int bound, const char* what) {
  if (i < 0 || i >= bound) throw std::out_of_range(std::string("index out of range: ") + what);
}

// SINR at the BS for C-device k on subchannel n.
inline double sinr_cellular(int k, int n, const AssignmentMatrix& a,
                            const ChannelState& ch, const ScenarioConfig& cfg) {
  check_index(k, a.K, "k");
  check_index(n, a.N, "n");
  double interference = 0.0;
  for (int m = 0; m < a.M; ++m)
    if (a.rd(m, n)) interference += mw_to_watt(a.pd(m, n)) * ch.g_mB[m];
  return mw_to_watt(a.pc(k, n)) * ch.h_k_at(k, n) / (interference + cfg.noise_w());
}

// SINR at the receiver of D2D pair m on subchannel n. The co-channel C-device
// term is zero when no C-device occupies the subchannel.
inline double sinr_d2d(int m, int n, const AssignmentMatrix& a,
                       const ChannelState& ch, const ScenarioConfig& cfg) {
  check_index(m, a.M, "m");
  check_index(n, a.N, "n");
  double interference = 0.0;
  for (int k = 0; k < a.K; ++k)
    if (a.rc(k, n)) interference += mw_to_watt(a.pc(k, n)) * ch.g_km_at(k, m, a.M);
  for (int mp = 0; mp < a.M; ++mp)
    if (mp != m && a.rd(mp, n))
      interference += mw_to_watt(a.pd(mp, n)) * ch.g_mm_at(mp, m, a.M);
  return mw_to_watt(a.pd(m, n)) * ch.h_m_at(m, n) / (interference + cfg.noise_w());
}

inline LinkRates link_rates(const AssignmentMatrix& a, const ChannelState& ch,
                            const ScenarioConfig& cfg) {
  LinkRates r;
  r.N = a.N;
  r.rate_c.assign(a.K, 0.0);
  r.rate_d.assign(a.M, 0.0);
  r.sinr_per_subchannel.assign(static_cast<std::size_t>(a.K + a.M) * a.N, 0.0);
  for (int k = 0; k < a.K; ++k) {
    for (int n = 0; n < a.N; ++n) {
      if (!a.rc(k, n)) continue;
      double s = sinr_cellular(k, n, a, ch, cfg);
      r.sinr_per_subchannel[k * a.N + n] = s;
      r.rate_c[k] += std::log2(1.0 + s);
    }
  }
  for (int m = 0; m < a.M; ++m) {
    for (int n = 0; n < a.N; ++n) {
      if (!a.rd(m, n)) continue;
      double s = sinr_d2d(m, n, a, ch, cfg);
      r.sinr_per_subchannel[(a.K + m) * a.N + n] = s;
      r.rate_d[m] += std::log2(1.0 + s);
    }
  }
  return r;
}

// Network EE per the sum-rate / total-power objective. Rates are spectral
// (bps/Hz); the denominator is in W, so the result is bps/Hz per W.
inline double network_ee(const AssignmentMatrix& a, const LinkRates& rates,
                         const ScenarioConfig& cfg) {
  double sum_rate = 0.0;
  for (double r : rates.rate_c) sum_rate += r;
  for (double r : rates.rate_d) sum_rate += r;
  double power_w = 0.0;
  for (int n = 0; n < a.N; ++n) {
    for (int k = 0; k < a.K; ++k)
      if (a.rc(k, n)) power_w += mw_to_watt(a.pc(k, n));
    for (int m = 0; m < a.M; ++m)
      if (a.rd(m, n)) power_w += mw_to_watt(a.pd(m, n));
  }
  power_w += (a.K + a.M) * mw_to_watt(cfg.circuit_power_mw);
  return sum_rate / power_w;
}

// Flags violations; never repairs the assignment.
inline ConstraintReport check_constraints(const AssignmentMatrix& a,
                                          const ScenarioConfig& cfg) {
  ConstraintReport rep;
  for (auto v : a.rho_c)
    if (v > 1) rep.binary_ok = false;
  for (auto v : a.rho_d)
    if (v > 1) rep.binary_ok = false;
  for (int n = 0; n < a.N; ++n) {
    int occupants = 0;
    for (int k = 0; k < a.K; ++k) occupants += a.rc(k, n);
    if (occupants > 1) rep.single_cdevice_ok = false;
  }
  for (int k = 0; k < a.K; ++k) {
    double total = 0.0;
    for (int n = 0; n < a.N; ++n) {
      if (a.rc(k, n)) total += a.pc(k, n);
      else if (a.pc(k, n) != 0.0) rep.power_rho_consistent = false;
    }
    if (total > cfg.max_power_c_mw) rep.power_c_ok = false;
  }
  for (int m = 0; m < a.M; ++m) {
    double total = 0.0;
    for (int n = 0; n < a.N; ++n) {
      if (a.rd(m, n)) total += a.pd(m, n);
      else if (a.pd(m, n) != 0.0) rep.power_rho_consistent = false;
    }
    if (total > cfg.max_power_d_mw) rep.power_d_ok = false;
  }
  return rep;
}

}  // namespace massim
