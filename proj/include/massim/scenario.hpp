#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "massim/config.hpp"
#include "massim/rng.hpp"

namespace massim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// BS at the origin; one position per C-device, one tx/rx pair per D2D link.
struct Topology {
  Vec2 bs;
  std::vector<Vec2> cdevices;
  std::vector<Vec2> d2d_tx;
  std::vector<Vec2> d2d_rx;
};

// Per-slot linear channel gains. Desired links fade per subchannel
// (frequency-selective); cross gains are kept flat per pair, since
// interference aggregates many paths anyway.
struct ChannelState {
  int N = 1;                 // subchannels resolved by the desired-link gains
  std::vector<double> h_k;   // K*N: C-device k -> BS on subchannel n
  std::vector<double> h_m;   // M*N: D2D tx m -> D2D rx m on subchannel n
  std::vector<double> g_km;  // K*M row-major: C-device k -> D2D rx m
  std::vector<double> g_mB;  // M: D2D tx m -> BS
  std::vector<double> g_mm;  // M*M row-major: D2D tx m' -> D2D rx m, entry (m', m)

  double h_k_at(int k, int n) const { return h_k[k * N + n]; }
  double h_m_at(int m, int n) const { return h_m[m * N + n]; }
  double g_km_at(int k, int m, int M) const { return g_km[k * M + m]; }
  double g_mm_at(int m_from, int m_to, int M) const { return g_mm[m_from * M + m_to]; }
};

// Log-distance gain, linear scale. Distances below the reference distance are
// clamped to it.
inline double pathloss_gain(double d_m, double exponent, double ref_db,
                            double ref_distance_m = 1.0) {
  double d = std::max(d_m, ref_distance_m);
  double pl_db = ref_db + 10.0 * exponent * std::log10(d / ref_distance_m);
  return std::pow(10.0, -pl_db / 10.0);
}

namespace detail {

inline Vec2 uniform_disc(Rng& rng, double radius) {
  // Inverse-CDF radius keeps area density uniform.
  double r = radius * std::sqrt(rng.uniform());
  double theta = 2.0 * M_PI * rng.uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace detail

// Pure function of (config, seed): devices uniform over the disc, each D2D
// receiver uniform in a ring [1 m, max_d2d_distance] around its transmitter
// and re-drawn until it lands inside the cell.
inline Topology generate_topology(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(Rng::derive(cfg.rng_seed, 0xA11CE));
  Topology topo;
  topo.bs = {0.0, 0.0};
  topo.cdevices.reserve(cfg.num_cdevices);
  for (int k = 0; k < cfg.num_cdevices; ++k)
    topo.cdevices.push_back(detail::uniform_disc(rng, cfg.cell_radius_m));
  topo.d2d_tx.reserve(cfg.num_d2d_pairs);
  topo.d2d_rx.reserve(cfg.num_d2d_pairs);
  for (int m = 0; m < cfg.num_d2d_pairs; ++m) {
    Vec2 tx = detail::uniform_disc(rng, cfg.cell_radius_m);
    Vec2 rx;
    for (;;) {
      double r = rng.uniform(1.0, cfg.max_d2d_distance_m);
      double theta = 2.0 * M_PI * rng.uniform();
      rx = {tx.x + r * std::cos(theta), tx.y + r * std::sin(theta)};
      if (distance(rx, topo.bs) <= cfg.cell_radius_m) break;
    }
    topo.d2d_tx.push_back(tx);
    topo.d2d_rx.push_back(rx);
  }
  return topo;
}

// Block fading: gain = pathloss(d) * fading with unit-mean exponential fading
// factors, held constant for fading_block_slots slots at a time. Every
// transmitter-receiver pair rides its own scatterers, so its coherence block
// boundary carries a pair-specific phase offset: gains persist just as long,
// but the network never re-rolls them all in the same slot. Deterministic in
// (seed, slot index), so a slot's channel can be replayed exactly.
inline ChannelState sample_channel(const Topology& topo, const ScenarioConfig& cfg,
                                   std::uint64_t slot_index) {
  const int K = cfg.num_cdevices;
  const int M = cfg.num_d2d_pairs;
  const std::uint64_t B = static_cast<std::uint64_t>(cfg.fading_block_slots);
  auto row_rng = [&](std::uint64_t row) {
    const std::uint64_t phase = Rng::derive(cfg.rng_seed, 0xFA5E, row) % B;
    const std::uint64_t block = (slot_index + phase) / B;
    return Rng(Rng::derive(cfg.rng_seed, 0xC4A2, row, block));
  };
  auto fade = [&](Rng& rng) { return cfg.fading_enabled ? rng.exponential(1.0) : 1.0; };
  auto gain_c = [&](double d) {
    return pathloss_gain(d, cfg.pathloss_exponent_cellular, cfg.pathloss_ref_db,
                         cfg.pathloss_ref_distance_m);
  };
  auto gain_d = [&](double d) {
    return pathloss_gain(d, cfg.pathloss_exponent_d2d, cfg.pathloss_ref_db,
                         cfg.pathloss_ref_distance_m);
  };

  ChannelState ch;
  ch.N = cfg.num_subchannels;
  ch.h_k.resize(static_cast<std::size_t>(K) * ch.N);
  ch.h_m.resize(static_cast<std::size_t>(M) * ch.N);
  ch.g_km.resize(static_cast<std::size_t>(K) * M);
  ch.g_mB.resize(M);
  ch.g_mm.assign(static_cast<std::size_t>(M) * M, 0.0);

  std::uint64_t row = 0;
  for (int k = 0; k < K; ++k) {
    Rng rng = row_rng(row++);
    const double pl = gain_c(distance(topo.cdevices[k], topo.bs));
    for (int n = 0; n < ch.N; ++n) ch.h_k[k * ch.N + n] = pl * fade(rng);
  }
  for (int m = 0; m < M; ++m) {
    Rng rng = row_rng(row++);
    const double pl = gain_d(distance(topo.d2d_tx[m], topo.d2d_rx[m]));
    for (int n = 0; n < ch.N; ++n) ch.h_m[m * ch.N + n] = pl * fade(rng);
  }
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) {
      Rng rng = row_rng(row++);
      ch.g_km[k * M + m] = gain_d(distance(topo.cdevices[k], topo.d2d_rx[m])) * fade(rng);
    }
  for (int m = 0; m < M; ++m) {
    Rng rng = row_rng(row++);
    ch.g_mB[m] = gain_c(distance(topo.d2d_tx[m], topo.bs)) * fade(rng);
  }
  for (int mf = 0; mf < M; ++mf)
    for (int mt = 0; mt < M; ++mt) {
      Rng rng = row_rng(row++);
      if (mf != mt)
        ch.g_mm[mf * M + mt] = gain_d(distance(topo.d2d_tx[mf], topo.d2d_rx[mt])) * fade(rng);
    }
  return ch;
}

}  // namespace massim
