#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace massim {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double mw_to_watt(double mw) { return mw * 1e-3; }

enum class LinkKind { cellular, d2d };
enum class ServiceClass { urllc, normal };

struct QosThresholds {
  double sinr_min_db = 5.0;
  double latency_max_s = 5e-3;       // T_max
  double p_latency_max = 1e-5;       // maximum latency violation probability
  double p_outage_max = 1e-5;        // maximum SINR outage probability
  double rate_min_normal = 3.5;      // bps/Hz, normal-service floor
  double t_pc_s = 0.3e-3;            // processing/computing delay

  void validate() const {
    auto prob_ok = [](double p) { return p > 0.0 && p < 1.0; };
    if (!prob_ok(p_latency_max) || !prob_ok(p_outage_max))
      throw std::invalid_argument("QosThresholds: probabilities must be in (0,1)");
    if (!(latency_max_s > t_pc_s) || t_pc_s < 0.0)
      throw std::invalid_argument("QosThresholds: require T_max > t_pc >= 0");
  }
};

struct LinkProfile {
  int link_id = 0;
  LinkKind kind = LinkKind::cellular;
  ServiceClass service = ServiceClass::urllc;
  double arrival_rate = 0.03;        // packets per slot
  double mean_packet_bits = 512.0;
  QosThresholds qos;

  void validate() const {
    if (arrival_rate < 0.0) throw std::invalid_argument("LinkProfile: arrival_rate < 0");
    if (mean_packet_bits <= 0.0) throw std::invalid_argument("LinkProfile: mean_packet_bits <= 0");
    qos.validate();
  }
};

struct RewardConfig {
  enum class EeMode { per_link, network };
  double c1 = 2.0;  // URLLC failure penalty weight
  double c2 = 2.0;  // normal-rate failure penalty weight
  double ee_scale = 1.0;  // divides the EE term so rewards stay O(1)
  EeMode ee_mode = EeMode::per_link;

  void validate() const {
    if (c1 <= 0.0 || c2 <= 0.0) throw std::invalid_argument("RewardConfig: c1, c2 must be > 0");
    if (ee_scale <= 0.0) throw std::invalid_argument("RewardConfig: ee_scale must be > 0");
  }
};

struct ScenarioConfig {
  double cell_radius_m = 500.0;
  int num_cdevices = 20;             // K
  int num_d2d_pairs = 10;            // M
  int num_subchannels = 16;          // N
  double subchannel_bandwidth_hz = 1e6;
  double max_d2d_distance_m = 75.0;
  double noise_dbm = -114.0;
  double max_power_c_mw = 500.0;
  double max_power_d_mw = 500.0;
  double circuit_power_mw = 50.0;
  std::vector<double> power_levels_mw{50.0, 150.0, 300.0, 500.0};
  double carrier_frequency_hz = 2e9;
  double slot_duration_s = 1e-3;
  std::uint64_t rng_seed = 1;

  bool fading_enabled = true;
  int fading_block_slots = 1;        // slots per fading coherence block
  double pathloss_exponent_cellular = 3.76;
  double pathloss_exponent_d2d = 4.0;
  double pathloss_ref_db = 38.4;     // loss at d0 = 1 m, ~free space at 2 GHz
  double pathloss_ref_distance_m = 1.0;

  // Preamble pool size of the centralized grouped-access baseline; links the
  // planner schedules contend for grants on these preambles each slot.
  int preamble_pool = 24;

  // Service mix and traffic defaults used by default_profiles().
  double normal_fraction = 0.2;
  double urllc_arrival_rate = 0.03;      // packets/slot
  double urllc_mean_packet_bits = 512.0;
  QosThresholds qos;

  RewardConfig reward;

  int num_links() const { return num_cdevices + num_d2d_pairs; }
  double noise_w() const { return dbm_to_watt(noise_dbm); }
  int num_actions() const { return num_subchannels * static_cast<int>(power_levels_mw.size()) + 1; }

  void validate() const {
    if (num_cdevices < 0 || num_d2d_pairs < 0)
      throw std::invalid_argument("ScenarioConfig: K, M must be >= 0");
    if (num_subchannels < 1) throw std::invalid_argument("ScenarioConfig: N must be >= 1");
    if (num_links() < 1) throw std::invalid_argument("ScenarioConfig: K + M must be >= 1");
    if (cell_radius_m <= 0.0) throw std::invalid_argument("ScenarioConfig: cell_radius must be > 0");
    if (max_d2d_distance_m <= 0.0)
      throw std::invalid_argument("ScenarioConfig: max_d2d_distance must be > 0");
    if (max_d2d_distance_m >= cell_radius_m)
      throw std::invalid_argument("ScenarioConfig: max_d2d_distance must be < cell_radius");
    if (power_levels_mw.empty())
      throw std::invalid_argument("ScenarioConfig: power_levels must be non-empty");
    for (double p : power_levels_mw) {
      if (p > max_power_c_mw || p > max_power_d_mw)
        throw std::invalid_argument("ScenarioConfig: power level exceeds device maximum");
    }
    if (subchannel_bandwidth_hz <= 0.0 || slot_duration_s <= 0.0)
      throw std::invalid_argument("ScenarioConfig: bandwidth and slot duration must be > 0");
    if (fading_block_slots < 1)
      throw std::invalid_argument("ScenarioConfig: fading_block_slots must be >= 1");
    if (preamble_pool < 1)
      throw std::invalid_argument("ScenarioConfig: preamble_pool must be >= 1");
    qos.validate();
    reward.validate();
  }
};

// Deterministic service mix: round(normal_fraction * Z) normal links spread
// evenly over the link index range, the rest URLLC. Link ids 0..K-1 are
// cellular, K..K+M-1 are D2D.
inline std::vector<LinkProfile> default_profiles(const ScenarioConfig& cfg) {
  const int z = cfg.num_links();
  const int num_normal = static_cast<int>(std::lround(cfg.normal_fraction * z));
  std::vector<LinkProfile> profiles(z);
  int assigned_normal = 0;
  for (int i = 0; i < z; ++i) {
    LinkProfile& p = profiles[i];
    p.link_id = i;
    p.kind = i < cfg.num_cdevices ? LinkKind::cellular : LinkKind::d2d;
    p.qos = cfg.qos;
    bool make_normal = num_normal > 0 &&
                       (i + 1) * num_normal / z > assigned_normal;
    if (make_normal) {
      p.service = ServiceClass::normal;
      p.arrival_rate = 0.0;  // normal links are modeled full-buffer
      p.mean_packet_bits = cfg.urllc_mean_packet_bits;
      ++assigned_normal;
    } else {
      p.service = ServiceClass::urllc;
      p.arrival_rate = cfg.urllc_arrival_rate;
      p.mean_packet_bits = cfg.urllc_mean_packet_bits;
    }
    p.validate();
  }
  return profiles;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v) {
  return v == "1" || v == "true" || v == "yes" || v == "on";
}

}  // namespace detail

// One "key = value" parameter per line; '#' starts a comment.
inline void apply_config_line(ScenarioConfig& cfg, const std::string& key,
                              const std::string& value) {
  auto d = [&] { return std::stod(value); };
  auto i = [&] { return std::stoi(value); };
  if (key == "cell_radius_m") cfg.cell_radius_m = d();
  else if (key == "num_cdevices") cfg.num_cdevices = i();
  else if (key == "num_d2d_pairs") cfg.num_d2d_pairs = i();
  else if (key == "num_subchannels") cfg.num_subchannels = i();
  else if (key == "subchannel_bandwidth_hz") cfg.subchannel_bandwidth_hz = d();
  else if (key == "max_d2d_distance_m") cfg.max_d2d_distance_m = d();
  else if (key == "noise_dbm") cfg.noise_dbm = d();
  else if (key == "max_power_c_mw") cfg.max_power_c_mw = d();
  else if (key == "max_power_d_mw") cfg.max_power_d_mw = d();
  else if (key == "circuit_power_mw") cfg.circuit_power_mw = d();
  else if (key == "power_levels_mw") {
    cfg.power_levels_mw.clear();
    std::istringstream ss(value);
    double p;
    while (ss >> p) cfg.power_levels_mw.push_back(p);
  } else if (key == "carrier_frequency_hz") cfg.carrier_frequency_hz = d();
  else if (key == "slot_duration_s") cfg.slot_duration_s = d();
  else if (key == "rng_seed") cfg.rng_seed = std::stoull(value);
  else if (key == "fading_enabled") cfg.fading_enabled = detail::parse_bool(value);
  else if (key == "fading_block_slots") cfg.fading_block_slots = i();
  else if (key == "pathloss_exponent_cellular") cfg.pathloss_exponent_cellular = d();
  else if (key == "pathloss_exponent_d2d") cfg.pathloss_exponent_d2d = d();
  else if (key == "pathloss_ref_db") cfg.pathloss_ref_db = d();
  else if (key == "preamble_pool") cfg.preamble_pool = i();
  else if (key == "normal_fraction") cfg.normal_fraction = d();
  else if (key == "urllc_arrival_rate") cfg.urllc_arrival_rate = d();
  else if (key == "urllc_mean_packet_bits") cfg.urllc_mean_packet_bits = d();
  else if (key == "sinr_min_db") cfg.qos.sinr_min_db = d();
  else if (key == "latency_max_s") cfg.qos.latency_max_s = d();
  else if (key == "p_latency_max") cfg.qos.p_latency_max = d();
  else if (key == "p_outage_max") cfg.qos.p_outage_max = d();
  else if (key == "rate_min_normal") cfg.qos.rate_min_normal = d();
  else if (key == "t_pc_s") cfg.qos.t_pc_s = d();
  else if (key == "reward_c1") cfg.reward.c1 = d();
  else if (key == "reward_c2") cfg.reward.c2 = d();
  else if (key == "reward_ee_scale") cfg.reward.ee_scale = d();
  else if (key == "reward_ee_mode") {
    if (value == "per_link") cfg.reward.ee_mode = RewardConfig::EeMode::per_link;
    else if (value == "network") cfg.reward.ee_mode = RewardConfig::EeMode::network;
    else throw std::invalid_argument("unknown reward_ee_mode: " + value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_config_line(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

inline void save_config(const ScenarioConfig& cfg, std::ostream& out) {
  auto w = [&](const char* k, double v) { out << k << " = " << v << "\n"; };
  out.precision(17);
  w("cell_radius_m", cfg.cell_radius_m);
  out << "num_cdevices = " << cfg.num_cdevices << "\n";
  out << "num_d2d_pairs = " << cfg.num_d2d_pairs << "\n";
  out << "num_subchannels = " << cfg.num_subchannels << "\n";
  w("subchannel_bandwidth_hz", cfg.subchannel_bandwidth_hz);
  w("max_d2d_distance_m", cfg.max_d2d_distance_m);
  w("noise_dbm", cfg.noise_dbm);
  w("max_power_c_mw", cfg.max_power_c_mw);
  w("max_power_d_mw", cfg.max_power_d_mw);
  w("circuit_power_mw", cfg.circuit_power_mw);
  out << "power_levels_mw =";
  for (double p : cfg.power_levels_mw) out << " " << p;
  out << "\n";
  w("carrier_frequency_hz", cfg.carrier_frequency_hz);
  w("slot_duration_s", cfg.slot_duration_s);
  out << "rng_seed = " << cfg.rng_seed << "\n";
  out << "fading_enabled = " << (cfg.fading_enabled ? 1 : 0) << "\n";
  out << "fading_block_slots = " << cfg.fading_block_slots << "\n";
  w("pathloss_exponent_cellular", cfg.pathloss_exponent_cellular);
  w("pathloss_exponent_d2d", cfg.pathloss_exponent_d2d);
  w("pathloss_ref_db", cfg.pathloss_ref_db);
  out << "preamble_pool = " << cfg.preamble_pool << "\n";
  w("normal_fraction", cfg.normal_fraction);
  w("urllc_arrival_rate", cfg.urllc_arrival_rate);
  w("urllc_mean_packet_bits", cfg.urllc_mean_packet_bits);
  w("sinr_min_db", cfg.qos.sinr_min_db);
  w("latency_max_s", cfg.qos.latency_max_s);
  w("p_latency_max", cfg.qos.p_latency_max);
  w("p_outage_max", cfg.qos.p_outage_max);
  w("rate_min_normal", cfg.qos.rate_min_normal);
  w("t_pc_s", cfg.qos.t_pc_s);
  w("reward_c1", cfg.reward.c1);
  w("reward_c2", cfg.reward.c2);
  w("reward_ee_scale", cfg.reward.ee_scale);
  out << "reward_ee_mode = "
      << (cfg.reward.ee_mode == RewardConfig::EeMode::per_link ? "per_link" : "network")
      << "\n";
}

// Environment variables named MASSIM_<KEY> (key upper-cased) override config
// file entries; explicit CLI flags still take precedence in the tool.
inline void apply_env_overrides(ScenarioConfig& cfg, const char* prefix = "MASSIM_") {
  static const char* keys[] = {
      "cell_radius_m", "num_cdevices", "num_d2d_pairs", "num_subchannels",
      "subchannel_bandwidth_hz", "max_d2d_distance_m", "noise_dbm",
      "max_power_c_mw", "max_power_d_mw", "circuit_power_mw", "power_levels_mw",
      "carrier_frequency_hz", "slot_duration_s", "rng_seed", "fading_enabled",
      "fading_block_slots",
      "pathloss_exponent_cellular", "pathloss_exponent_d2d", "pathloss_ref_db",
      "preamble_pool", "normal_fraction", "urllc_arrival_rate", "urllc_mean_packet_bits",
      "sinr_min_db", "latency_max_s", "p_latency_max", "p_outage_max",
      "rate_min_normal", "t_pc_s", "reward_c1", "reward_c2", "reward_ee_scale",
      "reward_ee_mode"};
  for (const char* key : keys) {
    std::string env_name = prefix;
    for (const char* c = key; *c; ++c) env_name += static_cast<char>(std::toupper(*c));
    if (const char* v = std::getenv(env_name.c_str())) apply_config_line(cfg, key, v);
  }
  cfg.validate();
}

}  // namespace massim
