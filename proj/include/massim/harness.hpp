#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "massim/baselines.hpp"
#include "massim/implementation.hpp"
#include "massim/train.hpp"

namespace massim {

enum class Approach { proposed, fully_distributed, centralized_g_ma, random_ma };

inline const char* approach_name(Approach a) {
  switch (a) {
    case Approach::proposed: return "proposed";
    case Approach::fully_distributed: return "fully_distributed";
    case Approach::centralized_g_ma: return "centralized_g_ma";
    case Approach::random_ma: return "random_ma";
  }
  throw std::logic_error("approach_name: unknown approach");
}

inline Approach approach_from_name(const std::string& name) {
  if (name == "proposed") return Approach::proposed;
  if (name == "fully_distributed") return Approach::fully_distributed;
  if (name == "centralized_g_ma") return Approach::centralized_g_ma;
  if (name == "random_ma") return Approach::random_ma;
  throw std::invalid_argument("unknown approach: " + name);
}

struct ExperimentSpec {
  ScenarioConfig scenario;
  TrainConfig train;
  ImplementationConfig impl;
  int group_size = 6;
  int eval_slots = 400;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir;  // empty disables caching and file output
};

// Desk-scale training budget: small hidden layers and a short schedule keep a
// full multi-seed experiment in the minutes range while the agents still
// converge on the 16-subchannel scenario.
inline TrainConfig desk_train_config() {
  TrainConfig t;
  t.hidden = {64, 64, 32};
  t.episodes = 300;
  t.steps_per_episode = 150;
  t.updates_per_episode = 14;
  t.batch_size = 48;
  t.eps_decay = 0.98;
  return t;
}

struct SweepDef {
  std::string name;    // figure table stem, e.g. "fig5"
  std::string param;   // "p_latency_max" | "latency_max_s" | "arrival_rate"
  std::vector<double> values;
};

inline std::vector<SweepDef> default_sweeps() {
  return {
      {"fig5", "p_latency_max", {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}},
      {"fig6", "latency_max_s", {1e-3, 2.5e-3, 5e-3, 7.5e-3, 1e-2}},
      {"fig7", "arrival_rate", {0.01, 0.03, 0.05, 0.08, 0.12}},
  };
}

inline void apply_sweep_param(std::vector<LinkProfile>& profiles, const std::string& param,
                              double value) {
  for (LinkProfile& p : profiles) {
    if (p.service != ServiceClass::urllc) continue;
    if (param == "p_latency_max") p.qos.p_latency_max = value;
    else if (param == "latency_max_s") p.qos.latency_max_s = value;
    else if (param == "arrival_rate") p.arrival_rate = value;
    else throw std::invalid_argument("unknown sweep parameter: " + param);
  }
}

// Fixed-width numeric formatting so reruns are byte-identical.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_curve_csv(const std::string& path, const std::vector<EpisodeMetrics>& curve) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "episode,mean_ee,success_all,success_urllc,success_normal,mean_reward,epsilon\n";
  for (const EpisodeMetrics& m : curve) {
    f << m.episode << ',' << fmt(m.mean_ee) << ',' << fmt(m.success_all) << ','
      << fmt(m.success_urllc) << ',' << fmt(m.success_normal) << ',' << fmt(m.mean_reward)
      << ',' << fmt(m.epsilon) << '\n';
  }
}

inline std::vector<EpisodeMetrics> read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<EpisodeMetrics> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    EpisodeMetrics m;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    if (!(is >> m.episode >> m.mean_ee >> m.success_all >> m.success_urllc >>
          m.success_normal >> m.mean_reward >> m.epsilon))
      throw std::runtime_error("malformed curve row in " + path);
    out.push_back(m);
  }
  return out;
}

inline void write_slots_csv(const std::string& path, const std::vector<SlotStats>& slots) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "slot,network_ee,mean_reward,counted,success,counted_urllc,success_urllc,"
       "counted_nor,success_nor,transfer_active,coop_groups\n";
  for (const SlotStats& s : slots) {
    f << s.slot << ',' << fmt(s.network_ee) << ',' << fmt(s.mean_reward) << ',' << s.counted
      << ',' << s.success << ',' << s.counted_urllc << ',' << s.success_urllc << ','
      << s.counted_nor << ',' << s.success_nor << ',' << s.transfer_active << ','
      << s.coop_groups << '\n';
  }
}

struct TrainedModels {
  std::vector<Mlp> models;
  std::vector<EpisodeMetrics> curve;
};

namespace detail {

inline std::string checkpoint_prefix(const ExperimentSpec& spec, Approach a,
                                     std::uint64_t seed) {
  return spec.out_dir + "/checkpoints/" + approach_name(a) + "-seed" + std::to_string(seed);
}

inline Environment make_environment(const ExperimentSpec& spec, std::uint64_t seed,
                                    const std::string& param = "", double value = 0.0) {
  ScenarioConfig cfg = spec.scenario;
  cfg.rng_seed = seed;
  std::vector<LinkProfile> profiles = default_profiles(cfg);
  if (!param.empty()) apply_sweep_param(profiles, param, value);
  return Environment(std::move(cfg), std::move(profiles));
}

}  // namespace detail

// Trains the DQN stack for one (approach, seed), or restores it from the
// checkpoint cache. Proposed trains with cooperative per-group action
// selection, the fully distributed baseline trains independently.
inline TrainedModels obtain_models(const ExperimentSpec& spec, Approach approach,
                                   std::uint64_t seed) {
  if (approach != Approach::proposed && approach != Approach::fully_distributed)
    throw std::invalid_argument("obtain_models: approach has no trainable models");

  Environment env = detail::make_environment(spec, seed);
  const int z = env.num_links();

  const bool cache = !spec.out_dir.empty();
  std::string prefix, curve_path;
  if (cache) {
    prefix = detail::checkpoint_prefix(spec, approach, seed);
    curve_path = prefix + "-curve.csv";
    bool complete = std::filesystem::exists(curve_path);
    for (int i = 0; i < z && complete; ++i)
      complete = std::filesystem::exists(prefix + "-agent" + std::to_string(i) + ".qnet");
    if (complete) {
      TrainedModels out;
      for (int i = 0; i < z; ++i)
        out.models.push_back(Mlp::load_file(prefix + "-agent" + std::to_string(i) + ".qnet"));
      out.curve = read_curve_csv(curve_path);
      return out;
    }
  }

  TrainConfig tcfg = spec.train;
  tcfg.seed = seed;
  TrainResult result;
  if (approach == Approach::proposed) {
    GroupAssignment groups = partition_groups(env.topology(), spec.group_size);
    result = train(env, tcfg, TrainMode::cooperative, &groups);
  } else {
    result = train(env, tcfg, TrainMode::independent);
  }

  if (cache) {
    std::filesystem::create_directories(spec.out_dir + "/checkpoints");
    for (int i = 0; i < z; ++i)
      result.models[i].save_file(prefix + "-agent" + std::to_string(i) + ".qnet");
    write_curve_csv(curve_path, result.metrics);
  }
  return {std::move(result.models), std::move(result.metrics)};
}

// Per-episode mean-EE curve for the random baseline, chunked to match the
// training episode length.
inline std::vector<EpisodeMetrics> random_curve(const ExperimentSpec& spec,
                                                std::uint64_t seed) {
  Environment env = detail::make_environment(spec, seed);
  std::vector<EpisodeMetrics> out;
  Rng rng(Rng::derive(seed, 0xBA5E));
  for (int e = 0; e < spec.train.episodes; ++e) {
    std::vector<SlotStats> slots;
    slots.reserve(spec.train.steps_per_episode);
    for (int t = 0; t < spec.train.steps_per_episode; ++t) {
      const std::uint64_t slot = env.slot();
      auto res = env.step(random_ma_step(env.num_links(), env.num_actions(), rng));
      slots.push_back(summarize_slot(slot, res, env.profiles()));
    }
    EpisodeMetrics m;
    m.episode = e;
    m.mean_ee = mean_network_ee(slots);
    m.success_all = success_probability(slots, ClassFilter::all);
    m.success_urllc = success_probability(slots, ClassFilter::urllc);
    m.success_normal = success_probability(slots, ClassFilter::normal);
    m.mean_reward = mean_reward(slots);
    out.push_back(m);
  }
  return out;
}

// Evaluates one approach at one sweep point with pre-trained models where
// applicable. Models are trained at the base configuration; the sweep changes
// only the QoS parameters of the evaluation environment.
inline std::vector<SlotStats> evaluate_approach(const ExperimentSpec& spec, Approach approach,
                                                std::uint64_t seed,
                                                const std::vector<Mlp>* models,
                                                const std::string& param = "",
                                                double value = 0.0) {
  Environment env = detail::make_environment(spec, seed, param, value);
  switch (approach) {
    case Approach::proposed: {
      if (!models) throw std::invalid_argument("evaluate_approach: proposed needs models");
      GroupAssignment groups = partition_groups(env.topology(), spec.group_size);
      return run_implementation(*models, env, groups, spec.impl, spec.eval_slots).slots;
    }
    case Approach::fully_distributed:
      if (!models)
        throw std::invalid_argument("evaluate_approach: fully_distributed needs models");
      return run_fully_distributed(*models, env, spec.eval_slots);
    case Approach::centralized_g_ma:
      return run_centralized(env, spec.eval_slots, seed);
    case Approach::random_ma:
      return run_random(env, spec.eval_slots, seed);
  }
  throw std::logic_error("evaluate_approach: unknown approach");
}

struct SweepCell {
  double value = 0.0;
  Approach approach = Approach::proposed;
  std::uint64_t seed = 0;
  double success_urllc = 1.0;
  double success_all = 1.0;
  double mean_ee = 0.0;
};

// Runs one sweep across approaches and seeds. Trainable approaches reuse one
// trained model set per seed across all sweep points.
inline std::vector<SweepCell> run_sweep(const ExperimentSpec& spec, const SweepDef& def,
                                        const std::vector<Approach>& approaches) {
  std::map<std::pair<int, std::uint64_t>, TrainedModels> trained;
  for (Approach a : approaches) {
    if (a != Approach::proposed && a != Approach::fully_distributed) continue;
    for (std::uint64_t seed : spec.seeds)
      trained.emplace(std::make_pair(static_cast<int>(a), seed), obtain_models(spec, a, seed));
  }

  std::vector<SweepCell> cells;
  for (double value : def.values) {
    for (Approach a : approaches) {
      for (std::uint64_t seed : spec.seeds) {
        const std::vector<Mlp>* models = nullptr;
        auto it = trained.find(std::make_pair(static_cast<int>(a), seed));
        if (it != trained.end()) models = &it->second.models;
        auto slots = evaluate_approach(spec, a, seed, models, def.param, value);
        SweepCell c;
        c.value = value;
        c.approach = a;
        c.seed = seed;
        c.success_urllc = success_probability(slots, ClassFilter::urllc);
        c.success_all = success_probability(slots, ClassFilter::all);
        c.mean_ee = mean_network_ee(slots);
        cells.push_back(c);
      }
    }
  }
  return cells;
}

inline void write_sweep_csv(const std::string& dir, const SweepDef& def,
                            const std::vector<SweepCell>& cells,
                            const std::vector<Approach>& approaches,
                            const std::vector<std::uint64_t>& seeds) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/" + def.name + "_runs.csv");
    f << def.param << ",approach,seed,success_urllc,success_all,mean_ee\n";
    for (const SweepCell& c : cells) {
      f << fmt(c.value) << ',' << approach_name(c.approach) << ',' << c.seed << ','
        << fmt(c.success_urllc) << ',' << fmt(c.success_all) << ',' << fmt(c.mean_ee) << '\n';
    }
  }
  std::ofstream f(dir + "/" + def.name + ".csv");
  f << def.param << ",approach,mean_success_urllc,stderr_success_urllc,mean_ee\n";
  for (double value : def.values) {
    for (Approach a : approaches) {
      double sum = 0.0, sum2 = 0.0, ee = 0.0;
      int n = 0;
      for (const SweepCell& c : cells) {
        if (c.value != value || c.approach != a) continue;
        sum += c.success_urllc;
        sum2 += c.success_urllc * c.success_urllc;
        ee += c.mean_ee;
        ++n;
      }
      if (n == 0) continue;
      double mean = sum / n;
      double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
      double se = n > 1 ? std::sqrt(var / n) : 0.0;
      f << fmt(value) << ',' << approach_name(a) << ',' << fmt(mean) << ',' << fmt(se) << ','
        << fmt(ee / n) << '\n';
    }
  }
  (void)seeds;
}

// Seed-averaged training curves for the convergence figure.
inline void write_fig4_csv(const std::string& dir,
                           const std::map<std::string, std::vector<std::vector<EpisodeMetrics>>>&
                               curves_by_approach) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir + "/fig4.csv");
  f << "episode,approach,mean_ee,stderr_ee,mean_success_urllc\n";
  for (const auto& [name, runs] : curves_by_approach) {
    if (runs.empty()) continue;
    const std::size_t episodes = runs.front().size();
    for (std::size_t e = 0; e < episodes; ++e) {
      double sum = 0.0, sum2 = 0.0, succ = 0.0;
      int n = 0;
      for (const auto& run : runs) {
        if (e >= run.size()) continue;
        sum += run[e].mean_ee;
        sum2 += run[e].mean_ee * run[e].mean_ee;
        succ += run[e].success_urllc;
        ++n;
      }
      if (n == 0) continue;
      double mean = sum / n;
      double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
      double se = n > 1 ? std::sqrt(var / n) : 0.0;
      f << e << ',' << name << ',' << fmt(mean) << ',' << fmt(se) << ',' << fmt(succ / n)
        << '\n';
    }
  }
}

// Full pipeline: train/restore models per seed, emit training curves, the
// convergence figure table, and every sweep figure table under out_dir.
inline void run_experiment(const ExperimentSpec& spec,
                           const std::vector<SweepDef>& sweeps = default_sweeps()) {
  if (spec.out_dir.empty())
    throw std::invalid_argument("run_experiment: out_dir must be set");
  std::filesystem::create_directories(spec.out_dir);
  std::filesystem::create_directories(spec.out_dir + "/curves");
  {
    std::ofstream cf(spec.out_dir + "/config_resolved.cfg");
    if (!cf) throw std::runtime_error("cannot write resolved config");
    save_config(spec.scenario, cf);
  }

  const std::vector<Approach> all{Approach::proposed, Approach::fully_distributed,
                                  Approach::centralized_g_ma, Approach::random_ma};

  std::map<std::string, std::vector<std::vector<EpisodeMetrics>>> curves;
  for (std::uint64_t seed : spec.seeds) {
    for (Approach a : {Approach::proposed, Approach::fully_distributed}) {
      TrainedModels tm = obtain_models(spec, a, seed);
      write_curve_csv(spec.out_dir + "/curves/" + approach_name(a) + "-seed" +
                          std::to_string(seed) + ".csv",
                      tm.curve);
      curves[approach_name(a)].push_back(std::move(tm.curve));
    }
    std::vector<EpisodeMetrics> rc = random_curve(spec, seed);
    write_curve_csv(spec.out_dir + "/curves/random_ma-seed" + std::to_string(seed) + ".csv",
                    rc);
    curves["random_ma"].push_back(std::move(rc));
  }
  write_fig4_csv(spec.out_dir + "/figures", curves);

  for (const SweepDef& def : sweeps) {
    std::vector<SweepCell> cells = run_sweep(spec, def, all);
    write_sweep_csv(spec.out_dir + "/figures", def, cells, all, spec.seeds);
  }
}

}  // namespace massim
