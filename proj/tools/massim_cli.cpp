#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "massim/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string approach = "proposed";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int episodes = -1;
  int slots = -1;
  bool faithful_loss = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_approach) {
  cmd->add_option("--config", o.config_path, "scenario config file (key = value lines)");
  if (needs_approach)
    cmd->add_option("--approach", o.approach,
                    "proposed | fully_distributed | centralized_g_ma | random_ma");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--out", o.out_dir, "output directory (checkpoints, CSVs)");
  cmd->add_option("--episodes", o.episodes, "training episodes override");
  cmd->add_option("--slots", o.slots, "slots per episode / evaluation slots override");
  cmd->add_flag("--faithful-loss", o.faithful_loss,
                "single-network TD target (no frozen target copy)");
}

massim::ExperimentSpec make_spec(const CommonOpts& o) {
  massim::ExperimentSpec spec;
  if (!o.config_path.empty()) spec.scenario = massim::load_config(o.config_path);
  // Environment variables MASSIM_<KEY> override the file; explicit flags win.
  massim::apply_env_overrides(spec.scenario);
  spec.train = massim::desk_train_config();
  if (o.episodes > 0) spec.train.episodes = o.episodes;
  if (o.slots > 0) {
    spec.train.steps_per_episode = o.slots;
    spec.eval_slots = o.slots;
  }
  if (o.faithful_loss) spec.train.target_sync_period = 0;
  spec.out_dir = o.out_dir;
  spec.seeds = {o.seed};
  return spec;
}

int cmd_train(const CommonOpts& o) {
  massim::ExperimentSpec spec = make_spec(o);
  massim::Approach a = massim::approach_from_name(o.approach);
  if (a != massim::Approach::proposed && a != massim::Approach::fully_distributed) {
    std::cerr << "train: approach '" << o.approach << "' has no trainable models\n";
    return 2;
  }
  massim::TrainedModels tm = massim::obtain_models(spec, a, o.seed);
  std::filesystem::create_directories(spec.out_dir + "/curves");
  massim::write_curve_csv(spec.out_dir + "/curves/" + o.approach + "-seed" +
                              std::to_string(o.seed) + ".csv",
                          tm.curve);
  std::cout << "trained " << o.approach << " seed " << o.seed << ": " << tm.curve.size()
            << " episodes, final mean EE "
            << (tm.curve.empty() ? 0.0 : tm.curve.back().mean_ee) << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& o) {
  massim::ExperimentSpec spec = make_spec(o);
  massim::Approach a = massim::approach_from_name(o.approach);
  const std::vector<massim::Mlp>* models = nullptr;
  massim::TrainedModels tm;
  if (a == massim::Approach::proposed || a == massim::Approach::fully_distributed) {
    tm = massim::obtain_models(spec, a, o.seed);
    models = &tm.models;
  }
  auto slots = massim::evaluate_approach(spec, a, o.seed, models);
  std::filesystem::create_directories(spec.out_dir + "/eval");
  std::string path =
      spec.out_dir + "/eval/" + o.approach + "-seed" + std::to_string(o.seed) + ".csv";
  massim::write_slots_csv(path, slots);
  std::cout << "evaluated " << o.approach << " seed " << o.seed << " over " << slots.size()
            << " slots: mean EE " << massim::mean_network_ee(slots) << ", URLLC success "
            << massim::success_probability(slots, massim::ClassFilter::urllc) << "\n"
            << "wrote " << path << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& name,
              const std::vector<std::uint64_t>& seeds) {
  massim::ExperimentSpec spec = make_spec(o);
  spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{1, 2, 3, 4, 5} : seeds;
  const massim::SweepDef* def = nullptr;
  auto sweeps = massim::default_sweeps();
  for (const auto& s : sweeps)
    if (s.name == name) def = &s;
  if (!def) {
    std::cerr << "unknown sweep '" << name << "' (fig5 | fig6 | fig7)\n";
    return 2;
  }
  std::vector<massim::Approach> approaches{
      massim::Approach::proposed, massim::Approach::fully_distributed,
      massim::Approach::centralized_g_ma, massim::Approach::random_ma};
  auto cells = massim::run_sweep(spec, *def, approaches);
  massim::write_sweep_csv(spec.out_dir + "/figures", *def, cells, approaches, spec.seeds);
  std::cout << "wrote " << spec.out_dir << "/figures/" << def->name << ".csv\n";
  return 0;
}

int cmd_figure(const CommonOpts& o, const std::vector<std::uint64_t>& seeds) {
  massim::ExperimentSpec spec = make_spec(o);
  spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{1, 2, 3, 4, 5} : seeds;
  massim::run_experiment(spec);
  std::cout << "figure tables written under " << spec.out_dir << "/figures\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"massim: multi-agent subchannel and power control simulator"};
  app.require_subcommand(1);

  CommonOpts train_o, eval_o, sweep_o, fig_o;
  std::string sweep_name = "fig5";
  std::vector<std::uint64_t> sweep_seeds, fig_seeds;

  add_common(app.add_subcommand("train", "train DQN agents"), train_o, true);
  add_common(app.add_subcommand("evaluate", "evaluate one approach"), eval_o, true);
  CLI::App* sweep = app.add_subcommand("sweep", "QoS parameter sweep across approaches");
  add_common(sweep, sweep_o, false);
  sweep->add_option("--name", sweep_name, "fig5 | fig6 | fig7");
  sweep->add_option("--seeds", sweep_seeds, "seed list (overrides --seed)");
  CLI::App* fig = app.add_subcommand("figure", "full figure pipeline (curves + sweeps)");
  add_common(fig, fig_o, false);
  fig->add_option("--seeds", fig_seeds, "seed list (overrides --seed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("train")) return cmd_train(train_o);
    if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_o);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_o, sweep_name, sweep_seeds);
    if (app.got_subcommand("figure")) return cmd_figure(fig_o, fig_seeds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
