// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Expensive training artifacts are cached under the output
// directory (argv[1], default "acceptance_cache") so reruns are fast.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "massim/baselines.hpp"
#include "massim/harness.hpp"
#include "massim/implementation.hpp"
#include "massim/lambert.hpp"
#include "massim/train.hpp"

using namespace massim;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s criterion-%d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string locate_config(const std::string& name) {
  for (const char* prefix : {"configs/", "../configs/", "../../configs/"}) {
    std::string path = std::string(prefix) + name;
    if (std::filesystem::exists(path)) return path;
  }
  throw std::runtime_error("cannot locate configs/" + name);
}

// ---------------------------------------------------------------- criterion 1

void criterion_lambert() {
  const double kResidualTol = 1e-12;  // absolute residual of w * e^w - x
  const int kPoints = 10000;
  Rng rng(101);
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool branch_ok = true;
  const double lo = std::log10(std::exp(-1.0)) - 1e-9, hi = -14.0;
  for (int i = 0; i < kPoints; ++i) {
    double x = -std::pow(10.0, rng.uniform(hi, lo));
    double w = lambert_w_minus1(x);
    if (w > -1.0) branch_ok = false;
    worst = std::max(worst, std::abs(w * std::exp(w) - x));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  d << "max residual " << worst << " over " << kPoints << " points in " << secs << " s";
  report(1, "lambert-lower-branch", branch_ok && worst <= kResidualTol && secs < 1.0,
         d.str());
}

// ---------------------------------------------------------------- criterion 2

void criterion_queue_oracle() {
  const std::int64_t kSlots = 1000000;
  struct Tuple {
    double lambda, t_max, p_max, bits;
  };
  const Tuple tuples[10] = {
      {0.01, 5e-3, 1e-5, 512},  {0.03, 5e-3, 1e-5, 512},  {0.05, 5e-3, 1e-5, 512},
      {0.03, 2e-3, 1e-4, 512},  {0.03, 1e-2, 1e-6, 512},  {0.08, 5e-3, 1e-4, 512},
      {0.03, 5e-3, 1e-3, 1024}, {0.05, 3e-3, 1e-4, 256},  {0.1, 8e-3, 1e-5, 512},
      {0.02, 4e-3, 1e-7, 768},
  };
  ScenarioConfig cfg;
  bool all_ok = true;
  double worst_margin = -1e9;
  for (int i = 0; i < 10; ++i) {
    LinkProfile p;
    p.service = ServiceClass::urllc;
    p.arrival_rate = tuples[i].lambda;
    p.mean_packet_bits = tuples[i].bits;
    p.qos.latency_max_s = tuples[i].t_max;
    p.qos.p_latency_max = tuples[i].p_max;
    double rate = min_rate_urllc(p, cfg).rate_min_urllc;
    double observed = queue_latency_oracle(p, rate, cfg, kSlots, 1000 + i);
    double n_packets = tuples[i].lambda * static_cast<double>(kSlots);
    double se = std::sqrt(tuples[i].p_max * (1.0 - tuples[i].p_max) / n_packets);
    double bound = tuples[i].p_max + 3.0 * se;
    if (observed > bound) all_ok = false;
    worst_margin = std::max(worst_margin, observed - bound);
  }
  std::ostringstream d;
  d << "10 tuples at rate_min over " << kSlots
    << " slots, worst (violation - bound) = " << worst_margin;
  report(2, "latency-transform-conservative", all_ok, d.str());
}

// ---------------------------------------------------------------- criterion 3

void criterion_backprop() {
  const double kRelTol = 1e-5;
  const double h = 1e-6;
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sizes{2 + rng.uniform_int(5)};
    int hidden_layers = 1 + rng.uniform_int(2);
    for (int l = 0; l < hidden_layers; ++l) sizes.push_back(3 + rng.uniform_int(6));
    sizes.push_back(1 + rng.uniform_int(4));
    Mlp net = Mlp::make(sizes, rng);
    std::vector<double> x(sizes.front()), d_out(sizes.back());
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (double& v : d_out) v = rng.uniform(-1.0, 1.0);
    auto scalar = [&](const Mlp& m) {
      auto y = m.forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += d_out[i] * y[i];
      return s;
    };
    Mlp::ForwardCache cache;
    net.forward_cached(x, cache);
    Mlp::Grad grad;
    grad.zero_like(net);
    net.backward(cache, d_out, grad);

    double num = 0.0, den = 0.0;
    for (int l = 0; l < net.num_layers(); ++l) {
      auto probe = [&](std::vector<double>& theta, double g, std::size_t idx) {
        double saved = theta[idx];
        theta[idx] = saved + h;
        double fp = scalar(net);
        theta[idx] = saved - h;
        double fm = scalar(net);
        theta[idx] = saved;
        double fd = (fp - fm) / (2.0 * h);
        num += (g - fd) * (g - fd);
        den += fd * fd;
      };
      for (std::size_t i = 0; i < net.weights(l).size(); ++i)
        probe(net.weights(l), grad.weights[l][i], i);
      for (std::size_t i = 0; i < net.biases(l).size(); ++i)
        probe(net.biases(l), grad.biases[l][i], i);
    }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
  }
  std::ostringstream d;
  d << "worst relative gradient error " << worst << " over 20 networks";
  report(3, "backprop-vs-finite-differences", worst <= kRelTol, d.str());
}

// ---------------------------------------------------------------- criterion 4

void criterion_tabular_q() {
  const double kTol = 1e-3;
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int S = 6 + rng.uniform_int(5);
    const int A = 2 + rng.uniform_int(3);
    const double gamma = 0.9;
    std::vector<int> next(S * A);
    std::vector<double> r(S * A);
    for (int i = 0; i < S * A; ++i) {
      next[i] = rng.uniform_int(S);
      r[i] = rng.uniform(-1.0, 1.0);
    }
    // value iteration on Q to fixed point
    std::vector<double> qstar(S * A, 0.0);
    for (int it = 0; it < 2000; ++it) {
      double delta = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          int sn = next[s * A + a];
          double best = qstar[sn * A];
          for (int b = 1; b < A; ++b) best = std::max(best, qstar[sn * A + b]);
          double v = r[s * A + a] + gamma * best;
          delta = std::max(delta, std::abs(v - qstar[s * A + a]));
          qstar[s * A + a] = v;
        }
      }
      if (delta < 1e-13) break;
    }
    // Q-learning with deterministic transitions, full sweeps, alpha = 1
    QTable q(S, A);
    for (int sweep = 0; sweep < 400; ++sweep)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) q.update(s, a, r[s * A + a], next[s * A + a], 1.0, gamma);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) worst = std::max(worst, std::abs(q.at(s, a) - qstar[s * A + a]));
  }
  std::ostringstream d;
  d << "max |Q - Q*| = " << worst << " over 50 random MDPs";
  report(4, "q-learning-fixed-point", worst <= kTol, d.str());
}

// ------------------------------------------------------- shared experiment

ExperimentSpec desk_spec(const std::string& out_dir) {
  ExperimentSpec spec;
  spec.scenario = load_config(locate_config("desk.cfg"));
  spec.train = desk_train_config();
  spec.group_size = 6;
  spec.eval_slots = 400;
  spec.seeds = {1, 2, 3, 4, 5};
  spec.out_dir = out_dir;
  return spec;
}

double tail_mean(const std::vector<double>& v, double fraction) {
  std::size_t start = static_cast<std::size_t>(v.size() * (1.0 - fraction));
  double sum = 0.0;
  for (std::size_t i = start; i < v.size(); ++i) sum += v[i];
  return sum / static_cast<double>(v.size() - start);
}

std::vector<double> smooth(const std::vector<double>& v, int window) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t lo = i >= static_cast<std::size_t>(window) ? i - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(i - lo + 1);
  }
  return out;
}

int convergence_episode(const std::vector<double>& mean_curve) {
  auto s = smooth(mean_curve, 15);
  double final_level = tail_mean(s, 0.2);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= 0.95 * final_level) return static_cast<int>(i);
  return static_cast<int>(s.size());
}

void criterion_fig4(const ExperimentSpec& spec) {
  std::vector<std::vector<double>> prop_curves, full_curves, rand_curves;
  for (std::uint64_t seed : spec.seeds) {
    auto to_ee = [](const std::vector<EpisodeMetrics>& c) {
      std::vector<double> v;
      for (const auto& m : c) v.push_back(m.mean_ee);
      return v;
    };
    prop_curves.push_back(to_ee(obtain_models(spec, Approach::proposed, seed).curve));
    full_curves.push_back(to_ee(obtain_models(spec, Approach::fully_distributed, seed).curve));
    rand_curves.push_back(to_ee(random_curve(spec, seed)));
  }
  int ordered = 0;
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
    double p = tail_mean(prop_curves[i], 0.2);
    double f = tail_mean(full_curves[i], 0.2);
    double r = tail_mean(rand_curves[i], 0.2);
    if (p > f && f > r) ++ordered;
  }
  auto seed_mean = [](const std::vector<std::vector<double>>& runs) {
    std::vector<double> mean(runs.front().size(), 0.0);
    for (const auto& run : runs)
      for (std::size_t e = 0; e < mean.size(); ++e) mean[e] += run[e];
    for (double& v : mean) v /= static_cast<double>(runs.size());
    return mean;
  };
  int conv_prop = convergence_episode(seed_mean(prop_curves));
  int conv_full = convergence_episode(seed_mean(full_curves));
  bool pass = ordered >= 4 && conv_prop < conv_full;
  std::ostringstream d;
  d << "EE ordering proposed>fully>random in " << ordered << "/" << spec.seeds.size()
    << " seeds; 95% convergence at episode " << conv_prop << " (proposed) vs " << conv_full
    << " (fully distributed)";
  report(5, "training-curves", pass, d.str());
}

struct SweepSummary {
  // seed-mean URLLC success per sweep value, one row per approach
  std::vector<double> values;
  std::vector<double> proposed, fully, centralized, random;
};

SweepSummary summarize(const SweepDef& def, const std::vector<SweepCell>& cells) {
  SweepSummary s;
  s.values = def.values;
  for (double value : def.values) {
    for (Approach a : {Approach::proposed, Approach::fully_distributed,
                       Approach::centralized_g_ma, Approach::random_ma}) {
      double sum = 0.0;
      int n = 0;
      for (const auto& c : cells) {
        if (c.value != value || c.approach != a) continue;
        sum += c.success_urllc;
        ++n;
      }
      double mean = sum / std::max(n, 1);
      if (a == Approach::proposed) s.proposed.push_back(mean);
      else if (a == Approach::fully_distributed) s.fully.push_back(mean);
      else if (a == Approach::centralized_g_ma) s.centralized.push_back(mean);
      else s.random.push_back(mean);
    }
  }
  return s;
}

int count_inversions(const std::vector<double>& v, bool increasing) {
  const double kSlack = 1e-9;
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    double step = increasing ? v[i + 1] - v[i] : v[i] - v[i + 1];
    if (step < -kSlack) ++inversions;
  }
  return inversions;
}

bool dominates(const SweepSummary& s, double slack) {
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.proposed[i] + slack < s.fully[i]) return false;
    if (s.proposed[i] + slack < s.centralized[i]) return false;
    if (s.proposed[i] + slack < s.random[i]) return false;
  }
  return true;
}

void criterion_qos_sweeps(const ExperimentSpec& spec) {
  const std::vector<Approach> all{Approach::proposed, Approach::fully_distributed,
                                  Approach::centralized_g_ma, Approach::random_ma};
  auto sweeps = default_sweeps();
  // fig5: values tighten reliability (p_latency_max decreasing), so success
  // must not increase; fig6: deadline loosens, so success must not decrease.
  SweepSummary fig5 = summarize(sweeps[0], run_sweep(spec, sweeps[0], all));
  SweepSummary fig6 = summarize(sweeps[1], run_sweep(spec, sweeps[1], all));
  int inv5 = count_inversions(fig5.proposed, false);
  int inv6 = count_inversions(fig6.proposed, true);
  const double kDominanceSlack = 1e-9;
  bool pass = inv5 <= 1 && inv6 <= 1 && dominates(fig5, kDominanceSlack) &&
              dominates(fig6, kDominanceSlack);
  std::ostringstream d;
  d << "reliability sweep inversions " << inv5 << ", deadline sweep inversions " << inv6
    << ", proposed dominates baselines: "
    << (dominates(fig5, kDominanceSlack) && dominates(fig6, kDominanceSlack) ? "yes" : "no");
  report(6, "qos-parameter-sweeps", pass, d.str());
}

void criterion_arrival_sweep(const ExperimentSpec& spec) {
  const std::vector<Approach> all{Approach::proposed, Approach::fully_distributed,
                                  Approach::centralized_g_ma, Approach::random_ma};
  SweepDef def = default_sweeps()[2];  // arrival_rate {0.01 .. 0.12}
  SweepSummary s = summarize(def, run_sweep(spec, def, all));
  bool light_ok = s.proposed.front() >= 0.95;
  // strict decrease across the saturated region (lambda >= 0.05)
  bool strict = true;
  for (std::size_t i = 0; i + 1 < s.values.size(); ++i)
    if (s.values[i] >= 0.05 && !(s.proposed[i + 1] < s.proposed[i] - 1e-6)) strict = false;
  bool dom = dominates(s, 1e-9);
  std::ostringstream d;
  d << "success at lambda=0.01: " << s.proposed.front() << "; strict decrease beyond 0.05: "
    << (strict ? "yes" : "no") << "; dominates baselines: " << (dom ? "yes" : "no");
  report(7, "arrival-rate-sweep", light_ok && strict && dom, d.str());
}

// ---------------------------------------------------------------- criterion 8

void criterion_joint_optimality() {
  Rng rng(808);
  const int N = 4, P = 2;
  const int num_actions = N * P + 1;
  bool all_ok = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int members = 1 + rng.uniform_int(3);
    JointContext ctx;
    ctx.num_subchannels = N;
    ctx.num_power_levels = P;
    std::vector<Mlp> nets;
    nets.reserve(members);
    for (int i = 0; i < members; ++i) {
      ctx.is_cellular.push_back(rng.uniform_int(2));
      AgentState s(2 * N + 2);
      for (double& v : s) v = rng.uniform();
      for (int n = 0; n < N; ++n) s[n] = rng.uniform_int(2);  // binary busy flags
      ctx.states.push_back(s);
      ctx.must_transmit.push_back(rng.uniform_int(2));
      nets.push_back(Mlp::make({2 * N + 2, 6, num_actions}, rng));
    }
    for (int i = 0; i < members; ++i) {
      const Mlp* net = &nets[i];
      ctx.evaluators.push_back([net](const AgentState& s) { return net->forward(s); });
    }

    // Brute force over the same feasible set and objective. A cellular member
    // may not reuse a subchannel taken by an earlier cellular member, and it
    // avoids subchannels flagged busy in its announcement-augmented
    // observation unless every subchannel is flagged.
    double best = -1e300;
    std::vector<AgentAction> actions(members);
    std::function<void(int, std::uint64_t, std::uint64_t)> enumerate =
        [&](int i, std::uint64_t busy, std::uint64_t c_mask) {
          if (i == members) {
            best = std::max(best, joint_action_value(ctx, actions));
            return;
          }
          std::uint64_t sense = busy;
          for (int n = 0; n < N; ++n)
            if (ctx.states[i][n] > 0.5) sense |= 1ULL << n;
          bool voided = true;
          for (int n = 0; n < N; ++n)
            if (!(sense & (1ULL << n))) voided = false;
          auto tx_blocked = [&](int a) {
            if (!ctx.is_cellular[i]) return false;
            int n = (a - 1) / P;
            if (c_mask & (1ULL << n)) return true;
            return !voided && (sense & (1ULL << n)) != 0;
          };
          // Work conservation: idle is off the table while any transmit
          // action stays admissible for a must_transmit member.
          bool any_tx = false;
          for (int a = 1; a < num_actions && !any_tx; ++a)
            if (!tx_blocked(a)) any_tx = true;
          for (int a = 0; a < num_actions; ++a) {
            std::uint64_t nb = busy, nc = c_mask;
            if (a == 0) {
              if (ctx.must_transmit[i] && any_tx) continue;
            } else {
              if (tx_blocked(a)) continue;
              int n = (a - 1) / P;
              if (ctx.is_cellular[i]) nc |= 1ULL << n;
              nb |= 1ULL << n;
            }
            actions[i] = {a};
            enumerate(i + 1, nb, nc);
          }
        };
    enumerate(0, 0, 0);

    double exhaustive = joint_action_value(ctx, joint_action(ctx, JointMode::exhaustive));
    double greedy = joint_action_value(ctx, joint_action(ctx, JointMode::sequential_greedy));
    if (std::abs(exhaustive - best) > 1e-9) all_ok = false;
    if (greedy > exhaustive + 1e-9) all_ok = false;
    worst_gap = std::max(worst_gap, std::abs(exhaustive - best));
  }
  std::ostringstream d;
  d << "exhaustive matches brute force on 100 instances (max gap " << worst_gap
    << "), greedy never exceeds it";
  report(8, "joint-action-optimality", all_ok, d.str());
}

// ---------------------------------------------------------------- criterion 9

void criterion_reduction_identity(const ExperimentSpec& spec) {
  TrainedModels tm = obtain_models(spec, Approach::fully_distributed, 1);
  ScenarioConfig cfg = spec.scenario;
  cfg.rng_seed = 1;
  Environment e1(cfg, default_profiles(cfg));
  Environment e2(cfg, default_profiles(cfg));
  const int slots = 300;
  auto fd = run_fully_distributed(tm.models, e1, slots);
  ImplementationConfig icfg;
  icfg.transfer_enabled = false;
  auto impl = run_implementation(tm.models, e2,
                                 GroupAssignment::singletons(cfg.num_links()), icfg, slots);
  bool identical = fd.size() == impl.slots.size();
  for (std::size_t i = 0; identical && i < fd.size(); ++i) {
    const SlotStats& a = fd[i];
    const SlotStats& b = impl.slots[i];
    identical = a.slot == b.slot && a.network_ee == b.network_ee &&
                a.mean_reward == b.mean_reward && a.counted == b.counted &&
                a.success == b.success && a.counted_urllc == b.counted_urllc &&
                a.success_urllc == b.success_urllc && a.counted_nor == b.counted_nor &&
                a.success_nor == b.success_nor;
  }
  std::string pa = spec.out_dir + "/reduction_fd.csv";
  std::string pb = spec.out_dir + "/reduction_impl.csv";
  write_slots_csv(pa, fd);
  write_slots_csv(pb, impl.slots);
  std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  bool bytes_equal = sa.str() == sb.str();
  std::ostringstream d;
  d << slots << " slots, stats bit-identical: " << (identical ? "yes" : "no")
    << ", CSV bytes identical: " << (bytes_equal ? "yes" : "no");
  report(9, "singleton-reduction-identity", identical && bytes_equal, d.str());
}

// --------------------------------------------------------------- criterion 10

bool dirs_byte_identical(const std::string& a, const std::string& b, std::string& diff) {
  namespace fs = std::filesystem;
  std::vector<std::string> rel_a, rel_b;
  for (auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a).string());
  for (auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b).string());
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  if (rel_a != rel_b) {
    diff = "file sets differ";
    return false;
  }
  for (const std::string& rel : rel_a) {
    std::ifstream fa(a + "/" + rel, std::ios::binary), fb(b + "/" + rel, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) {
      diff = "content differs: " + rel;
      return false;
    }
  }
  return true;
}

void criterion_rerun_identical(const std::string& out_root) {
  ExperimentSpec spec;
  spec.scenario = load_config(locate_config("desk.cfg"));
  spec.scenario.num_cdevices = 4;
  spec.scenario.num_d2d_pairs = 2;
  spec.scenario.num_subchannels = 4;
  spec.train = desk_train_config();
  spec.train.episodes = 4;
  spec.train.steps_per_episode = 30;
  spec.train.batch_size = 16;
  spec.train.hidden = {12, 12};
  spec.eval_slots = 60;
  spec.seeds = {1, 2};
  std::vector<SweepDef> sweeps{{"fig7", "arrival_rate", {0.02, 0.1}}};

  std::string dir_a = out_root + "/rerun_a", dir_b = out_root + "/rerun_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  spec.out_dir = dir_a;
  run_experiment(spec, sweeps);
  spec.out_dir = dir_b;
  run_experiment(spec, sweeps);
  std::string diff;
  bool same = dirs_byte_identical(dir_a, dir_b, diff);
  report(10, "rerun-byte-identical", same,
         same ? "two independent pipeline runs emit identical bytes" : diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_root = argc > 1 ? argv[1] : "acceptance_cache";
  std::filesystem::create_directories(out_root);
  try {
    criterion_lambert();
    criterion_queue_oracle();
    criterion_backprop();
    criterion_tabular_q();
    ExperimentSpec spec = desk_spec(out_root);
    criterion_fig4(spec);
    criterion_qos_sweeps(spec);
    criterion_arrival_sweep(spec);
    criterion_joint_optimality();
    criterion_reduction_identity(spec);
    criterion_rerun_identical(out_root);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: criteria failed");
  return g_failures == 0 ? 0 : 1;
}
