#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "massim/mdp.hpp"
#include "massim/mlp.hpp"
#include "massim/rng.hpp"

namespace massim {

struct Experience {
  AgentState state;
  int action = 0;
  double reward = 0.0;
  AgentState next_state;
};

// Fixed-capacity ring buffer; oldest entries evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  }

  void push(Experience e) {
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(e));
    } else {
      entries_[cursor_] = std::move(e);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& operator[](std::size_t i) const { return entries_[i]; }

  // Uniform sample with replacement; rejects requests the store cannot fill.
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const {
    if (entries_.size() < batch_size)
      throw std::runtime_error("ReplayBuffer: fewer stored entries than batch size");
    std::vector<const Experience*> batch(batch_size);
    for (auto& p : batch) p = &entries_[rng.uniform_int(static_cast<int>(entries_.size()))];
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Experience> entries_;
};

inline int argmax_lowest_index(const std::vector<double>& values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// Listen-before-talk argmax for cellular devices: subchannels whose busy flag
// is set in the observation (the first num_subchannels state components) are
// excluded from the transmit actions. Collided transmitters vanish from the
// assignment, so without carrier sensing two links that pick the same
// subchannel read it as free again and retry it forever. If every subchannel
// is flagged the sensing rule is void and the plain argmax applies; D2D pairs
// never mask (sharing a subchannel is ordinary interference for them).
// A link that holds queued deadline traffic never chooses to idle: staying
// silent guarantees a missed deadline while any transmission has a chance, so
// the work-conserving rule (must_transmit) drops the idle action whenever at
// least one transmit action is admissible.
inline int argmax_sensing(const std::vector<double>& q, const AgentState& state,
                          bool cellular, int num_subchannels, int num_power_levels,
                          bool must_transmit = false, int prev_subchannel = -1,
                          double stay_bonus = 0.0) {
  bool any_free = false;
  for (int n = 0; n < num_subchannels && !any_free; ++n)
    if (state[n] < 0.5) any_free = true;
  const bool mask = cellular && any_free;
  // Decision inertia: actions that keep last slot's subchannel (at any power)
  // earn stay_bonus, damping best-response channel churn.
  auto value = [&](int a) {
    return q[a] + (a != 0 && (a - 1) / num_power_levels == prev_subchannel ? stay_bonus : 0.0);
  };
  int best = -1;
  for (int a = 0; a < static_cast<int>(q.size()); ++a) {
    if (a == 0 && must_transmit) continue;
    if (a != 0 && mask && state[(a - 1) / num_power_levels] >= 0.5) continue;
    if (best < 0 || value(a) > value(best)) best = a;
  }
  return best;
}

// Squared-TD loss over a batch:
//   mean_i [ r_i + gamma * max_a' Q_target(s'_i, a') - Q(s_i, a_i) ]^2
// The bootstrapped target is held fixed; gradient flows only through Q(s, a).
// Pass the net itself as target for the faithful single-network form.
inline double td_loss(const Mlp& net, const Mlp& target_net,
                      const std::vector<const Experience*>& batch, double gamma,
                      Mlp::Grad& grad) {
  if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
  grad.zero_like(net);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Mlp::ForwardCache cache;
  std::vector<double> d_out(net.output_dim());
  for (const Experience* e : batch) {
    std::vector<double> q_next = target_net.forward(e->next_state);
    double target = e->reward + gamma * q_next[argmax_lowest_index(q_next)];
    std::vector<double> q = net.forward_cached(e->state, cache);
    double diff = q[e->action] - target;
    loss += diff * diff * inv_n;
    std::fill(d_out.begin(), d_out.end(), 0.0);
    d_out[e->action] = 2.0 * diff * inv_n;
    net.backward(cache, d_out, grad);
  }
  return loss;
}

// Plain gradient descent step on the loss (no momentum or adaptivity).
inline void sgd_step(Mlp& net, const Mlp::Grad& grad, double beta) {
  net.apply_gradient(grad, beta);
  if (!net.finite())
    throw std::runtime_error("sgd_step: network parameters diverged (NaN/Inf)");
}

// Epsilon-greedy action selection; greedy ties break toward the lowest index.
inline AgentAction select_action(const Mlp& net, const AgentState& state, double epsilon,
                                 Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon)
    return {rng.uniform_int(net.output_dim())};
  return {argmax_lowest_index(net.forward(state))};
}

// Tabular Q-learning reference.
class QTable {
 public:
  QTable(int num_states, int num_actions)
      : num_states_(num_states), num_actions_(num_actions),
        q_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {}

  double& at(int s, int a) { return q_[s * num_actions_ + a]; }
  double at(int s, int a) const { return q_[s * num_actions_ + a]; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double max_q(int s) const {
    double best = at(s, 0);
    for (int a = 1; a < num_actions_; ++a) best = std::max(best, at(s, a));
    return best;
  }

  int argmax(int s) const {
    int best = 0;
    for (int a = 1; a < num_actions_; ++a)
      if (at(s, a) > at(s, best)) best = a;
    return best;
  }

  // Q(s,a) += alpha * [r + gamma * max_a' Q(s',a') - Q(s,a)]
  void update(int s, int a, double r, int s_next, double alpha, double gamma) {
    at(s, a) += alpha * (r + gamma * max_q(s_next) - at(s, a));
  }

 private:
  int num_states_, num_actions_;
  std::vector<double> q_;
};

}  // namespace massim
