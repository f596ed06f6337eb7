// Copyright 2026 The ICU-Sepsis Engine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Tabular learning agents. Every table holds one parameter per (state,
// action) or per state; "gradient step" means the exact gradient of the
// algorithm's loss with respect to those parameters, applied by ParamTable.
//
// Driving loop, per episode:
//   a = agent.select_action(s, rng); t = env.step(s, a); agent.observe(t);
//   ... until t.terminated or the step cap; then agent.end_episode().

#ifndef ICU_SEPSIS_AGENTS_H_
#define ICU_SEPSIS_AGENTS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "icu_sepsis/agent_config.h"
#include "icu_sepsis/mdp.h"
#include "icu_sepsis/optimizer.h"
#include "icu_sepsis/policy.h"
#include "icu_sepsis/rng.h"
#include "icu_sepsis/simulator.h"

namespace icu_sepsis {

struct EnvSpec {
  int n_states = 0;
  int n_actions = 0;
  StateId absorbing_state = -1;  // observe() rejects transitions from it

  static EnvSpec of(const TabularMdp& mdp) {
    return {mdp.n_states, mdp.n_actions, mdp.absorbing_state};
  }
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual ActionId select_action(StateId s, Rng& rng) = 0;
  // Throws UsageError for a transition out of the absorbing state.
  virtual void observe(const Transition& t) = 0;
  virtual void end_episode() {}

  // Greedy policy for value-based agents, the current softmax policy for
  // policy-based ones.
  virtual Policy policy() = 0;
  // Every learnable parameter, flattened; for determinism checks.
  virtual std::vector<double> parameters() = 0;
  // Action-value table (the first critic for SAC). Throws UsageError for
  // agents without one.
  virtual DenseMatrix q_table();

  const AgentConfig& config() const { return cfg_; }
  const EnvSpec& spec() const { return spec_; }
  int64_t env_steps() const { return env_steps_; }

 protected:
  Agent(const AgentConfig& cfg, const EnvSpec& spec);
  void check_transition(const Transition& t) const;

  AgentConfig cfg_;
  EnvSpec spec_;
  int64_t env_steps_ = 0;  // transitions observed so far
};

// Creates the agent named by cfg.algorithm. `seed` drives the agent's own
// randomness (replay sampling, minibatch shuffles); action sampling uses the
// Rng passed to select_action.
std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, const EnvSpec& spec,
                                  uint64_t seed);

// Linear decay from eps_start to eps_end over exploration_fraction *
// total_steps environment steps, then flat.
double epsilon_at(const AgentConfig& cfg, int64_t step);

// Index of the first maximum.
ActionId argmax_first(std::span<const double> values);

// Softmax with the max subtracted; log-probabilities from log-sum-exp.
void softmax(std::span<const double> logits, std::span<double> probs);
void log_softmax(std::span<const double> logits, std::span<double> logp);

// Fixed-capacity ring of transitions with uniform sampling (with
// replacement) over the current contents.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void add(const Transition& t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& operator[](size_t i) const { return data_[i]; }
  std::vector<size_t> sample(size_t batch, Rng& rng) const;

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

// ---------------------------------------------------------------------------

// Q-learning and Sarsa share the table and the exploration rule.
class TabularTdAgent : public Agent {
 public:
  TabularTdAgent(const AgentConfig& cfg, const EnvSpec& spec);

  ActionId select_action(StateId s, Rng& rng) override;
  void observe(const Transition& t) override;
  void end_episode() override;
  Policy policy() override;
  std::vector<double> parameters() override { return q_.snapshot(); }
  DenseMatrix q_table() override;

 private:
  double max_q(StateId s);
  void td_update(StateId s, ActionId a, double target);

  bool sarsa_;
  ParamTable q_;
  std::optional<Transition> pending_;  // Sarsa waits for the next action
  std::vector<double> row_;
};

class DqnAgent : public Agent {
 public:
  DqnAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed);

  ActionId select_action(StateId s, Rng& rng) override;
  void observe(const Transition& t) override;
  Policy policy() override;
  std::vector<double> parameters() override;
  DenseMatrix q_table() override;

 private:
  void train();

  ParamTable q_;
  std::vector<double> target_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::vector<double> row_;
};

class SacAgent : public Agent {
 public:
  SacAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed);

  ActionId select_action(StateId s, Rng& rng) override;
  void observe(const Transition& t) override;
  Policy policy() override;
  std::vector<double> parameters() override;
  DenseMatrix q_table() override;

  double alpha() const { return alpha_; }
  double target_entropy() const { return target_entropy_; }

 private:
  void train();

  ParamTable q1_, q2_, logits_, log_alpha_;
  std::vector<double> target1_, target2_;
  ReplayBuffer buffer_;
  Rng rng_;
  double alpha_;
  double target_entropy_;
};

// Actor loss of discrete SAC for one state,
//   L(z) = sum_a pi_a (alpha * log pi_a - q_a),  pi = softmax(z),
// with log pi floored at log(1e-12). Writes dL/dz into grad and returns L.
double sac_actor_loss(std::span<const double> logits, std::span<const double> q,
                      double alpha, std::span<double> grad);

// ---------------------------------------------------------------------------
// PPO

struct PpoSample {
  StateId state = 0;
  ActionId action = 0;
  double old_logprob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
  double old_value = 0.0;
};

struct PpoLoss {
  double loss = 0.0;
  double pg_loss = 0.0;
  double v_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  std::vector<double> grad_logits;  // n_states * n_actions
  std::vector<double> grad_values;  // n_states
};

// Loss and exact gradient of the clipped PPO objective on one minibatch
//   loss = pg_loss - ent_coef * entropy + vf_coef * v_loss
// with advantages normalized inside the minibatch when cfg.norm_adv is set.
// logits is n_states x n_actions row-major, values has n_states entries.
PpoLoss ppo_loss_and_grad(const AgentConfig& cfg, int n_actions,
                          std::span<const double> logits,
                          std::span<const double> values,
                          std::span<const PpoSample> batch);

// GAE(lambda) over a rollout. values[t] = V(s_t) and next_values[t] = V(s'_t)
// (zero when the transition terminated). An episode boundary (terminated or
// truncated) stops the recursion.
std::vector<double> gae_advantages(std::span<const Transition> rollout,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   double gamma, double lambda);

class PpoAgent : public Agent {
 public:
  PpoAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed);

  ActionId select_action(StateId s, Rng& rng) override;
  void observe(const Transition& t) override;
  Policy policy() override;
  std::vector<double> parameters() override;

  int updates() const { return updates_; }
  // Epochs run in the most recent update (fewer than update_epochs after a
  // KL early stop).
  int last_epochs() const { return last_epochs_; }

 private:
  void update();
  void read_row(StateId s, std::span<double> out);

  ParamTable logits_;
  ParamTable values_;
  std::vector<Transition> rollout_;
  Rng rng_;
  int updates_ = 0;
  int last_epochs_ = 0;
};

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_AGENTS_H_
