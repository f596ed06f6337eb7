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


#include <algorithm>
#include <map>

#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {

DqnAgent::DqnAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed)
    : Agent(cfg, spec),
      q_(static_cast<size_t>(spec.n_states) * spec.n_actions,
         optimizer_settings(cfg, cfg.learning_rate)),
      target_(q_.size(), 0.0),
      buffer_(static_cast<size_t>(cfg.buffer_size)),
      rng_(seed, 2),
      row_(static_cast<size_t>(spec.n_actions)) {}

ActionId DqnAgent::select_action(StateId s, Rng& rng) {
  if (rng.uniform() < epsilon_at(cfg_, env_steps_)) {
    return static_cast<ActionId>(rng.uniform_int(static_cast<uint64_t>(spec_.n_actions)));
  }
  q_.read(static_cast<size_t>(s) * spec_.n_actions, row_);
  return argmax_first(row_);
}

void DqnAgent::observe(const Transition& t) {
  check_transition(t);
  ++env_steps_;
  buffer_.add(t);
  if (env_steps_ <= cfg_.learning_starts) return;
  if (env_steps_ % cfg_.train_frequency == 0) train();
  if (env_steps_ % cfg_.target_update_frequency == 0) {
    const std::vector<double> online = q_.snapshot();
    for (size_t i = 0; i < target_.size(); ++i) {
      target_[i] = cfg_.tau * online[i] + (1.0 - cfg_.tau) * target_[i];
    }
  }
}

void DqnAgent::train() {
  const auto idx = buffer_.sample(static_cast<size_t>(cfg_.batch_size), rng_);
  const auto n_a = static_cast<size_t>(spec_.n_actions);
  const double scale = 1.0 / static_cast<double>(idx.size());
  // Loss 0.5 * mean (q(s, a) - y)^2; duplicates in the batch add up.
  std::map<size_t, double> grad;
  for (size_t k : idx) {
    const Transition& t = buffer_[k];
    const bool done = t.terminated || (t.truncated && !cfg_.bootstrap_truncated);
    double y = t.reward;
    if (!done) {
      const double* row = target_.data() + static_cast<size_t>(t.next_state) * n_a;
      y += cfg_.gamma * *std::max_element(row, row + n_a);
    }
    const size_t i = static_cast<size_t>(t.state) * n_a + t.action;
    grad[i] += (q_.get(i) - y) * scale;
  }
  std::vector<size_t> index;
  std::vector<double> values;
  for (const auto& [i, g] : grad) {
    index.push_back(i);
    values.push_back(g);
  }
  q_.step(index, values);
}

Policy DqnAgent::policy() {
  std::vector<ActionId> greedy(static_cast<size_t>(spec_.n_states));
  for (StateId s = 0; s < spec_.n_states; ++s) {
    q_.read(static_cast<size_t>(s) * spec_.n_actions, row_);
    greedy[static_cast<size_t>(s)] = argmax_first(row_);
  }
  return Policy::deterministic(spec_.n_actions, greedy);
}

std::vector<double> DqnAgent::parameters() {
  std::vector<double> out = q_.snapshot();
  out.insert(out.end(), target_.begin(), target_.end());
  return out;
}

DenseMatrix DqnAgent::q_table() {
  DenseMatrix q(spec_.n_states, spec_.n_actions);
  q.values = q_.snapshot();
  return q;
}

}  // namespace icu_sepsis
