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

#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {
TabularTdAgent::TabularTdAgent(const AgentConfig& cfg, const EnvSpec& spec)
    : Agent(cfg, spec),
      sarsa_(cfg.algorithm == Algorithm::kSarsa),
      q_(static_cast<size_t>(spec.n_states) * spec.n_actions,
         optimizer_settings(cfg, cfg.learning_rate)),
      row_(static_cast<size_t>(spec.n_actions)) {}

ActionId TabularTdAgent::select_action(StateId s, Rng& rng) {
  ActionId a;
  if (rng.uniform() < epsilon_at(cfg_, env_steps_)) {
    a = static_cast<ActionId>(rng.uniform_int(static_cast<uint64_t>(spec_.n_actions)));
  } else {
    q_.read(static_cast<size_t>(s) * spec_.n_actions, row_);
    a = argmax_first(row_);
  }
  if (pending_) {
    // Sarsa: the deferred update bootstraps from the action just chosen.
    const Transition t = *pending_;
    pending_.reset();
    const double next_q = q_.get(static_cast<size_t>(s) * spec_.n_actions + a);
    td_update(t.state, t.action, t.reward + cfg_.gamma * next_q);
  }
  return a;
}

void TabularTdAgent::observe(const Transition& t) {
  check_transition(t);
  if (pending_) throw UsageError("observe called twice without select_action");
  ++env_steps_;
  if (t.terminated) {
    td_update(t.state, t.action, t.reward);
    return;
  }
  if (t.truncated) {
    td_update(t.state, t.action,
              cfg_.bootstrap_truncated ? t.reward + cfg_.gamma * max_q(t.next_state)
                                       : t.reward);
    return;
  }
  if (sarsa_) {
    pending_ = t;
  } else {
    td_update(t.state, t.action, t.reward + cfg_.gamma * max_q(t.next_state));
  }
}

void TabularTdAgent::end_episode() {
  if (!pending_) return;
  // Episode cut without a truncation flag: bootstrap from the greedy value.
  const Transition t = *pending_;
  pending_.reset();
  td_update(t.state, t.action, t.reward + cfg_.gamma * max_q(t.next_state));
}

double TabularTdAgent::max_q(StateId s) {
  q_.read(static_cast<size_t>(s) * spec_.n_actions, row_);
  return *std::max_element(row_.begin(), row_.end());
}

void TabularTdAgent::td_update(StateId s, ActionId a, double target) {
  const size_t i = static_cast<size_t>(s) * spec_.n_actions + a;
  // Loss 0.5 * (q - target)^2.
  const double grad = q_.get(i) - target;
  q_.step(std::span<const size_t>(&i, 1), std::span<const double>(&grad, 1));
}

Policy TabularTdAgent::policy() {
  std::vector<ActionId> greedy(static_cast<size_t>(spec_.n_states));
  for (StateId s = 0; s < spec_.n_states; ++s) {
    q_.read(static_cast<size_t>(s) * spec_.n_actions, row_);
    greedy[static_cast<size_t>(s)] = argmax_first(row_);
  }
  return Policy::deterministic(spec_.n_actions, greedy);
}

DenseMatrix TabularTdAgent::q_table() {
  DenseMatrix q(spec_.n_states, spec_.n_actions);
  q.values = q_.snapshot();
  return q;
}

}  // namespace icu_sepsis
