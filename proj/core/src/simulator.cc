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

#include "icu_sepsis/simulator.h"

#include <algorithm>
#include <string>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {

CategoricalSampler::CategoricalSampler(std::span<const double> probs) {
  long double running = 0.0L;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    running += probs[i];
    index_.push_back(static_cast<int>(i));
    cumulative_.push_back(running);
  }
  if (index_.empty()) throw DataError("cannot sample from an all-zero row");
}

int CategoricalSampler::sample(double u) const {
  // First bucket whose cumulative mass exceeds u; equivalent to a linear scan.
  const long double key = u;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), key);
  if (it == cumulative_.end()) return index_.back();
  return index_[static_cast<size_t>(it - cumulative_.begin())];
}

int sample_from_row(std::span<const double> probs, double u) {
  long double running = 0.0L;
  int last = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    running += probs[i];
    last = static_cast<int>(i);
    if (static_cast<long double>(u) < running) return last;
  }
  if (last < 0) throw DataError("cannot sample from an all-zero row");
  return last;
}

Simulator::Simulator(const TabularMdp& mdp)
    : mdp_(&mdp), initial_(mdp.initial_dist) {
  rows_.reserve(static_cast<size_t>(mdp.n_states) * mdp.n_actions);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      rows_.emplace_back(mdp.row(s, a));
    }
  }
}

StateId Simulator::reset(Rng& rng) const { return initial_.sample(rng); }

Transition Simulator::step(StateId s, ActionId a, Rng& rng) const {
  const TabularMdp& m = *mdp_;
  if (s < 0 || s >= m.n_states) {
    throw UsageError("state " + std::to_string(s) + " out of range");
  }
  if (s == m.absorbing_state) {
    throw UsageError("step from the absorbing state: episode already over");
  }
  if (a < 0 || a >= m.n_actions) {
    throw UsageError("action " + std::to_string(a) + " out of range");
  }
  Transition t;
  t.state = s;
  t.action = a;
  t.next_state = rows_[static_cast<size_t>(s) * m.n_actions + a].sample(rng);
  t.reward = m.reward_by_state[static_cast<size_t>(t.next_state)];
  t.terminated =
      t.next_state == m.survival_state || t.next_state == m.death_state;
  return t;
}

EpisodeResult Simulator::run_episode(const Policy& pi, Rng& rng,
                                     int max_steps) const {
  if (max_steps < 1) throw UsageError("max_steps must be at least 1");
  EpisodeResult result;
  StateId s = reset(rng);
  double discount = 1.0;
  const double gamma = mdp_->gamma;
  while (result.length < max_steps) {
    const ActionId a = sample_from_row(pi.row(s), rng.uniform());
    const Transition t = step(s, a, rng);
    result.ret += discount * t.reward;
    discount *= gamma;
    ++result.length;
    if (t.terminated) return result;
    s = t.next_state;
    if (s == mdp_->absorbing_state) return result;
  }
  result.truncated = true;
  return result;
}

}  // namespace icu_sepsis
