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


#include "icu_sepsis/agents.h"

#include <algorithm>
#include <cmath>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {

Agent::Agent(const AgentConfig& cfg, const EnvSpec& spec) : cfg_(cfg), spec_(spec) {
  cfg_.check();
  if (spec.n_states < 1 || spec.n_actions < 1) {
    throw UsageError("agent needs at least one state and one action");
  }
}

DenseMatrix Agent::q_table() {
  throw UsageError(std::string(to_string(cfg_.algorithm)) +
                   " agent has no action-value table");
}

void Agent::check_transition(const Transition& t) const {
  if (t.state == spec_.absorbing_state) {
    throw UsageError("observe after the absorbing state: episode already over");
  }
  if (t.state < 0 || t.state >= spec_.n_states || t.next_state < 0 ||
      t.next_state >= spec_.n_states || t.action < 0 ||
      t.action >= spec_.n_actions) {
    throw UsageError("transition ids out of range");
  }
}

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, const EnvSpec& spec,
                                  uint64_t seed) {
  switch (cfg.algorithm) {
    case Algorithm::kSarsa:
    case Algorithm::kQLearning:
      return std::make_unique<TabularTdAgent>(cfg, spec);
    case Algorithm::kDqn:
      return std::make_unique<DqnAgent>(cfg, spec, seed);
    case Algorithm::kSac:
      return std::make_unique<SacAgent>(cfg, spec, seed);
    case Algorithm::kPpo:
      return std::make_unique<PpoAgent>(cfg, spec, seed);
  }
  throw UsageError("unknown algorithm");
}

double epsilon_at(const AgentConfig& cfg, int64_t step) {
  const double duration =
      cfg.exploration_fraction * static_cast<double>(cfg.total_steps);
  if (duration <= 0.0) return cfg.eps_end;
  const double slope = (cfg.eps_end - cfg.eps_start) / duration;
  return std::max(slope * static_cast<double>(step) + cfg.eps_start, cfg.eps_end);
}

ActionId argmax_first(std::span<const double> values) {
  return static_cast<ActionId>(std::max_element(values.begin(), values.end()) -
                               values.begin());
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
}

void log_softmax(std::span<const double> logits, std::span<double> logp) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  for (size_t i = 0; i < logits.size(); ++i) logp[i] = logits[i] - lse;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw UsageError("replay buffer capacity must be positive");
  data_.reserve(std::min<size_t>(capacity, 1 << 20));
}

void ReplayBuffer::add(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<size_t> ReplayBuffer::sample(size_t batch, Rng& rng) const {
  if (data_.empty()) throw UsageError("sampling from an empty replay buffer");
  std::vector<size_t> idx(batch);
  for (size_t& i : idx) i = static_cast<size_t>(rng.uniform_int(data_.size()));
  return idx;
}

}  // namespace icu_sepsis
