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
#include <cmath>
#include <map>

#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {
namespace {

const double kLogFloor = std::log(1e-12);

}  // namespace

double sac_actor_loss(std::span<const double> logits, std::span<const double> q,
                      double alpha, std::span<double> grad) {
  const size_t n = logits.size();
  std::vector<double> logp(n), pi(n);
  log_softmax(logits, logp);
  double loss = 0.0;
  double unfloored_mass = 0.0;
  for (size_t a = 0; a < n; ++a) {
    pi[a] = std::exp(logp[a]);
    const bool floored = logp[a] < kLogFloor;
    if (!floored) unfloored_mass += pi[a];
    loss += pi[a] * (alpha * std::max(logp[a], kLogFloor) - q[a]);
  }
  for (size_t b = 0; b < n; ++b) {
    const double f = alpha * std::max(logp[b], kLogFloor) - q[b];
    const double open = logp[b] < kLogFloor ? 0.0 : 1.0;
    grad[b] = pi[b] * (f - loss) + alpha * pi[b] * (open - unfloored_mass);
  }
  return loss;
}

SacAgent::SacAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed)
    : Agent(cfg, spec),
      q1_(static_cast<size_t>(spec.n_states) * spec.n_actions,
          optimizer_settings(cfg, cfg.q_lr)),
      q2_(q1_.size(), optimizer_settings(cfg, cfg.q_lr)),
      logits_(q1_.size(), optimizer_settings(cfg, cfg.policy_lr)),
      log_alpha_(1, optimizer_settings(cfg, cfg.q_lr)),
      target1_(q1_.size(), 0.0),
      target2_(q1_.size(), 0.0),
      buffer_(static_cast<size_t>(cfg.buffer_size)),
      rng_(seed, 2),
      alpha_(cfg.autotune ? 1.0 : cfg.alpha),
      target_entropy_(cfg.target_entropy_scale *
                      std::log(static_cast<double>(spec.n_actions))) {}

ActionId SacAgent::select_action(StateId s, Rng& rng) {
  const auto n_a = static_cast<size_t>(spec_.n_actions);
  if (env_steps_ < cfg_.learning_starts) {
    return static_cast<ActionId>(rng.uniform_int(n_a));
  }
  std::vector<double> z(n_a), pi(n_a);
  logits_.read(static_cast<size_t>(s) * n_a, z);
  softmax(z, pi);
  return sample_from_row(pi, rng.uniform());
}

void SacAgent::observe(const Transition& t) {
  check_transition(t);
  ++env_steps_;
  buffer_.add(t);
  if (env_steps_ <= cfg_.learning_starts) return;
  if (env_steps_ % cfg_.update_frequency == 0) train();
  if (env_steps_ % cfg_.target_update_frequency == 0) {
    const std::vector<double> a = q1_.snapshot();
    const std::vector<double> b = q2_.snapshot();
    for (size_t i = 0; i < a.size(); ++i) {
      target1_[i] = cfg_.tau * a[i] + (1.0 - cfg_.tau) * target1_[i];
      target2_[i] = cfg_.tau * b[i] + (1.0 - cfg_.tau) * target2_[i];
    }
  }
}

void SacAgent::train() {
  const auto idx = buffer_.sample(static_cast<size_t>(cfg_.batch_size), rng_);
  const auto n_a = static_cast<size_t>(spec_.n_actions);
  const double scale = 1.0 / static_cast<double>(idx.size());
  std::vector<double> z(n_a), logp(n_a);

  // Critics: soft target from the target tables.
  std::map<size_t, double> g1, g2;
  for (size_t k : idx) {
    const Transition& t = buffer_[k];
    const bool done = t.terminated || (t.truncated && !cfg_.bootstrap_truncated);
    double y = t.reward;
    if (!done) {
      const size_t base = static_cast<size_t>(t.next_state) * n_a;
      logits_.read(base, z);
      log_softmax(z, logp);
      double soft = 0.0;
      for (size_t a = 0; a < n_a; ++a) {
        const double m = std::min(target1_[base + a], target2_[base + a]);
        soft += std::exp(logp[a]) * (m - alpha_ * std::max(logp[a], kLogFloor));
      }
      y += cfg_.gamma * soft;
    }
    const size_t i = static_cast<size_t>(t.state) * n_a + t.action;
    g1[i] += (q1_.get(i) - y) * scale;
    g2[i] += (q2_.get(i) - y) * scale;
  }
  auto apply = [](ParamTable& table, const std::map<size_t, double>& g) {
    std::vector<size_t> index;
    std::vector<double> values;
    for (const auto& [i, v] : g) {
      index.push_back(i);
      values.push_back(v);
    }
    table.step(index, values);
  };
  apply(q1_, g1);
  apply(q2_, g2);

  // Actor and temperature, against the updated critics.
  std::map<size_t, double> ga;
  std::vector<double> q(n_a), grad(n_a);
  double alpha_grad = 0.0;
  for (size_t k : idx) {
    const size_t base = static_cast<size_t>(buffer_[k].state) * n_a;
    logits_.read(base, z);
    for (size_t a = 0; a < n_a; ++a) q[a] = std::min(q1_.get(base + a), q2_.get(base + a));
    sac_actor_loss(z, q, alpha_, grad);
    for (size_t a = 0; a < n_a; ++a) ga[base + a] += grad[a] * scale;
    if (cfg_.autotune) {
      log_softmax(z, logp);
      double s = 0.0;
      for (size_t a = 0; a < n_a; ++a) {
        s += std::exp(logp[a]) * (std::max(logp[a], kLogFloor) + target_entropy_);
      }
      alpha_grad -= s * scale;
    }
  }
  apply(logits_, ga);
  if (cfg_.autotune) {
    const size_t zero = 0;
    log_alpha_.step(std::span<const size_t>(&zero, 1),
                    std::span<const double>(&alpha_grad, 1));
    alpha_ = std::exp(log_alpha_.get(0));
  }
}

Policy SacAgent::policy() {
  const auto n_a = static_cast<size_t>(spec_.n_actions);
  Policy pi(spec_.n_states, spec_.n_actions);
  std::vector<double> z(n_a);
  for (StateId s = 0; s < spec_.n_states; ++s) {
    logits_.read(static_cast<size_t>(s) * n_a, z);
    softmax(z, pi.mutable_row(s));
  }
  return pi;
}

std::vector<double> SacAgent::parameters() {
  std::vector<double> out = q1_.snapshot();
  for (const auto& part : {q2_.snapshot(), logits_.snapshot(), target1_, target2_}) {
    out.insert(out.end(), part.begin(), part.end());
  }
  out.push_back(alpha_);
  return out;
}

DenseMatrix SacAgent::q_table() {
  DenseMatrix q(spec_.n_states, spec_.n_actions);
  q.values = q1_.snapshot();
  return q;
}

}  // namespace icu_sepsis
