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
#include <numeric>

#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {

PpoLoss ppo_loss_and_grad(const AgentConfig& cfg, int n_actions,
                          std::span<const double> logits,
                          std::span<const double> values,
                          std::span<const PpoSample> batch) {
  const auto n_a = static_cast<size_t>(n_actions);
  if (batch.empty()) throw UsageError("empty PPO minibatch");
  if (logits.size() != values.size() * n_a) {
    throw UsageError("logit and value tables disagree on the state count");
  }
  PpoLoss out;
  out.grad_logits.assign(logits.size(), 0.0);
  out.grad_values.assign(values.size(), 0.0);
  const double m = static_cast<double>(batch.size());

  std::vector<double> adv(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) adv[i] = batch[i].advantage;
  if (cfg.norm_adv && batch.size() > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / m;
    double ss = 0.0;
    for (double a : adv) ss += (a - mean) * (a - mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  const double c = cfg.clip_coef;
  std::vector<double> logp(n_a), pi(n_a);
  for (size_t i = 0; i < batch.size(); ++i) {
    const PpoSample& b = batch[i];
    const size_t base = static_cast<size_t>(b.state) * n_a;
    log_softmax(logits.subspan(base, n_a), logp);
    for (size_t a = 0; a < n_a; ++a) pi[a] = std::exp(logp[a]);
    const double logratio = logp[static_cast<size_t>(b.action)] - b.old_logprob;
    const double ratio = std::exp(logratio);
    out.approx_kl += ((ratio - 1.0) - logratio) / m;
    if (std::abs(ratio - 1.0) > c) out.clip_fraction += 1.0 / m;

    // Clipped surrogate.
    const double pg1 = -adv[i] * ratio;
    const double pg2 = -adv[i] * std::clamp(ratio, 1.0 - c, 1.0 + c);
    out.pg_loss += std::max(pg1, pg2) / m;
    double* g = out.grad_logits.data() + base;
    if (pg1 >= pg2) {
      const double w = -adv[i] * ratio / m;
      for (size_t a = 0; a < n_a; ++a) {
        g[a] += w * ((a == static_cast<size_t>(b.action) ? 1.0 : 0.0) - pi[a]);
      }
    }

    // Entropy bonus.
    double h = 0.0;
    for (size_t a = 0; a < n_a; ++a) h -= pi[a] * logp[a];
    out.entropy += h / m;
    for (size_t a = 0; a < n_a; ++a) {
      g[a] += cfg.ent_coef * pi[a] * (logp[a] + h) / m;
    }

    // Value loss.
    const double v = values[static_cast<size_t>(b.state)];
    const double unclipped = (v - b.ret) * (v - b.ret);
    double dv = v - b.ret;
    double li = unclipped;
    if (cfg.clip_vloss) {
      const double vc = b.old_value + std::clamp(v - b.old_value, -c, c);
      const double clipped = (vc - b.ret) * (vc - b.ret);
      if (clipped > unclipped) {
        li = clipped;
        dv = std::abs(v - b.old_value) < c ? vc - b.ret : 0.0;
      }
    }
    out.v_loss += 0.5 * li / m;
    out.grad_values[static_cast<size_t>(b.state)] += cfg.vf_coef * dv / m;
  }
  out.loss = out.pg_loss - cfg.ent_coef * out.entropy + cfg.vf_coef * out.v_loss;
  return out;
}

std::vector<double> gae_advantages(std::span<const Transition> rollout,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   double gamma, double lambda) {
  const size_t n = rollout.size();
  std::vector<double> adv(n, 0.0);
  double running = 0.0;
  for (size_t k = n; k-- > 0;) {
    const Transition& t = rollout[k];
    const double delta = t.reward + gamma * next_values[k] - values[k];
    const bool boundary = t.terminated || t.truncated;
    running = delta + (boundary ? 0.0 : gamma * lambda * running);
    adv[k] = running;
  }
  return adv;
}

PpoAgent::PpoAgent(const AgentConfig& cfg, const EnvSpec& spec, uint64_t seed)
    : Agent(cfg, spec),
      logits_(static_cast<size_t>(spec.n_states) * spec.n_actions,
              optimizer_settings(cfg, cfg.learning_rate)),
      values_(static_cast<size_t>(spec.n_states),
              optimizer_settings(cfg, cfg.learning_rate)),
      rng_(seed, 2) {
  rollout_.reserve(static_cast<size_t>(cfg.num_steps));
}

void PpoAgent::read_row(StateId s, std::span<double> out) {
  logits_.read(static_cast<size_t>(s) * spec_.n_actions, out);
}

ActionId PpoAgent::select_action(StateId s, Rng& rng) {
  std::vector<double> z(static_cast<size_t>(spec_.n_actions));
  std::vector<double> pi(z.size());
  read_row(s, z);
  softmax(z, pi);
  return sample_from_row(pi, rng.uniform());
}

void PpoAgent::observe(const Transition& t) {
  check_transition(t);
  ++env_steps_;
  rollout_.push_back(t);
  if (static_cast<int>(rollout_.size()) >= cfg_.num_steps) update();
}

void PpoAgent::update() {
  const size_t n = rollout_.size();
  const auto n_a = static_cast<size_t>(spec_.n_actions);
  std::vector<double> logits = logits_.snapshot();
  std::vector<double> values = values_.snapshot();

  std::vector<double> v(n), nv(n);
  for (size_t k = 0; k < n; ++k) {
    const Transition& t = rollout_[k];
    v[k] = values[static_cast<size_t>(t.state)];
    const bool bootstrap = !t.terminated && (!t.truncated || cfg_.bootstrap_truncated);
    nv[k] = bootstrap ? values[static_cast<size_t>(t.next_state)] : 0.0;
  }
  const std::vector<double> adv =
      gae_advantages(rollout_, v, nv, cfg_.gamma, cfg_.gae_lambda);

  std::vector<PpoSample> samples(n);
  std::vector<double> logp(n_a);
  for (size_t k = 0; k < n; ++k) {
    const Transition& t = rollout_[k];
    log_softmax(std::span<const double>(logits).subspan(
                    static_cast<size_t>(t.state) * n_a, n_a),
                logp);
    samples[k] = {t.state, t.action, logp[static_cast<size_t>(t.action)], adv[k],
                  adv[k] + v[k], v[k]};
  }

  const size_t mb = std::max<size_t>(1, n / static_cast<size_t>(cfg_.num_minibatches));
  std::vector<size_t> order(n);
  std::vector<PpoSample> batch;
  last_epochs_ = 0;
  for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
    ++last_epochs_;
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(rng_.uniform_int(i))]);
    }
    double approx_kl = 0.0;
    for (size_t start = 0; start < n; start += mb) {
      batch.clear();
      for (size_t k = start; k < std::min(n, start + mb); ++k) {
        batch.push_back(samples[order[k]]);
      }
      PpoLoss loss = ppo_loss_and_grad(cfg_, spec_.n_actions, logits, values, batch);
      approx_kl = loss.approx_kl;
      double sq = 0.0;
      for (double g : loss.grad_logits) sq += g * g;
      for (double g : loss.grad_values) sq += g * g;
      const double norm = std::sqrt(sq);
      const double clip = cfg_.max_grad_norm / (norm + 1e-6);
      if (clip < 1.0) {
        for (double& g : loss.grad_logits) g *= clip;
        for (double& g : loss.grad_values) g *= clip;
      }
      logits_.step_dense(loss.grad_logits);
      values_.step_dense(loss.grad_values);
      logits = logits_.snapshot();
      values = values_.snapshot();
    }
    if (cfg_.target_kl > 0.0 && approx_kl > cfg_.target_kl) break;
  }
  ++updates_;
  rollout_.clear();
}

Policy PpoAgent::policy() {
  Policy pi(spec_.n_states, spec_.n_actions);
  std::vector<double> z(static_cast<size_t>(spec_.n_actions));
  for (StateId s = 0; s < spec_.n_states; ++s) {
    read_row(s, z);
    softmax(z, pi.mutable_row(s));
  }
  return pi;
}

std::vector<double> PpoAgent::parameters() {
  std::vector<double> out = logits_.snapshot();
  const std::vector<double> v = values_.snapshot();
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace icu_sepsis
