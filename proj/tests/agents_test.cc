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


#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.h"
#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"
#include "icu_sepsis/simulator.h"

namespace icu_sepsis {
namespace {

using testing::bandit_mdp;
using testing::random_mdp;

AgentConfig greedy_sgd(Algorithm algorithm, double lr) {
  AgentConfig c = AgentConfig::defaults(algorithm);
  c.optimizer = OptimizerKind::kSgd;
  c.learning_rate = lr;
  c.eps_start = 0.0;
  c.eps_end = 0.0;
  return c;
}

Transition tr(StateId s, ActionId a, double r, StateId next, bool done) {
  Transition t;
  t.state = s;
  t.action = a;
  t.reward = r;
  t.next_state = next;
  t.terminated = done;
  return t;
}

// Best-hyperparameter table for the five agents.
TEST(AgentConfig, DefaultsMatchTunedTable) {
  const AgentConfig q = AgentConfig::defaults(Algorithm::kQLearning);
  EXPECT_EQ(q.optimizer, OptimizerKind::kAdam);
  EXPECT_DOUBLE_EQ(q.learning_rate, 0.0025);
  EXPECT_EQ(q.buffer_size, 1);
  EXPECT_EQ(q.batch_size, 1);
  EXPECT_DOUBLE_EQ(q.eps_start, 1.0);
  EXPECT_DOUBLE_EQ(q.eps_end, 0.001);
  EXPECT_DOUBLE_EQ(q.exploration_fraction, 0.1);
  EXPECT_DOUBLE_EQ(q.gamma, 1.0);

  const AgentConfig s = AgentConfig::defaults(Algorithm::kSarsa);
  EXPECT_DOUBLE_EQ(s.learning_rate, 0.0025);
  EXPECT_DOUBLE_EQ(s.exploration_fraction, 0.25);
  EXPECT_DOUBLE_EQ(s.eps_end, 0.001);

  const AgentConfig d = AgentConfig::defaults(Algorithm::kDqn);
  EXPECT_DOUBLE_EQ(d.learning_rate, 0.001);
  EXPECT_EQ(d.buffer_size, 10000);
  EXPECT_EQ(d.batch_size, 64);
  EXPECT_DOUBLE_EQ(d.exploration_fraction, 0.25);
  EXPECT_EQ(d.learning_starts, 10000);
  EXPECT_EQ(d.train_frequency, 10);
  EXPECT_DOUBLE_EQ(d.tau, 0.01);
  EXPECT_EQ(d.target_update_frequency, 512);

  const AgentConfig p = AgentConfig::defaults(Algorithm::kPpo);
  EXPECT_DOUBLE_EQ(p.learning_rate, 0.005);
  EXPECT_EQ(p.num_steps, 500);
  EXPECT_EQ(p.num_minibatches, 1);
  EXPECT_DOUBLE_EQ(p.gae_lambda, 0.4);
  EXPECT_EQ(p.update_epochs, 6);
  EXPECT_TRUE(p.norm_adv);
  EXPECT_DOUBLE_EQ(p.clip_coef, 0.5);
  EXPECT_FALSE(p.clip_vloss);
  EXPECT_DOUBLE_EQ(p.ent_coef, 0.005);
  EXPECT_DOUBLE_EQ(p.vf_coef, 0.3);
  EXPECT_DOUBLE_EQ(p.max_grad_norm, 0.4);
  EXPECT_DOUBLE_EQ(p.target_kl, 0.001);

  const AgentConfig c = AgentConfig::defaults(Algorithm::kSac);
  EXPECT_DOUBLE_EQ(c.policy_lr, 0.025);
  EXPECT_DOUBLE_EQ(c.q_lr, 0.025);
  EXPECT_EQ(c.buffer_size, 10000);
  EXPECT_EQ(c.batch_size, 64);
  EXPECT_EQ(c.learning_starts, 10000);
  EXPECT_DOUBLE_EQ(c.tau, 0.01);
  EXPECT_EQ(c.target_update_frequency, 500);
  EXPECT_EQ(c.update_frequency, 1);
  EXPECT_DOUBLE_EQ(c.alpha, 0.25);
  EXPECT_FALSE(c.autotune);
  EXPECT_DOUBLE_EQ(c.target_entropy_scale, 0.2);
}

TEST(AgentConfig, TextRoundTrip) {
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning, Algorithm::kDqn,
                      Algorithm::kSac, Algorithm::kPpo}) {
    AgentConfig c = AgentConfig::defaults(a);
    c.set("learning_rate", "0.0123");
    c.set("norm_adv", "false");
    c.set("optimizer", "sgd");
    const AgentConfig back = AgentConfig::from_text(c.to_text());
    EXPECT_EQ(back.to_map(), c.to_map());
    EXPECT_EQ(back.algorithm, a);
  }
}

TEST(AgentConfig, RejectsBadInput) {
  AgentConfig c;
  EXPECT_THROW(c.set("no_such_key", "1"), UsageError);
  EXPECT_THROW(c.set("batch_size", "abc"), UsageError);
  EXPECT_THROW(parse_algorithm("a2c"), UsageError);
  c.gamma = 1.5;
  EXPECT_THROW(c.check(), UsageError);
  EXPECT_EQ(parse_algorithm(to_string(Algorithm::kDqn)), Algorithm::kDqn);
}

TEST(Agents, EpsilonSchedule) {
  AgentConfig c;
  c.total_steps = 1000;
  c.exploration_fraction = 0.1;
  EXPECT_DOUBLE_EQ(epsilon_at(c, 0), 1.0);
  EXPECT_NEAR(epsilon_at(c, 50), 1.0 + 0.5 * (0.001 - 1.0), 1e-12);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 100), 0.001);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 100000), 0.001);
}

TEST(Agents, SoftmaxHelpers) {
  std::vector<double> z(25, 0.0), p(25), lp(25);
  z[0] = 1.0;
  softmax(z, p);
  EXPECT_NEAR(p[0], std::exp(1.0) / (std::exp(1.0) + 24.0), 1e-15);
  log_softmax(z, lp);
  for (size_t i = 0; i < 25; ++i) EXPECT_NEAR(std::exp(lp[i]), p[i], 1e-15);
  const std::vector<double> big{1000.0, 999.0};
  std::vector<double> q(2);
  softmax(big, q);
  EXPECT_NEAR(q[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_EQ(argmax_first(std::vector<double>{0.1, 0.3, 0.3}), 1);
}

TEST(QLearning, HandComputedUpdates) {
  auto agent = make_agent(greedy_sgd(Algorithm::kQLearning, 0.5), {4, 2, 3}, 0);
  agent->observe(tr(0, 1, 1.0, 2, true));
  DenseMatrix q = agent->q_table();
  EXPECT_DOUBLE_EQ(q(0, 1), 0.5);
  // Bootstrapped: target 0 + max_a q(0, a) = 0.5, from q(1, 0) = 0.
  agent->observe(tr(1, 0, 0.0, 0, false));
  q = agent->q_table();
  EXPECT_DOUBLE_EQ(q(1, 0), 0.25);
  EXPECT_EQ(argmax_first(agent->policy().row(0)), 1);
}

TEST(Sarsa, RepeatedTerminalUpdates) {
  auto agent = make_agent(greedy_sgd(Algorithm::kSarsa, 0.1), {4, 2, 3}, 0);
  for (int i = 0; i < 100; ++i) agent->observe(tr(0, 0, 1.0, 2, true));
  EXPECT_NEAR(agent->q_table()(0, 0), 1.0 - std::pow(0.9, 100), 1e-12);
}

TEST(Sarsa, BootstrapsFromChosenAction) {
  auto agent = make_agent(greedy_sgd(Algorithm::kSarsa, 0.5), {4, 2, 3}, 0);
  Rng rng(1);
  agent->observe(tr(1, 1, 1.0, 2, true));  // q(1, 1) = 0.5
  agent->observe(tr(0, 0, 0.0, 1, false));
  EXPECT_DOUBLE_EQ(agent->q_table()(0, 0), 0.0);  // deferred
  EXPECT_THROW(agent->observe(tr(1, 1, 0.0, 0, false)), UsageError);
  EXPECT_EQ(agent->select_action(1, rng), 1);
  EXPECT_DOUBLE_EQ(agent->q_table()(0, 0), 0.25);
}

TEST(Sarsa, EndEpisodeFlushesPendingUpdate) {
  auto agent = make_agent(greedy_sgd(Algorithm::kSarsa, 0.5), {4, 2, 3}, 0);
  agent->observe(tr(1, 0, 1.0, 2, true));  // q(1, 0) = 0.5
  agent->observe(tr(0, 1, 0.0, 1, false));
  agent->end_episode();
  EXPECT_DOUBLE_EQ(agent->q_table()(0, 1), 0.25);
}

TEST(Agents, TruncationBootstrapFlag) {
  AgentConfig c = greedy_sgd(Algorithm::kQLearning, 1.0);
  auto agent = make_agent(c, {4, 1, 3}, 0);
  agent->observe(tr(1, 0, 1.0, 2, true));  // q(1, 0) = 1
  Transition cut = tr(0, 0, 0.0, 1, false);
  cut.truncated = true;
  agent->observe(cut);
  EXPECT_DOUBLE_EQ(agent->q_table()(0, 0), 1.0);
  c.bootstrap_truncated = false;
  auto plain = make_agent(c, {4, 1, 3}, 0);
  plain->observe(tr(1, 0, 1.0, 2, true));
  plain->observe(cut);
  EXPECT_DOUBLE_EQ(plain->q_table()(0, 0), 0.0);
}

TEST(Agents, InitialPolicies) {
  const EnvSpec spec{6, 25, 5};
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning, Algorithm::kDqn}) {
    auto agent = make_agent(AgentConfig::defaults(a), spec, 0);
    const Policy pi = agent->policy();
    for (StateId s = 0; s < 6; ++s) EXPECT_EQ(argmax_first(pi.row(s)), 0);
  }
  for (Algorithm a : {Algorithm::kSac, Algorithm::kPpo}) {
    auto agent = make_agent(AgentConfig::defaults(a), spec, 0);
    const Policy pi = agent->policy();
    for (StateId s = 0; s < 6; ++s) {
      for (ActionId b = 0; b < 25; ++b) EXPECT_NEAR(pi(s, b), 1.0 / 25, 1e-15);
    }
  }
  EXPECT_THROW(make_agent(AgentConfig::defaults(Algorithm::kPpo), spec, 0)->q_table(),
               UsageError);
}

TEST(Agents, FullExplorationIsUniform) {
  AgentConfig c = AgentConfig::defaults(Algorithm::kQLearning);
  c.eps_end = 1.0;
  auto agent = make_agent(c, {4, 5, 3}, 0);
  Rng rng(7);
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[static_cast<size_t>(agent->select_action(0, rng))];
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(n), 0.2, 0.006);
}

TEST(Agents, RejectsTransitionsOutOfAbsorbing) {
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning, Algorithm::kDqn,
                      Algorithm::kSac, Algorithm::kPpo}) {
    auto agent = make_agent(AgentConfig::defaults(a), {4, 2, 3}, 0);
    EXPECT_THROW(agent->observe(tr(3, 0, 0.0, 3, false)), UsageError);
    EXPECT_THROW(agent->observe(tr(0, 2, 0.0, 1, true)), UsageError);
  }
}

TEST(ReplayBuffer, RingOverwritesOldest) {
  ReplayBuffer b(3);
  for (int i = 0; i < 5; ++i) b.add(tr(i, 0, 0.0, 0, false));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].state, 3);
  EXPECT_EQ(b[1].state, 4);
  EXPECT_EQ(b[2].state, 2);
  Rng rng(3);
  for (size_t i : b.sample(100, rng)) EXPECT_LT(i, 3u);
  EXPECT_THROW(ReplayBuffer(1).sample(1, rng), UsageError);
}

// With a one-slot buffer, batch 1, hard target copies every step and SGD,
// DQN performs exactly the Q-learning update.
TEST(Dqn, ReducesToQLearning) {
  Rng mrng(11);
  const TabularMdp mdp = random_mdp(6, 3, mrng);
  const Simulator sim(mdp);
  AgentConfig q = AgentConfig::defaults(Algorithm::kQLearning);
  q.optimizer = OptimizerKind::kSgd;
  q.learning_rate = 0.2;
  q.total_steps = 5000;
  AgentConfig d = q;
  d.algorithm = Algorithm::kDqn;
  d.buffer_size = 1;
  d.batch_size = 1;
  d.learning_starts = 0;
  d.train_frequency = 1;
  d.tau = 1.0;
  d.target_update_frequency = 1;
  const EnvSpec spec = EnvSpec::of(mdp);
  auto qa = make_agent(q, spec, 1);
  auto da = make_agent(d, spec, 1);
  Rng env(5), act_q(6), act_d(6);
  int steps = 0;
  while (steps < 10000) {
    StateId s = sim.reset(env);
    for (int k = 0; k < 200 && steps < 10000; ++k, ++steps) {
      const ActionId a = qa->select_action(s, act_q);
      ASSERT_EQ(da->select_action(s, act_d), a);
      const Transition t = sim.step(s, a, env);
      qa->observe(t);
      da->observe(t);
      if (t.terminated) break;
      s = t.next_state;
    }
  }
  const DenseMatrix a = qa->q_table();
  const DenseMatrix b = da->q_table();
  for (size_t i = 0; i < a.values.size(); ++i) EXPECT_DOUBLE_EQ(a.values[i], b.values[i]);
}

// ---------------------------------------------------------------------------
// Gradients against central finite differences.

double fd(const std::function<double(const std::vector<double>&)>& f,
          std::vector<double> x, size_t i, double h = 1e-6) {
  x[i] += h;
  const double up = f(x);
  x[i] -= 2 * h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

TEST(Sac, ActorLossGradient) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 2 + rng.uniform_int(6);
    std::vector<double> z(n), q(n), g(n);
    for (size_t a = 0; a < n; ++a) {
      z[a] = 2.0 * rng.normal();
      q[a] = rng.uniform();
    }
    if (trial % 4 == 0) z[0] = -40.0;  // under the log floor
    const double alpha = 0.05 + rng.uniform();
    sac_actor_loss(z, q, alpha, g);
    auto f = [&](const std::vector<double>& x) {
      std::vector<double> tmp(n);
      return sac_actor_loss(x, q, alpha, tmp);
    };
    for (size_t a = 0; a < n; ++a) {
      const double num = fd(f, z, a);
      EXPECT_NEAR(g[a], num, 1e-6 * std::max(1.0, std::abs(num))) << trial << "/" << a;
    }
  }
}

// Minimizing the actor loss drives pi to softmax(q / alpha), or to the
// best action when alpha = 0.
TEST(Sac, ActorLossFixpoints) {
  const std::vector<double> q{0.2, 0.5, 0.4};
  for (double alpha : {0.0, 0.3}) {
    std::vector<double> z(3, 0.0), g(3), pi(3);
    for (int it = 0; it < 200000; ++it) {
      sac_actor_loss(z, q, alpha, g);
      for (size_t a = 0; a < 3; ++a) z[a] -= 5.0 * g[a];
    }
    softmax(z, pi);
    if (alpha == 0.0) {
      EXPECT_GT(pi[1], 0.99);
    } else {
      double norm = 0.0;
      for (double x : q) norm += std::exp(x / alpha);
      for (size_t a = 0; a < 3; ++a) EXPECT_NEAR(pi[a], std::exp(q[a] / alpha) / norm, 1e-6);
    }
  }
}

TEST(Ppo, LossGradientMatchesFiniteDifferences) {
  Rng rng(31);
  const int n_s = 4, n_a = 3;
  for (bool clip_vloss : {false, true}) {
    for (bool norm_adv : {false, true}) {
      AgentConfig cfg = AgentConfig::defaults(Algorithm::kPpo);
      cfg.clip_vloss = clip_vloss;
      cfg.norm_adv = norm_adv;
      cfg.clip_coef = 0.2;
      std::vector<double> logits(n_s * n_a), values(n_s);
      for (double& z : logits) z = 0.5 * rng.normal();
      for (double& v : values) v = rng.uniform();
      std::vector<PpoSample> batch(6);
      for (PpoSample& b : batch) {
        b.state = static_cast<StateId>(rng.uniform_int(n_s));
        b.action = static_cast<ActionId>(rng.uniform_int(n_a));
        b.old_logprob = std::log(1.0 / n_a) + 0.3 * rng.normal();
        b.advantage = rng.normal();
        b.ret = rng.uniform();
        b.old_value = rng.uniform();
      }
      const PpoLoss l = ppo_loss_and_grad(cfg, n_a, logits, values, batch);
      auto f_logits = [&](const std::vector<double>& x) {
        return ppo_loss_and_grad(cfg, n_a, x, values, batch).loss;
      };
      auto f_values = [&](const std::vector<double>& x) {
        return ppo_loss_and_grad(cfg, n_a, logits, x, batch).loss;
      };
      for (size_t i = 0; i < logits.size(); ++i) {
        EXPECT_NEAR(l.grad_logits[i], fd(f_logits, logits, i), 1e-6);
      }
      for (size_t i = 0; i < values.size(); ++i) {
        EXPECT_NEAR(l.grad_values[i], fd(f_values, values, i), 1e-6);
      }
    }
  }
}

// At ratio 1 with a single sample the policy term is the REINFORCE gradient
// -A * d log pi(a) / dz.
TEST(Ppo, SingleSampleIsReinforce) {
  AgentConfig cfg = AgentConfig::defaults(Algorithm::kPpo);
  cfg.ent_coef = 0.0;
  const std::vector<double> logits{0.1, -0.3, 0.7};
  const std::vector<double> values{0.0};
  std::vector<double> pi(3);
  softmax(logits, pi);
  const PpoSample s{0, 2, std::log(pi[2]), 1.7, 0.0, 0.0};
  const PpoLoss l = ppo_loss_and_grad(cfg, 3, logits, values, std::span(&s, 1));
  for (size_t a = 0; a < 3; ++a) {
    EXPECT_NEAR(l.grad_logits[a], -1.7 * ((a == 2 ? 1.0 : 0.0) - pi[a]), 1e-12);
  }
  EXPECT_NEAR(l.approx_kl, 0.0, 1e-15);
}

TEST(Ppo, GaeByHand) {
  std::vector<Transition> ro{tr(0, 0, 0.0, 1, false), tr(1, 0, 1.0, 2, true),
                             tr(0, 0, 0.0, 1, false)};
  const std::vector<double> v{0.5, 0.6, 0.5};
  const std::vector<double> nv{0.6, 0.0, 0.6};
  const double g = 0.9, lam = 0.4;
  const std::vector<double> adv = gae_advantages(ro, v, nv, g, lam);
  const double d2 = 0.0 + g * 0.6 - 0.5;
  const double d1 = 1.0 - 0.6;
  const double d0 = 0.0 + g * 0.6 - 0.5;
  EXPECT_NEAR(adv[2], d2, 1e-15);
  EXPECT_NEAR(adv[1], d1, 1e-15);
  EXPECT_NEAR(adv[0], d0 + g * lam * d1, 1e-15);
}

// ---------------------------------------------------------------------------
// Whole-agent properties on a small random model.

AgentConfig quick(Algorithm a) {
  AgentConfig c = AgentConfig::defaults(a);
  c.learning_starts = std::min<int64_t>(c.learning_starts, 200);
  c.num_steps = 64;
  c.total_steps = 5000;
  return c;
}

TEST(AgentsProperty, TrainingIsDeterministicAndPoliciesAreDistributions) {
  Rng mrng(41);
  const TabularMdp mdp = random_mdp(8, 4, mrng);
  const Simulator sim(mdp);
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning, Algorithm::kDqn,
                      Algorithm::kSac, Algorithm::kPpo}) {
    Policy p1, p2;
    const LearningCurve c1 = train(sim, quick(a), 400, 9, 200, &p1);
    const LearningCurve c2 = train(sim, quick(a), 400, 9, 200, &p2);
    EXPECT_EQ(c1.returns, c2.returns) << to_string(a);
    EXPECT_EQ(c1.lengths, c2.lengths);
    EXPECT_EQ(p1, p2);
    EXPECT_NO_THROW(p1.check(1e-9)) << to_string(a);
    for (double r : c1.returns) EXPECT_TRUE(r == 0.0 || r == 1.0);
  }
}

TEST(AgentsProperty, SgdQValuesStayInUnitInterval) {
  Rng mrng(43);
  const TabularMdp mdp = random_mdp(8, 4, mrng);
  const Simulator sim(mdp);
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning}) {
    AgentConfig c = quick(a);
    c.optimizer = OptimizerKind::kSgd;
    c.learning_rate = 0.3;
    auto agent = make_agent(c, EnvSpec::of(mdp), 0);
    Rng env(1), act(2);
    for (int ep = 0; ep < 2000; ++ep) {
      StateId s = sim.reset(env);
      for (int k = 0; k < 200; ++k) {
        const Transition t = sim.step(s, agent->select_action(s, act), env);
        agent->observe(t);
        if (t.terminated) break;
        s = t.next_state;
      }
      agent->end_episode();
    }
    for (double q : agent->q_table().values) {
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
    }
  }
}

TEST(Ppo, UpdatesOncePerRollout) {
  AgentConfig c = AgentConfig::defaults(Algorithm::kPpo);
  c.num_steps = 10;
  PpoAgent agent(c, {4, 2, 3}, 0);
  Rng rng(0);
  for (int i = 0; i < 35; ++i) {
    agent.select_action(0, rng);
    agent.observe(tr(0, i % 2, i % 2, i % 2 ? 2 : 1, true));
  }
  EXPECT_EQ(agent.updates(), 3);
  EXPECT_GE(agent.last_epochs(), 1);
  EXPECT_LE(agent.last_epochs(), c.update_epochs);
  // Action 1 always survived, so its probability went up.
  EXPECT_GT(agent.policy()(0, 1), 0.5);
}

TEST(Sac, UsesRandomActionsBeforeLearningStarts) {
  AgentConfig c = AgentConfig::defaults(Algorithm::kSac);
  c.learning_starts = 5;
  c.batch_size = 4;
  SacAgent agent(c, {4, 2, 3}, 0);
  Rng rng(0);
  const std::vector<double> before = agent.parameters();
  for (int i = 0; i < 5; ++i) agent.observe(tr(0, 1, 1.0, 2, true));
  EXPECT_EQ(agent.parameters(), before);
  agent.observe(tr(0, 1, 1.0, 2, true));
  EXPECT_NE(agent.parameters(), before);
  EXPECT_DOUBLE_EQ(agent.alpha(), 0.25);
  EXPECT_NEAR(agent.target_entropy(), 0.2 * std::log(2.0), 1e-15);
}

}  // namespace
}  // namespace icu_sepsis
