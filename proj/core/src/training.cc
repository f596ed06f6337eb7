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
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "icu_sepsis/agents.h"
#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"

namespace icu_sepsis {

void LearningCurve::add(const EpisodeResult& r) {
  returns.push_back(r.ret);
  lengths.push_back(r.length);
  truncated.push_back(r.truncated ? 1 : 0);
}

LearningCurve train(const Simulator& sim, const AgentConfig& cfg_in, int episodes,
                    uint64_t seed, int max_steps, Policy* final_policy) {
  if (episodes < 0) throw UsageError("episodes must be non-negative");
  if (max_steps < 1) throw UsageError("max_steps must be at least 1");
  AgentConfig cfg = cfg_in;
  if (cfg.total_steps == 0) {
    cfg.total_steps = std::max<int64_t>(1, int64_t{episodes} * kStepsPerEpisodeGuess);
  }
  const TabularMdp& mdp = sim.mdp();
  auto agent = make_agent(cfg, EnvSpec::of(mdp), seed);
  Rng env(seed, 0);
  Rng act(seed, 1);

  LearningCurve curve;
  curve.agent = to_string(cfg.algorithm);
  curve.seed = seed;
  curve.returns.reserve(static_cast<size_t>(episodes));
  curve.lengths.reserve(static_cast<size_t>(episodes));
  curve.truncated.reserve(static_cast<size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeResult r;
    StateId s = sim.reset(env);
    double discount = 1.0;
    while (true) {
      const ActionId a = agent->select_action(s, act);
      Transition t = sim.step(s, a, env);
      ++r.length;
      r.ret += discount * t.reward;
      discount *= mdp.gamma;
      if (!t.terminated && r.length >= max_steps) t.truncated = true;
      agent->observe(t);
      if (t.terminated || t.truncated) {
        r.truncated = t.truncated;
        break;
      }
      s = t.next_state;
    }
    agent->end_episode();
    curve.add(r);
  }
  if (final_policy != nullptr) *final_policy = agent->policy();
  return curve;
}

LearningCurve run_fixed_policy(const Simulator& sim, const Policy& pi, int episodes,
                               uint64_t seed, int max_steps, const std::string& name) {
  if (episodes < 0) throw UsageError("episodes must be non-negative");
  LearningCurve curve;
  curve.agent = name;
  curve.seed = seed;
  Rng env(seed, 0);
  Rng act(seed, 1);
  const TabularMdp& mdp = sim.mdp();
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeResult r;
    StateId s = sim.reset(env);
    double discount = 1.0;
    while (true) {
      const ActionId a = sample_from_row(pi.row(s), act.uniform());
      const Transition t = sim.step(s, a, env);
      ++r.length;
      r.ret += discount * t.reward;
      discount *= mdp.gamma;
      if (t.terminated) break;
      if (r.length >= max_steps) {
        r.truncated = true;
        break;
      }
      s = t.next_state;
    }
    curve.add(r);
  }
  return curve;
}

void parallel_for(size_t n, int workers, const std::function<void(size_t)>& task) {
  if (n == 0) return;
  size_t threads = workers > 0 ? static_cast<size_t>(workers)
                               : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads == 1) {
    for (size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<LearningCurve> train_seeds(const Simulator& sim, const AgentConfig& cfg,
                                       int episodes, const std::vector<uint64_t>& seeds,
                                       int workers, int max_steps) {
  std::vector<LearningCurve> curves(seeds.size());
  parallel_for(seeds.size(), workers, [&](size_t i) {
    curves[i] = train(sim, cfg, episodes, seeds[i], max_steps);
  });
  return curves;
}

}  // namespace icu_sepsis
