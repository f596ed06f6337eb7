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


#include <benchmark/benchmark.h>

#include "icu_sepsis/agents.h"
#include "icu_sepsis/harness.h"
#include "icu_sepsis/io.h"
#include "icu_sepsis/simulator.h"
#include "icu_sepsis/solvers.h"

namespace icu_sepsis {
namespace {

const TabularMdp& official() {
  static const TabularMdp mdp =
      load_mdp(MdpFileBundle::in_directory(ICU_SEPSIS_DATA_DIR));
  return mdp;
}

void BM_ValueIteration(benchmark::State& state) {
  const TabularMdp& mdp = official();
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(mdp).J);
}
BENCHMARK(BM_ValueIteration)->Unit(benchmark::kMillisecond);

void BM_ExactEvaluation(benchmark::State& state) {
  const TabularMdp& mdp = official();
  const Policy pi = Policy::uniform(mdp.n_states, mdp.n_actions);
  for (auto _ : state) benchmark::DoNotOptimize(policy_evaluation_exact(mdp, pi).J);
}
BENCHMARK(BM_ExactEvaluation)->Unit(benchmark::kMillisecond);

void BM_SimulatorStep(benchmark::State& state) {
  const Simulator sim(official());
  Rng rng(1);
  StateId s = sim.reset(rng);
  for (auto _ : state) {
    const Transition t = sim.step(s, static_cast<ActionId>(rng.uniform_int(25)), rng);
    s = t.terminated ? sim.reset(rng) : t.next_state;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorStep);

// Environment steps per second while training, one episode per iteration.
void BM_AgentEpisode(benchmark::State& state) {
  const auto algorithm = static_cast<Algorithm>(state.range(0));
  const Simulator sim(official());
  AgentConfig cfg = AgentConfig::defaults(algorithm);
  cfg.total_steps = 100000;
  cfg.learning_starts = std::min<int64_t>(cfg.learning_starts, 1000);
  auto agent = make_agent(cfg, EnvSpec::of(sim.mdp()), 1);
  Rng env(2), act(3);
  int64_t steps = 0;
  for (auto _ : state) {
    StateId s = sim.reset(env);
    for (int k = 0; k < kDefaultMaxSteps; ++k, ++steps) {
      const Transition t = sim.step(s, agent->select_action(s, act), env);
      agent->observe(t);
      if (t.terminated) break;
      s = t.next_state;
    }
    agent->end_episode();
  }
  state.SetItemsProcessed(steps);
  state.SetLabel(to_string(algorithm));
}
BENCHMARK(BM_AgentEpisode)
    ->DenseRange(static_cast<int>(Algorithm::kSarsa), static_cast<int>(Algorithm::kPpo));

}  // namespace
}  // namespace icu_sepsis

BENCHMARK_MAIN();
