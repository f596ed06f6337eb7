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


#include "icu_sepsis/builder.h"
#include "icu_sepsis/errors.h"
#include "icu_sepsis/simulator.h"

namespace icu_sepsis {

TrajectoryDataset synthesize_dataset(const TabularMdp& truth, const Policy& pi,
                                     int n_episodes, uint64_t seed,
                                     int max_steps, int* truncated) {
  if (n_episodes < 0) throw UsageError("n_episodes must be non-negative");
  if (pi.n_states() != truth.n_states || pi.n_actions() != truth.n_actions) {
    throw UsageError("policy shape does not match the MDP");
  }
  std::vector<StateId> label(static_cast<size_t>(truth.n_states), -1);
  StateId next_label = 0;
  for (StateId s : truth.live_states()) label[static_cast<size_t>(s)] = next_label++;

  const Simulator sim(truth);
  const Rng base(seed);
  TrajectoryDataset data;
  data.episodes.reserve(static_cast<size_t>(n_episodes));
  int cut = 0;
  for (int i = 0; i < n_episodes; ++i) {
    Rng rng = base.split(static_cast<uint64_t>(i));
    Episode ep;
    StateId s = sim.reset(rng);
    bool done = false;
    while (static_cast<int>(ep.steps.size()) < max_steps) {
      const ActionId a = sample_from_row(pi.row(s), rng.uniform());
      const Transition t = sim.step(s, a, rng);
      ep.steps.push_back({label[static_cast<size_t>(s)], a, t.reward});
      if (t.terminated) {
        ep.survived = t.next_state == truth.survival_state;
        done = true;
        break;
      }
      s = t.next_state;
      if (s == truth.absorbing_state) {
        throw DataError("live state transitions straight to the absorbing state");
      }
    }
    if (done) {
      data.episodes.push_back(std::move(ep));
    } else {
      ++cut;
    }
  }
  if (truncated != nullptr) *truncated = cut;
  return data;
}

}  // namespace icu_sepsis
