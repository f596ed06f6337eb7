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

#ifndef ICU_SEPSIS_SIMULATOR_H_
#define ICU_SEPSIS_SIMULATOR_H_

#include <span>
#include <vector>

#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"
#include "icu_sepsis/rng.h"

namespace icu_sepsis {

inline constexpr int kDefaultMaxSteps = 5000;

struct Transition {
  StateId state = -1;
  ActionId action = -1;
  double reward = 0.0;
  StateId next_state = -1;
  bool terminated = false;  // next_state is survival or death
  bool truncated = false;   // episode cut by the step cap
};

struct EpisodeResult {
  double ret = 0.0;
  int length = 0;
  bool truncated = false;
};

// Inverse-CDF sampler over a fixed probability vector. Cumulative sums are
// accumulated in long double over ascending indices; the last nonzero bucket
// absorbs any residual mass, so every u in [0, 1) maps to a support index.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(std::span<const double> probs);

  int sample(double u) const;
  int sample(Rng& rng) const { return sample(rng.uniform()); }

 private:
  std::vector<int> index_;
  std::vector<long double> cumulative_;
};

// Episode engine over an immutable MDP. Holds one sampler per (s, a) row plus
// the initial distribution; safe to share across threads, each of which owns
// its Rng. The MDP must outlive the simulator.
class Simulator {
 public:
  explicit Simulator(const TabularMdp& mdp);

  const TabularMdp& mdp() const { return *mdp_; }

  StateId reset(Rng& rng) const;

  // Throws UsageError when s is the absorbing state or a is out of range.
  // Inadmissible actions are served by their stored (averaged) row.
  Transition step(StateId s, ActionId a, Rng& rng) const;

  // reset + steps under pi until survival/death is entered or max_steps
  // actions have been taken.
  EpisodeResult run_episode(const Policy& pi, Rng& rng,
                            int max_steps = kDefaultMaxSteps) const;

 private:
  const TabularMdp* mdp_;
  CategoricalSampler initial_;
  std::vector<CategoricalSampler> rows_;
};

// Inverse-CDF draw from a short probability row (a policy row), scanning
// ascending indices with a long double running sum.
int sample_from_row(std::span<const double> probs, double u);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_SIMULATOR_H_
