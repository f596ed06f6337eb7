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

#ifndef ICU_SEPSIS_DATASET_H_
#define ICU_SEPSIS_DATASET_H_

#include <cstddef>
#include <vector>

#include "icu_sepsis/mdp.h"

namespace icu_sepsis {

// One decision point of a recorded trajectory.
struct Step {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
  bool operator==(const Step&) const = default;
};

// A patient trajectory. Rewards are zero except the last step, which is 1
// when the patient survived; the outcome decides which terminal state the
// final transition enters.
struct Episode {
  std::vector<Step> steps;
  bool survived = false;
  bool operator==(const Episode&) const = default;
};

struct TrajectoryDataset {
  std::vector<Episode> episodes;

  size_t total_steps() const;
  bool operator==(const TrajectoryDataset&) const = default;
};

// Throws DataError on an empty episode, a nonzero reward before the final
// step, a final reward that disagrees with the outcome flag, or ids outside
// [0, n_states) x [0, n_actions) when those bounds are positive.
void check_dataset(const TrajectoryDataset& data, int n_states = 0,
                   int n_actions = 0);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_DATASET_H_
