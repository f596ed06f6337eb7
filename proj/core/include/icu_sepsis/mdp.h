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

#ifndef ICU_SEPSIS_MDP_H_
#define ICU_SEPSIS_MDP_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace icu_sepsis {

using StateId = int;
using ActionId = int;

// Row-major dense matrix of doubles.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<size_t>(r) * c, fill) {}

  std::span<const double> row(int r) const {
    return {values.data() + static_cast<size_t>(r) * cols,
            static_cast<size_t>(cols)};
  }
  std::span<double> row(int r) {
    return {values.data() + static_cast<size_t>(r) * cols,
            static_cast<size_t>(cols)};
  }
  double& operator()(int r, int c) {
    return values[static_cast<size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return values[static_cast<size_t>(r) * cols + c];
  }
  bool operator==(const DenseMatrix&) const = default;
};

// Where the model came from; persisted in the bundle metadata file.
struct MdpProvenance {
  std::optional<int> tau;
  std::string source = "unspecified";    // "builder", "loaded", "perturbed", ...
  std::string admissible_source = "explicit";  // "explicit" or "heuristic"
  bool operator==(const MdpProvenance&) const = default;
};

// A finite episodic MDP over integer states and actions.
//
// transitions[s][a][s'] is stored densely as (s * n_actions + a) * n_states +
// s', which is also the row order of the transition CSV table. Rewards are
// earned on entering a state. The three bookkeeping states (survival, death,
// absorbing) are ordinary state ids; survival and death lead to absorbing with
// probability one, and absorbing loops on itself.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transitions;
  std::vector<double> reward_by_state;
  std::vector<double> initial_dist;
  // Sorted, duplicate-free action ids per state.
  std::vector<std::vector<ActionId>> admissible;
  StateId survival_state = -1;
  StateId death_state = -1;
  StateId absorbing_state = -1;
  double gamma = 1.0;
  std::optional<DenseMatrix> centroids;
  MdpProvenance provenance;

  size_t row_offset(StateId s, ActionId a) const {
    return (static_cast<size_t>(s) * n_actions + a) * n_states;
  }
  std::span<const double> row(StateId s, ActionId a) const {
    return {transitions.data() + row_offset(s, a),
            static_cast<size_t>(n_states)};
  }
  std::span<double> mutable_row(StateId s, ActionId a) {
    return {transitions.data() + row_offset(s, a),
            static_cast<size_t>(n_states)};
  }
  double p(StateId s, ActionId a, StateId next) const {
    return transitions[row_offset(s, a) + next];
  }

  // Survival, death, or absorbing.
  bool is_terminal(StateId s) const {
    return s == survival_state || s == death_state || s == absorbing_state;
  }
  bool is_admissible(StateId s, ActionId a) const;

  // Non-terminal states in ascending order.
  std::vector<StateId> live_states() const;

  // Allocates a zero tensor with every other field default-initialized.
  static TabularMdp zeros(int n_states, int n_actions);
};

// Replaces each inadmissible row of every live state with the arithmetic mean
// of that state's admissible rows, accumulated in extended precision.
void fill_inadmissible_rows(TabularMdp& mdp);

// Forces survival/death rows to absorbing and the absorbing self-loop for every
// action, and sets reward 1 on survival and 0 elsewhere.
void attach_terminal_rows(TabularMdp& mdp);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_MDP_H_
