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

#ifndef ICU_SEPSIS_POLICY_H_
#define ICU_SEPSIS_POLICY_H_

#include <span>
#include <vector>

#include "icu_sepsis/mdp.h"

namespace icu_sepsis {

// State-conditional action distribution over all n_actions actions.
class Policy {
 public:
  Policy() = default;
  Policy(int n_states, int n_actions);  // all zeros; fill before use

  static Policy uniform(int n_states, int n_actions);
  // Point mass on actions[s] for each state.
  static Policy deterministic(int n_actions, std::span<const ActionId> actions);
  static Policy from_matrix(const DenseMatrix& probs);

  int n_states() const { return probs_.rows; }
  int n_actions() const { return probs_.cols; }

  std::span<const double> row(StateId s) const { return probs_.row(s); }
  std::span<double> mutable_row(StateId s) { return probs_.row(s); }
  double operator()(StateId s, ActionId a) const { return probs_(s, a); }
  double& operator()(StateId s, ActionId a) { return probs_(s, a); }

  const DenseMatrix& matrix() const { return probs_; }

  // Throws DataError unless every row is a distribution (entries >= 0, sum 1
  // within `tolerance`).
  void check(double tolerance = 1e-9) const;

  bool operator==(const Policy&) const = default;

 private:
  DenseMatrix probs_;
};

// Moves all mass on inadmissible actions onto the admissible set of each
// state, split equally; admissible mass stays in place. Terminal states are
// copied unchanged. Throws DataError for a state with inadmissible mass and an
// empty admissible set.
Policy project_policy(const TabularMdp& mdp, const Policy& pi);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_POLICY_H_
