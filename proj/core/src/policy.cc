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

#include "icu_sepsis/policy.h"

#include <cmath>
#include <string>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {

Policy::Policy(int n_states, int n_actions) : probs_(n_states, n_actions) {}

Policy Policy::uniform(int n_states, int n_actions) {
  Policy pi;
  pi.probs_ = DenseMatrix(n_states, n_actions, 1.0 / n_actions);
  return pi;
}

Policy Policy::deterministic(int n_actions, std::span<const ActionId> actions) {
  Policy pi(static_cast<int>(actions.size()), n_actions);
  for (size_t s = 0; s < actions.size(); ++s) {
    const ActionId a = actions[s];
    if (a < 0 || a >= n_actions) throw UsageError("action id out of range");
    pi.probs_(static_cast<int>(s), a) = 1.0;
  }
  return pi;
}

Policy Policy::from_matrix(const DenseMatrix& probs) {
  Policy pi;
  pi.probs_ = probs;
  return pi;
}

void Policy::check(double tolerance) const {
  for (int s = 0; s < probs_.rows; ++s) {
    double sum = 0.0;
    for (double p : probs_.row(s)) {
      if (!(p >= 0.0)) {
        throw DataError("policy row " + std::to_string(s) +
                        " has a negative or NaN entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw DataError("policy row " + std::to_string(s) + " sums to " +
                      std::to_string(sum));
    }
  }
}

Policy project_policy(const TabularMdp& mdp, const Policy& pi) {
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    throw DataError("policy shape does not match the MDP");
  }
  Policy out = pi;
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto& adm = mdp.admissible[static_cast<size_t>(s)];
    double stray = 0.0;
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (!mdp.is_admissible(s, a)) stray += pi(s, a);
    }
    if (adm.empty()) {
      if (stray > 0.0) {
        throw DataError("state " + std::to_string(s) +
                        " has no admissible actions");
      }
      continue;
    }
    if (static_cast<int>(adm.size()) == mdp.n_actions) continue;
    const double share = stray / static_cast<double>(adm.size());
    auto row = out.mutable_row(s);
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      row[static_cast<size_t>(a)] =
          mdp.is_admissible(s, a) ? pi(s, a) + share : 0.0;
    }
  }
  return out;
}

}  // namespace icu_sepsis
