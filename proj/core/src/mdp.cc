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

#include "icu_sepsis/mdp.h"

#include <algorithm>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {

bool TabularMdp::is_admissible(StateId s, ActionId a) const {
  const auto& set = admissible[static_cast<size_t>(s)];
  return std::binary_search(set.begin(), set.end(), a);
}

std::vector<StateId> TabularMdp::live_states() const {
  std::vector<StateId> out;
  out.reserve(static_cast<size_t>(n_states));
  for (StateId s = 0; s < n_states; ++s) {
    if (!is_terminal(s)) out.push_back(s);
  }
  return out;
}

TabularMdp TabularMdp::zeros(int n_states, int n_actions) {
  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.transitions.assign(
      static_cast<size_t>(n_states) * n_actions * n_states, 0.0);
  mdp.reward_by_state.assign(static_cast<size_t>(n_states), 0.0);
  mdp.initial_dist.assign(static_cast<size_t>(n_states), 0.0);
  mdp.admissible.assign(static_cast<size_t>(n_states), {});
  return mdp;
}

void fill_inadmissible_rows(TabularMdp& mdp) {
  std::vector<long double> mean(static_cast<size_t>(mdp.n_states));
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto& adm = mdp.admissible[static_cast<size_t>(s)];
    if (adm.empty()) {
      throw DataError("state " + std::to_string(s) +
                      " has no admissible actions; prune it first");
    }
    if (static_cast<int>(adm.size()) == mdp.n_actions) continue;
    std::fill(mean.begin(), mean.end(), 0.0L);
    for (ActionId a : adm) {
      auto row = mdp.row(s, a);
      for (size_t j = 0; j < row.size(); ++j) mean[j] += row[j];
    }
    const auto k = static_cast<long double>(adm.size());
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (mdp.is_admissible(s, a)) continue;
      auto row = mdp.mutable_row(s, a);
      for (size_t j = 0; j < row.size(); ++j) {
        row[j] = static_cast<double>(mean[j] / k);
      }
    }
  }
}

void attach_terminal_rows(TabularMdp& mdp) {
  for (StateId s : {mdp.survival_state, mdp.death_state, mdp.absorbing_state}) {
    if (s < 0 || s >= mdp.n_states) {
      throw DataError("terminal state id out of range");
    }
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      auto row = mdp.mutable_row(s, a);
      std::fill(row.begin(), row.end(), 0.0);
      row[static_cast<size_t>(mdp.absorbing_state)] = 1.0;
    }
    auto& adm = mdp.admissible[static_cast<size_t>(s)];
    adm.resize(static_cast<size_t>(mdp.n_actions));
    for (ActionId a = 0; a < mdp.n_actions; ++a) adm[static_cast<size_t>(a)] = a;
  }
  std::fill(mdp.reward_by_state.begin(), mdp.reward_by_state.end(), 0.0);
  mdp.reward_by_state[static_cast<size_t>(mdp.survival_state)] = 1.0;
}

}  // namespace icu_sepsis
