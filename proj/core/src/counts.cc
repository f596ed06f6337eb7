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

#include "icu_sepsis/builder.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {

TransitionCounts::TransitionCounts(int n_states_in, int n_actions_in)
    : n_states(n_states_in),
      n_actions(n_actions_in),
      c3(static_cast<size_t>(n_states_in) * n_actions_in),
      c2(static_cast<size_t>(n_states_in) * n_actions_in, 0),
      first_state(static_cast<size_t>(n_states_in), 0) {}

int64_t TransitionCounts::count(StateId s, ActionId a, StateId next) const {
  const auto& r = row(s, a);
  const auto it = r.find(next);
  return it == r.end() ? 0 : it->second;
}

void TransitionCounts::merge(const TransitionCounts& other) {
  if (other.n_states != n_states || other.n_actions != n_actions) {
    throw UsageError("cannot merge counts over different id spaces");
  }
  for (size_t i = 0; i < c3.size(); ++i) {
    for (const auto& [next, c] : other.c3[i]) c3[i][next] += c;
    c2[i] += other.c2[i];
  }
  for (size_t s = 0; s < first_state.size(); ++s) {
    first_state[s] += other.first_state[s];
  }
  episode_count += other.episode_count;
  survived_count += other.survived_count;
}

TransitionCounts count_transitions(const TrajectoryDataset& data, int n_states,
                                   int n_actions) {
  if (n_states <= 0 || n_actions <= 0) {
    int max_s = -1;
    int max_a = -1;
    for (const Episode& e : data.episodes) {
      for (const Step& st : e.steps) {
        max_s = std::max(max_s, st.state);
        max_a = std::max(max_a, st.action);
      }
    }
    if (n_states <= 0) n_states = max_s + 1;
    if (n_actions <= 0) n_actions = max_a + 1;
  }
  check_dataset(data, n_states, n_actions);
  TransitionCounts counts(n_states, n_actions);
  for (const Episode& e : data.episodes) {
    ++counts.episode_count;
    if (e.survived) ++counts.survived_count;
    ++counts.first_state[static_cast<size_t>(e.steps.front().state)];
    const StateId exit =
        e.survived ? counts.survival_target() : counts.death_target();
    for (size_t t = 0; t < e.steps.size(); ++t) {
      const Step& st = e.steps[t];
      const StateId next = t + 1 < e.steps.size() ? e.steps[t + 1].state : exit;
      const size_t i = static_cast<size_t>(st.state) * n_actions + st.action;
      ++counts.c3[i][next];
      ++counts.c2[i];
    }
  }
  return counts;
}

AdmissibleTable admissible_sets(const TransitionCounts& counts, int64_t tau) {
  AdmissibleTable sets(static_cast<size_t>(counts.n_states));
  for (StateId s = 0; s < counts.n_states; ++s) {
    for (ActionId a = 0; a < counts.n_actions; ++a) {
      if (counts.count(s, a) > tau) sets[static_cast<size_t>(s)].push_back(a);
    }
  }
  return sets;
}

PruneResult prune_states(const TransitionCounts& counts,
                         const AdmissibleTable& admissible) {
  const auto n = static_cast<size_t>(counts.n_states);
  if (admissible.size() != n) {
    throw UsageError("admissible table does not match the counts");
  }
  PruneResult out;
  out.admissible = admissible;
  std::vector<bool> alive(n);
  for (size_t s = 0; s < n; ++s) alive[s] = !admissible[s].empty();
  auto reachable = [&](StateId next) {
    return next >= counts.n_states || alive[static_cast<size_t>(next)];
  };

  bool changed = true;
  while (changed) {
    changed = false;
    ++out.rounds;
    for (size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      auto& set = out.admissible[s];
      const size_t before = set.size();
      std::erase_if(set, [&](ActionId a) {
        const auto& r = counts.row(static_cast<StateId>(s), a);
        return std::none_of(r.begin(), r.end(),
                            [&](const auto& kv) { return reachable(kv.first); });
      });
      if (set.size() != before) changed = true;
      if (set.empty()) alive[s] = false;
    }
  }

  out.remap.assign(n, -1);
  for (size_t s = 0; s < n; ++s) {
    if (alive[s]) {
      out.remap[s] = static_cast<StateId>(out.kept.size());
      out.kept.push_back(static_cast<StateId>(s));
    } else {
      out.dropped.push_back(static_cast<StateId>(s));
      out.admissible[s].clear();
    }
  }
  if (out.kept.empty()) {
    throw DataError("every state was pruned: no state has an action observed "
                    "more than tau times");
  }
  return out;
}

std::vector<double> estimate_initial_dist(const TransitionCounts& counts) {
  if (counts.episode_count <= 0) throw DataError("no episodes counted");
  std::vector<double> d0(counts.first_state.size());
  const auto n = static_cast<double>(counts.episode_count);
  for (size_t s = 0; s < d0.size(); ++s) {
    d0[s] = static_cast<double>(counts.first_state[s]) / n;
  }
  return d0;
}

}  // namespace icu_sepsis
