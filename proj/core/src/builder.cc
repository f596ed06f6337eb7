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
#include <limits>
#include <sstream>

#include "icu_sepsis/builder.h"
#include "icu_sepsis/errors.h"

namespace icu_sepsis {

TabularMdp estimate_zeta(const TransitionCounts& counts,
                         const PruneResult& pruned) {
  const int kept = static_cast<int>(pruned.kept.size());
  TabularMdp m = TabularMdp::zeros(kept + 3, counts.n_actions);
  m.death_state = kept;
  m.survival_state = kept + 1;
  m.absorbing_state = kept + 2;
  auto dense = [&](StateId next) -> StateId {
    if (next == counts.survival_target()) return m.survival_state;
    if (next == counts.death_target()) return m.death_state;
    return pruned.remap[static_cast<size_t>(next)];
  };
  for (int i = 0; i < kept; ++i) {
    const StateId s = pruned.kept[static_cast<size_t>(i)];
    const auto& set = pruned.admissible[static_cast<size_t>(s)];
    m.admissible[static_cast<size_t>(i)] = set;
    for (ActionId a : set) {
      int64_t total = 0;
      for (const auto& [next, c] : counts.row(s, a)) {
        if (dense(next) >= 0) total += c;
      }
      if (total == 0) {
        throw DataError("admissible pair (" + std::to_string(s) + ", " +
                        std::to_string(a) + ") has no observed successor");
      }
      auto row = m.mutable_row(i, a);
      const auto denom = static_cast<double>(total);
      for (const auto& [next, c] : counts.row(s, a)) {
        const StateId j = dense(next);
        if (j >= 0) row[static_cast<size_t>(j)] = static_cast<double>(c) / denom;
      }
    }
  }
  return m;
}

void complete_transitions(TabularMdp& zeta) { fill_inadmissible_rows(zeta); }

Policy estimate_expert_policy(const TransitionCounts& counts,
                              const PruneResult& pruned) {
  const int kept = static_cast<int>(pruned.kept.size());
  Policy pi = Policy::uniform(kept + 3, counts.n_actions);
  for (int i = 0; i < kept; ++i) {
    const StateId s = pruned.kept[static_cast<size_t>(i)];
    int64_t total = 0;
    for (ActionId a = 0; a < counts.n_actions; ++a) total += counts.count(s, a);
    if (total == 0) {
      throw DataError("state " + std::to_string(s) + " has no recorded action");
    }
    for (ActionId a = 0; a < counts.n_actions; ++a) {
      pi(i, a) = static_cast<double>(counts.count(s, a)) / static_cast<double>(total);
    }
  }
  return pi;
}

BuildConfig BuildConfig::flat(int n_actions, int64_t tau) {
  BuildConfig cfg;
  cfg.tau = tau;
  cfg.d_A = 1;
  cfg.n_A = n_actions;
  cfg.n_actions = n_actions;
  return cfg;
}

void BuildConfig::check() const {
  if (tau < 1) throw UsageError("tau must be at least 1");
  if (d_A < 1 || n_A < 1) throw UsageError("d_A and n_A must be positive");
  int64_t product = 1;
  for (int i = 0; i < d_A; ++i) product *= n_A;
  if (product != n_actions) {
    throw UsageError("n_actions must equal n_A^d_A (" + std::to_string(product) +
                     ")");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("gamma must be in (0, 1]");
}

BuildResult build_mdp(const TrajectoryDataset& data, const BuildConfig& cfg) {
  cfg.check();
  if (data.episodes.empty()) throw DataError("dataset has no episodes");
  const TransitionCounts counts =
      count_transitions(data, cfg.n_states_cluster, cfg.n_actions);
  const PruneResult pruned = prune_states(counts, admissible_sets(counts, cfg.tau));

  BuildResult out;
  out.mdp = estimate_zeta(counts, pruned);
  TabularMdp& m = out.mdp;
  complete_transitions(m);
  attach_terminal_rows(m);
  m.gamma = cfg.gamma;
  m.provenance.tau = static_cast<int>(std::min<int64_t>(
      cfg.tau, std::numeric_limits<int>::max()));
  m.provenance.source = "builder";
  m.provenance.admissible_source = "explicit";

  // Episodes that start in a dropped state are discarded from d0.
  int64_t starts = 0;
  for (StateId s : pruned.kept) starts += counts.first_state[static_cast<size_t>(s)];
  if (starts == 0) throw DataError("no episode starts in a kept state");
  for (size_t i = 0; i < pruned.kept.size(); ++i) {
    m.initial_dist[i] =
        static_cast<double>(counts.first_state[static_cast<size_t>(pruned.kept[i])]) /
        static_cast<double>(starts);
  }
  out.expert = estimate_expert_policy(counts, pruned);

  BuildReport& r = out.report;
  r.tau = cfg.tau;
  r.episodes = counts.episode_count;
  r.survived = counts.survived_count;
  r.steps = static_cast<int64_t>(data.total_steps());
  r.input_states = counts.n_states;
  r.prune_rounds = pruned.rounds;
  r.dropped = pruned.dropped;
  r.admissible_histogram.assign(static_cast<size_t>(cfg.n_actions) + 1, 0);
  r.min_admissible_count = std::numeric_limits<int64_t>::max();
  for (int64_t c : counts.c2) r.observed_pairs += c > 0;
  for (StateId s : pruned.kept) {
    const auto& set = pruned.admissible[static_cast<size_t>(s)];
    ++r.admissible_histogram[set.size()];
    r.admissible_pairs += static_cast<int64_t>(set.size());
    for (ActionId a : set) {
      r.min_admissible_count = std::min(r.min_admissible_count, counts.count(s, a));
      r.max_admissible_count = std::max(r.max_admissible_count, counts.count(s, a));
    }
  }
  return out;
}

std::string BuildReport::to_text() const {
  std::ostringstream out;
  out << "tau: " << tau << "\n"
      << "episodes: " << episodes << " (" << survived << " survived)\n"
      << "steps: " << steps << "\n"
      << "dataset states: " << input_states << "\n"
      << "kept states: " << input_states - static_cast<int>(dropped.size())
      << " (+3 terminal)\n"
      << "dropped states: " << dropped.size();
  if (!dropped.empty()) {
    out << " [";
    for (size_t i = 0; i < dropped.size(); ++i) out << (i ? " " : "") << dropped[i];
    out << "]";
  }
  out << "\nprune rounds: " << prune_rounds << "\n"
      << "observed (s,a) pairs: " << observed_pairs << "\n"
      << "admissible (s,a) pairs: " << admissible_pairs << "\n"
      << "admissible pair counts: min " << min_admissible_count << ", max "
      << max_admissible_count << "\n"
      << "admissible-set size histogram:\n";
  for (size_t k = 1; k < admissible_histogram.size(); ++k) {
    if (admissible_histogram[k] > 0) {
      out << "  " << k << ": " << admissible_histogram[k] << "\n";
    }
  }
  return out.str();
}

std::string admissible_size_table(const TabularMdp& mdp) {
  std::string out = "state,admissible_count\n";
  for (StateId s : mdp.live_states()) {
    out += std::to_string(s) + "," +
           std::to_string(mdp.admissible[static_cast<size_t>(s)].size()) + "\n";
  }
  return out;
}

}  // namespace icu_sepsis
