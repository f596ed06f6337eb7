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


// Small models and helpers shared by the test binaries.

#ifndef ICU_SEPSIS_TESTS_FIXTURES_H_
#define ICU_SEPSIS_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"
#include "icu_sepsis/rng.h"

namespace icu_sepsis::testing {

inline std::filesystem::path official_dir() { return ICU_SEPSIS_DATA_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("icu_sepsis_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Live states 0..n_live-1, then death, survival, absorbing (the builder's
// layout). Each admissible row keeps at least `exit_mass` on the two outcome
// states so every policy terminates.
inline TabularMdp random_mdp(int n_live, int n_actions, Rng& rng,
                             double exit_mass = 0.05, double admit_prob = 0.6) {
  const int n = n_live + 3;
  TabularMdp mdp = TabularMdp::zeros(n, n_actions);
  mdp.death_state = n_live;
  mdp.survival_state = n_live + 1;
  mdp.absorbing_state = n_live + 2;
  for (StateId s = 0; s < n_live; ++s) {
    auto& adm = mdp.admissible[static_cast<size_t>(s)];
    for (ActionId a = 0; a < n_actions; ++a) {
      if (rng.uniform() < admit_prob) adm.push_back(a);
    }
    if (adm.empty()) adm.push_back(static_cast<ActionId>(rng.uniform_int(n_actions)));
    for (ActionId a : adm) {
      auto row = mdp.mutable_row(s, a);
      double live_total = 0.0;
      for (StateId j = 0; j < n_live; ++j) {
        row[static_cast<size_t>(j)] = rng.uniform() < 0.5 ? rng.uniform() : 0.0;
        live_total += row[static_cast<size_t>(j)];
      }
      const double exit = exit_mass + (1.0 - exit_mass) * rng.uniform() * 0.5;
      const double surv = rng.uniform();
      if (live_total == 0.0) {
        row[static_cast<size_t>(mdp.death_state)] = 1.0 - surv;
        row[static_cast<size_t>(mdp.survival_state)] = surv;
        continue;
      }
      for (StateId j = 0; j < n_live; ++j) {
        row[static_cast<size_t>(j)] *= (1.0 - exit) / live_total;
      }
      row[static_cast<size_t>(mdp.death_state)] = exit * (1.0 - surv);
      row[static_cast<size_t>(mdp.survival_state)] = exit * surv;
    }
  }
  double total = 0.0;
  for (StateId s = 0; s < n_live; ++s) {
    mdp.initial_dist[static_cast<size_t>(s)] = rng.uniform() + 0.01;
    total += mdp.initial_dist[static_cast<size_t>(s)];
  }
  for (StateId s = 0; s < n_live; ++s) mdp.initial_dist[static_cast<size_t>(s)] /= total;
  attach_terminal_rows(mdp);
  fill_inadmissible_rows(mdp);
  mdp.provenance.source = "random";
  return mdp;
}

// Every row an arbitrary distribution over all actions.
inline Policy random_policy(int n_states, int n_actions, Rng& rng) {
  Policy pi(n_states, n_actions);
  for (StateId s = 0; s < n_states; ++s) {
    auto row = pi.mutable_row(s);
    double total = 0.0;
    for (double& p : row) total += (p = rng.uniform() + 1e-3);
    for (double& p : row) p /= total;
  }
  return pi;
}

// One live state whose every action enters survival with probability p and
// death otherwise.
inline TabularMdp bandit_mdp(int n_actions, std::vector<double> p_survive) {
  TabularMdp mdp = TabularMdp::zeros(4, n_actions);
  mdp.death_state = 1;
  mdp.survival_state = 2;
  mdp.absorbing_state = 3;
  mdp.initial_dist[0] = 1.0;
  for (ActionId a = 0; a < n_actions; ++a) {
    mdp.admissible[0].push_back(a);
    mdp.mutable_row(0, a)[2] = p_survive[static_cast<size_t>(a)];
    mdp.mutable_row(0, a)[1] = 1.0 - p_survive[static_cast<size_t>(a)];
  }
  attach_terminal_rows(mdp);
  return mdp;
}

// Ground truth for estimator recovery: 5 live states, 3 actions, every action
// admissible. The behaviour policy plays one action per state almost never
// (so it falls under any reasonable threshold), one moderately, one mostly.
struct RecoveryCase {
  TabularMdp truth;
  Policy behaviour;
};

inline RecoveryCase recovery_case(uint64_t seed) {
  Rng rng(seed);
  RecoveryCase rc;
  rc.truth = random_mdp(5, 3, rng, 0.1, 1.0);
  rc.behaviour = Policy::uniform(rc.truth.n_states, 3);
  for (StateId s = 0; s < 5; ++s) {
    auto row = rc.behaviour.mutable_row(s);
    const double medium = s % 2 == 0 ? 0.01 : 0.002;
    row[static_cast<size_t>(s % 3)] = 2e-5;
    row[static_cast<size_t>((s + 1) % 3)] = medium;
    row[static_cast<size_t>((s + 2) % 3)] = 1.0 - medium - 2e-5;
  }
  return rc;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace icu_sepsis::testing

#endif  // ICU_SEPSIS_TESTS_FIXTURES_H_
