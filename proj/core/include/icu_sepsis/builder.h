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


// Reconstruction of a tabular MDP from recorded trajectories: counting,
// threshold admissibility, pruning, empirical transition estimates, completion
// of inadmissible rows, terminal bookkeeping, initial distribution and the
// clinician (expert) policy. Also hosts the k-means state abstraction and the
// synthetic-trajectory generator used to test the estimators.

#ifndef ICU_SEPSIS_BUILDER_H_
#define ICU_SEPSIS_BUILDER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "icu_sepsis/dataset.h"
#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"

namespace icu_sepsis {

using AdmissibleTable = std::vector<std::vector<ActionId>>;

// Tallies over a dataset whose states are ids in [0, n_states). The final step
// of every episode is counted as a transition into one of two extra
// destinations: survival_target() or death_target().
struct TransitionCounts {
  int n_states = 0;
  int n_actions = 0;
  // c3[s * n_actions + a] maps s' to C(s, a, s').
  std::vector<std::map<StateId, int64_t>> c3;
  std::vector<int64_t> c2;
  std::vector<int64_t> first_state;
  int64_t episode_count = 0;
  int64_t survived_count = 0;

  TransitionCounts() = default;
  TransitionCounts(int n_states, int n_actions);

  StateId survival_target() const { return n_states; }
  StateId death_target() const { return n_states + 1; }

  int64_t count(StateId s, ActionId a) const {
    return c2[static_cast<size_t>(s) * n_actions + a];
  }
  int64_t count(StateId s, ActionId a, StateId next) const;
  const std::map<StateId, int64_t>& row(StateId s, ActionId a) const {
    return c3[static_cast<size_t>(s) * n_actions + a];
  }

  // Adds another tally over the same id space. Order-independent.
  void merge(const TransitionCounts& other);
};

// n_states / n_actions <= 0 means one past the largest id in the data.
TransitionCounts count_transitions(const TrajectoryDataset& data,
                                   int n_states = 0, int n_actions = 0);

// a is admissible at s iff C(s, a) > tau (strict).
AdmissibleTable admissible_sets(const TransitionCounts& counts, int64_t tau);

struct PruneResult {
  std::vector<StateId> remap;    // dataset id -> dense id, -1 when dropped
  std::vector<StateId> kept;     // dataset ids, ascending
  std::vector<StateId> dropped;  // dataset ids, ascending
  AdmissibleTable admissible;    // dataset-id indexed, after the fixpoint
  int rounds = 0;
};

// Drops states without admissible actions. Counts into dropped states are
// discarded, so an admissible pair whose every observed successor was dropped
// loses its admissibility; this repeats until nothing changes. Throws
// DataError when no state survives.
PruneResult prune_states(const TransitionCounts& counts,
                         const AdmissibleTable& admissible);

// The partial model: kept states renumbered densely, then death, survival and
// absorbing appended in that order. Admissible rows hold
// C(s, a, s') / sum of C(s, a, .) over kept destinations; every other row is
// zero. Throws DataError if an admissible pair has no observed successor.
TabularMdp estimate_zeta(const TransitionCounts& counts, const PruneResult& pruned);

// Fills every inadmissible row with the mean of the state's admissible rows.
// Throws DataError on an empty admissible set.
void complete_transitions(TabularMdp& zeta);

// Row s is C(s, .) / sum_a C(s, a) over all actions, in dense ids; terminal
// rows are uniform. Throws DataError for a kept state with no recorded action.
Policy estimate_expert_policy(const TransitionCounts& counts,
                              const PruneResult& pruned);

// first_state(s) / episode_count in dataset ids.
std::vector<double> estimate_initial_dist(const TransitionCounts& counts);

inline constexpr uint64_t kDefaultClusterSeed = 20240101;

struct BuildConfig {
  int64_t tau = 20;
  int n_states_cluster = 0;  // 0: one past the largest state id in the data
  int d_A = 2;
  int n_A = 5;
  int n_actions = 25;
  uint64_t seed = kDefaultClusterSeed;
  double gamma = 1.0;

  // Config for an n-action space without factored structure (d_A = 1).
  static BuildConfig flat(int n_actions, int64_t tau = 20);
  void check() const;
};

struct BuildReport {
  int64_t tau = 0;
  int64_t episodes = 0;
  int64_t survived = 0;
  int64_t steps = 0;
  int input_states = 0;
  int prune_rounds = 0;
  std::vector<StateId> dropped;
  // admissible_histogram[k] = live states with exactly k admissible actions.
  std::vector<int> admissible_histogram;
  int64_t observed_pairs = 0;
  int64_t admissible_pairs = 0;
  int64_t min_admissible_count = 0;
  int64_t max_admissible_count = 0;

  std::string to_text() const;
};

struct BuildResult {
  TabularMdp mdp;
  Policy expert;
  BuildReport report;
};

BuildResult build_mdp(const TrajectoryDataset& data, const BuildConfig& cfg);

// "state,admissible_count" rows for every live state of `mdp`.
std::string admissible_size_table(const TabularMdp& mdp);

// ---------------------------------------------------------------------------
// K-means state abstraction

struct FeatureEpisode {
  std::vector<std::vector<double>> features;  // one vector per time block
  std::vector<ActionId> actions;
  bool survived = false;
};

struct FeatureTrajectoryDataset {
  std::vector<FeatureEpisode> episodes;
};

struct KMeansOptions {
  int max_iterations = 300;
  double min_relative_improvement = 1e-9;
};

struct KMeansResult {
  DenseMatrix centroids;    // k rows
  std::vector<int> labels;  // one per point
  double distortion = 0.0;  // sum of squared distances
  int iterations = 0;
};

// Lloyd iterations from k-means++ seeding. Points are the rows of `points`.
// An emptied cluster is re-seeded with the point farthest from its centroid.
KMeansResult kmeans(const DenseMatrix& points, int k, uint64_t seed,
                    const KMeansOptions& options = {});

struct ClusteredDataset {
  TrajectoryDataset dataset;
  DenseMatrix centroids;
  KMeansResult fit;
};

// Clusters every time block and relabels the episodes with cluster ids.
ClusteredDataset kmeans_cluster(const FeatureTrajectoryDataset& features, int k,
                                uint64_t seed, const KMeansOptions& options = {});

// Centroid rows of the kept clusters in dense order, then zero rows for the
// three terminal states.
DenseMatrix centroid_table(const DenseMatrix& cluster_centroids,
                           const std::vector<StateId>& kept);

// ---------------------------------------------------------------------------
// Synthetic trajectories

// Rolls out pi on `truth`. Live truth states are relabeled 0, 1, ... in
// ascending order; the final step of each episode carries reward 1 iff the
// episode entered survival. Episodes cut by max_steps carry no outcome and are
// not emitted; their number goes to *truncated when given. Episode i draws
// from Rng(seed).split(i).
TrajectoryDataset synthesize_dataset(const TabularMdp& truth, const Policy& pi,
                                     int n_episodes, uint64_t seed,
                                     int max_steps = 5000,
                                     int* truncated = nullptr);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_BUILDER_H_
