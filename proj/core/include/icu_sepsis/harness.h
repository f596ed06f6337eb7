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


// Training runs, the convergence rule, cross-seed aggregation, the
// action-removal robustness experiment, random hyperparameter search and the
// CSV exports of all of them.

#ifndef ICU_SEPSIS_HARNESS_H_
#define ICU_SEPSIS_HARNESS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icu_sepsis/agent_config.h"
#include "icu_sepsis/io.h"
#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"
#include "icu_sepsis/rng.h"
#include "icu_sepsis/simulator.h"

namespace icu_sepsis {

struct LearningCurve {
  std::string agent;
  uint64_t seed = 0;
  std::vector<double> returns;
  std::vector<int> lengths;
  std::vector<uint8_t> truncated;

  size_t episodes() const { return returns.size(); }
  void add(const EpisodeResult& r);
};

// Default for an unset epsilon horizon: episodes * kStepsPerEpisodeGuess.
inline constexpr int64_t kStepsPerEpisodeGuess = 10;

// Runs `episodes` episodes of the agent described by cfg. Streams of
// Rng(seed, k): k = 0 environment, k = 1 action sampling, k = 2 the agent's
// own draws. When final_policy is given it receives the agent's policy after
// the last episode.
LearningCurve train(const Simulator& sim, const AgentConfig& cfg, int episodes,
                    uint64_t seed, int max_steps = kDefaultMaxSteps,
                    Policy* final_policy = nullptr);

// A non-learning baseline: episodes under a fixed policy, environment stream
// Rng(seed, 0), action stream Rng(seed, 1).
LearningCurve run_fixed_policy(const Simulator& sim, const Policy& pi,
                               int episodes, uint64_t seed,
                               int max_steps = kDefaultMaxSteps,
                               const std::string& name = "fixed");

// Calls task(i) for i in [0, n) on up to `workers` threads (0 = hardware
// concurrency). Results must be written to per-index slots by the caller.
// The first exception thrown by any task is rethrown.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& task);

// One curve per seed, in seed order.
std::vector<LearningCurve> train_seeds(const Simulator& sim, const AgentConfig& cfg,
                                       int episodes,
                                       const std::vector<uint64_t>& seeds,
                                       int workers = 0,
                                       int max_steps = kDefaultMaxSteps);

// ---------------------------------------------------------------------------
// Convergence: the mean of the trailing short window is within rel_tol of the
// mean of the trailing long window, relative to the latter.

struct ConvergenceRule {
  int short_window = 1000;
  int long_window = 10000;
  double rel_tol = 0.001;
};

struct ConvergenceResult {
  std::optional<int64_t> episode;  // episodes completed when first satisfied
  int64_t steps = 0;               // environment steps up to that episode
  double average_return = 0.0;     // long-window mean at that episode
};

// Scans e = long_window, long_window + 1, ... and reports the first e at
// which the rule holds.
ConvergenceResult detect_convergence(const LearningCurve& curve,
                                     const ConvergenceRule& rule = {});

// Whether the rule holds at the last episode.
bool converged_at_end(const LearningCurve& curve, const ConvergenceRule& rule = {});

// Mean return of the last ceil(fraction * episodes) episodes.
double final_fraction_mean(const LearningCurve& curve, double fraction);
// Mean return of the last `window` episodes (all of them if fewer).
double final_window_mean(const LearningCurve& curve, size_t window);
double mean_length(const LearningCurve& curve);

// ---------------------------------------------------------------------------
// Aggregation

struct CurveSummary {
  int runs = 0;
  int smoothing_window = 1;
  std::vector<double> mean_return;
  std::vector<double> stderr_return;
  std::vector<double> mean_length;
  std::vector<double> stderr_length;
};

// Pointwise mean and standard error (sample standard deviation / sqrt(n),
// zero for a single run) across curves of equal length. With
// smoothing_window > 1 each curve is first replaced by its trailing moving
// average. Throws UsageError on mismatched lengths.
CurveSummary aggregate(const std::vector<LearningCurve>& curves,
                       int smoothing_window = 1);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

// ---------------------------------------------------------------------------
// Action-removal perturbation

struct PerturbConfig {
  double sigma = 0.0;
  int repetitions = 32;
  uint64_t seed = 0;
};

// Every admissible action of every live state is dropped independently with
// probability sigma (one uniform draw per action, ascending ids). A state
// that loses every action gets one of its former actions back, chosen
// uniformly. Inadmissible rows of changed states are rebuilt as the mean of
// the surviving admissible rows; surviving rows and unchanged states are
// copied bit for bit.
TabularMdp perturb_mdp(const TabularMdp& mdp, double sigma, Rng& rng);

struct NamedPolicy {
  std::string name;
  Policy policy;
};

struct PerturbRecord {
  double sigma = 0.0;
  int repetition = 0;
  std::string policy;
  double ret = 0.0;     // exact J on the perturbed model
  double length = 0.0;  // exact expected length; +inf if some state never ends
};

// For each sigma and repetition r, perturbs with Rng(seed, sigma index)
// .split(r) and evaluates every policy exactly. Records are ordered by
// (sigma, repetition, policy).
std::vector<PerturbRecord> run_perturbation(const TabularMdp& mdp,
                                            const std::vector<NamedPolicy>& policies,
                                            const std::vector<double>& sigmas,
                                            int repetitions, uint64_t seed,
                                            int workers = 0);

struct PerturbSummary {
  double sigma = 0.0;
  std::string policy;
  int repetitions = 0;
  double mean_return = 0.0;
  double var_return = 0.0;  // sample variance across repetitions
  double stderr_return = 0.0;
  double mean_length = 0.0;
  double stderr_length = 0.0;
};

std::vector<PerturbSummary> summarize_perturbation(
    const std::vector<PerturbRecord>& records);

// ---------------------------------------------------------------------------
// Random search

enum class DistKind { kFixed, kUniform, kLogUniform, kIntUniform, kIntLogUniform,
                      kCategorical };

struct Distribution {
  DistKind kind = DistKind::kFixed;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::string> choices;  // kCategorical; kFixed keeps its value in [0]

  // Throws UsageError on bad bounds.
  void check(const std::string& name) const;
  std::string sample(Rng& rng) const;
};

// Ordered so that sampling is reproducible.
using SearchSpace = std::vector<std::pair<std::string, Distribution>>;

// One "key = spec" per line; '#' starts a comment. spec is one of
//   uniform(a, b)  log_uniform(a, b)  int_uniform(a, b)  int_log_uniform(a, b)
//   categorical(x, y, ...)  fixed(x)  or a bare value (fixed).
SearchSpace parse_search_space(const std::string& text);

struct SearchResult {
  size_t index = 0;  // sampling order
  std::map<std::string, std::string> sampled;
  AgentConfig config;
  double score = 0.0;               // mean over seeds
  std::vector<double> seed_scores;  // mean return of the final 10% per seed
};

struct SearchOptions {
  int budget = 1;
  int seeds_per_config = 1;
  int episodes = 1000;
  uint64_t master_seed = 0;
  int workers = 0;
  int max_steps = kDefaultMaxSteps;
};

// Samples `budget` configs from the space (starting from `base`), trains
// each with seeds_per_config seeds, and returns them best first; ties keep
// sampling order.
std::vector<SearchResult> random_search(const Simulator& sim, const AgentConfig& base,
                                        const SearchSpace& space,
                                        const SearchOptions& options);

// ---------------------------------------------------------------------------
// Exports

void write_curve_csv(const LearningCurve& curve, const fs::path& path);
void write_curves_csv(const std::vector<LearningCurve>& curves, const fs::path& path);
void write_summary_csv(const CurveSummary& summary, const fs::path& path);

struct ConvergenceRow {
  std::string algorithm;
  int converged_runs = 0;
  int converged_at_end_runs = 0;
  int total_runs = 0;
  double episodes_k = 0.0;  // mean over converged runs
  double steps_m = 0.0;
  double average_return = 0.0;
};

ConvergenceRow convergence_row(const std::string& algorithm,
                               const std::vector<LearningCurve>& curves,
                               const ConvergenceRule& rule = {});
void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           const fs::path& path);
void write_perturbation_csv(const std::vector<PerturbRecord>& records,
                            const fs::path& path);
void write_perturbation_summary_csv(const std::vector<PerturbSummary>& rows,
                                    const fs::path& path);
void write_search_csv(const std::vector<SearchResult>& results, const fs::path& path);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_HARNESS_H_
