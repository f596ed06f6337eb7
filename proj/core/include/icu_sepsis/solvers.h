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


// Closed-form ground truth: value iteration, exact policy evaluation by a
// dense LU solve, expected episode length, and a brute-force oracle for tiny
// instances. Rewards are earned on entering a state, so
//   q(s, a) = sum_s' p(s, a, s') * (r(s') + gamma * v(s')).

#ifndef ICU_SEPSIS_SOLVERS_H_
#define ICU_SEPSIS_SOLVERS_H_

#include <cstdint>
#include <vector>

#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"

namespace icu_sepsis {

struct ValueIterationOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  // When false the max runs over all actions; exact ties then go to an
  // admissible action.
  bool admissible_only = true;
};

struct ValueIterationResult {
  std::vector<double> v;
  std::vector<ActionId> greedy;  // lowest id among exact ties
  Policy policy;                 // point mass on greedy[s]
  double J = 0.0;                // d0 . v
  int iterations = 0;
  double residual = 0.0;         // sup-norm change of the last sweep
};

// Throws ConvergenceError (carrying the last residual) after max_iter sweeps.
ValueIterationResult value_iteration(const TabularMdp& mdp,
                                     const ValueIterationOptions& options = {});

// One Bellman-optimality sweep from v; returns the greedy action per state.
std::vector<ActionId> greedy_actions(const TabularMdp& mdp,
                                     const std::vector<double>& v,
                                     bool admissible_only = true);

// q(s, a) for every state and action.
DenseMatrix action_values(const TabularMdp& mdp, const std::vector<double>& v);

struct EvaluationOptions {
  // Project pi onto admissible actions first. Under completed dynamics the
  // value is unchanged either way; the flag exists to check exactly that.
  bool project = true;
  double residual_tol = 1e-9;
};

struct PolicyValue {
  std::vector<double> v;  // zero at the three terminal states
  double J = 0.0;
  double residual = 0.0;  // sup-norm of v - r_pi - gamma P_pi v on live states
};

// Solves (I - gamma P_LL) v_L = P_L r over live states L with partial-pivot
// LU. Throws SingularSystemError when the system is singular or the residual
// check fails, which happens when pi can cycle forever with gamma = 1.
PolicyValue policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi,
                                    const EvaluationOptions& options = {});

// Jacobi sweeps for larger models; throws ConvergenceError after max_iter.
PolicyValue policy_evaluation_iterative(const TabularMdp& mdp, const Policy& pi,
                                        double tol = 1e-12,
                                        int max_iter = 1000000);

// Expected number of actions before entering survival or death:
// l = 1 + P_LL l over live states, reported as d0 . l.
double expected_episode_length(const TabularMdp& mdp, const Policy& pi,
                               const EvaluationOptions& options = {});

struct BruteForceResult {
  double J = 0.0;
  std::vector<ActionId> best;  // per state; terminal entries are 0
  int64_t policies = 0;
  // Largest probability, over all enumerated policies, of still being live
  // after `horizon` steps. Bounds the truncation error when rewards are <= 1.
  double max_tail_mass = 0.0;
};

// Enumerates every deterministic admissible policy and scores each by its
// horizon-step expected return. Throws UsageError when more than
// max_policies policies would be enumerated.
BruteForceResult brute_force_optimal(const TabularMdp& mdp, int horizon,
                                     int64_t max_policies = 1000000);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_SOLVERS_H_
