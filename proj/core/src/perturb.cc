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
#include <cmath>
#include <limits>
#include <tuple>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"
#include "icu_sepsis/solvers.h"

namespace icu_sepsis {

TabularMdp perturb_mdp(const TabularMdp& mdp, double sigma, Rng& rng) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw UsageError("sigma must be in [0, 1]");
  TabularMdp out = mdp;
  out.provenance.source = "perturbed";
  std::vector<long double> mean(static_cast<size_t>(mdp.n_states));
  for (StateId s : mdp.live_states()) {
    const auto& before = mdp.admissible[static_cast<size_t>(s)];
    if (before.empty()) throw DataError("state " + std::to_string(s) + " has no admissible action");
    std::vector<ActionId> kept;
    for (ActionId a : before) {
      if (rng.uniform() >= sigma) kept.push_back(a);
    }
    if (kept.empty()) kept.push_back(before[rng.uniform_int(before.size())]);
    if (kept.size() == before.size()) continue;

    std::fill(mean.begin(), mean.end(), 0.0L);
    for (ActionId a : kept) {
      const auto row = mdp.row(s, a);
      for (size_t j = 0; j < row.size(); ++j) mean[j] += row[j];
    }
    const auto k = static_cast<long double>(kept.size());
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (std::binary_search(kept.begin(), kept.end(), a)) continue;
      auto row = out.mutable_row(s, a);
      for (size_t j = 0; j < row.size(); ++j) row[j] = static_cast<double>(mean[j] / k);
    }
    out.admissible[static_cast<size_t>(s)] = std::move(kept);
  }
  return out;
}

std::vector<PerturbRecord> run_perturbation(const TabularMdp& mdp,
                                            const std::vector<NamedPolicy>& policies,
                                            const std::vector<double>& sigmas,
                                            int repetitions, uint64_t seed,
                                            int workers) {
  if (repetitions < 1) throw UsageError("repetitions must be at least 1");
  const size_t per_rep = policies.size();
  std::vector<PerturbRecord> records(sigmas.size() * static_cast<size_t>(repetitions) *
                                     per_rep);
  parallel_for(sigmas.size() * static_cast<size_t>(repetitions), workers, [&](size_t job) {
    const size_t si = job / static_cast<size_t>(repetitions);
    const int rep = static_cast<int>(job % static_cast<size_t>(repetitions));
    Rng rng = Rng(seed, si).split(static_cast<uint64_t>(rep));
    const TabularMdp m = perturb_mdp(mdp, sigmas[si], rng);
    for (size_t p = 0; p < per_rep; ++p) {
      PerturbRecord& r = records[job * per_rep + p];
      r.sigma = sigmas[si];
      r.repetition = rep;
      r.policy = policies[p].name;
      try {
        r.ret = policy_evaluation_exact(m, policies[p].policy).J;
        r.length = expected_episode_length(m, policies[p].policy);
      } catch (const SingularSystemError&) {
        // Some state never terminates under this policy: its return is still
        // the (finite) survival probability, its length is unbounded.
        r.ret = policy_evaluation_iterative(m, policies[p].policy).J;
        r.length = std::numeric_limits<double>::infinity();
      }
    }
  });
  return records;
}

std::vector<PerturbSummary> summarize_perturbation(
    const std::vector<PerturbRecord>& records) {
  // Group by (sigma, policy), keeping first-seen order.
  std::vector<std::pair<double, std::string>> keys;
  std::vector<std::vector<const PerturbRecord*>> groups;
  for (const PerturbRecord& r : records) {
    size_t g = 0;
    while (g < keys.size() && !(keys[g].first == r.sigma && keys[g].second == r.policy)) ++g;
    if (g == keys.size()) {
      keys.emplace_back(r.sigma, r.policy);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  std::vector<PerturbSummary> out;
  for (size_t g = 0; g < keys.size(); ++g) {
    std::vector<double> ret, len;
    for (const PerturbRecord* r : groups[g]) {
      ret.push_back(r->ret);
      len.push_back(r->length);
    }
    PerturbSummary s;
    s.sigma = keys[g].first;
    s.policy = keys[g].second;
    s.repetitions = static_cast<int>(ret.size());
    const MeanStderr mr = mean_stderr(ret);
    const MeanStderr ml = mean_stderr(len);
    s.mean_return = mr.mean;
    s.stderr_return = mr.se;
    s.var_return = ret.size() > 1 ? mr.se * mr.se * static_cast<double>(ret.size()) : 0.0;
    s.mean_length = ml.mean;
    s.stderr_length = ml.se;
    out.push_back(s);
  }
  return out;
}

}  // namespace icu_sepsis
