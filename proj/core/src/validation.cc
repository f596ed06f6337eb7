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

#include "icu_sepsis/validation.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icu_sepsis {

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kShape: return "shape";
    case ViolationKind::kTerminalIds: return "terminal_ids";
    case ViolationKind::kProbabilityRange: return "probability_range";
    case ViolationKind::kRowSum: return "row_sum";
    case ViolationKind::kInitialDistSum: return "initial_dist_sum";
    case ViolationKind::kInitialDistOnTerminal: return "initial_dist_on_terminal";
    case ViolationKind::kReward: return "reward";
    case ViolationKind::kTerminalRow: return "terminal_row";
    case ViolationKind::kEmptyAdmissibleSet: return "empty_admissible_set";
    case ViolationKind::kAdmissibleId: return "admissible_id";
    case ViolationKind::kInadmissibleRowNotMean: return "inadmissible_row_not_mean";
    case ViolationKind::kGamma: return "gamma";
  }
  return "unknown";
}

int ValidationReport::count(ViolationKind kind) const {
  return static_cast<int>(std::count_if(
      violations.begin(), violations.end(),
      [kind](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << violations.size() << " violation(s)\n";
  for (const auto& v : violations) {
    out << to_string(v.kind);
    if (v.state >= 0) out << " s=" << v.state;
    if (v.action >= 0) out << " a=" << v.action;
    out << " magnitude=" << v.magnitude;
    if (!v.detail.empty()) out << " (" << v.detail << ")";
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_mdp(const TabularMdp& mdp,
                              const ValidationTolerances& tol) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, StateId s, ActionId a, double mag,
                 std::string detail = {}) {
    report.violations.push_back({kind, s, a, mag, std::move(detail)});
  };

  const auto ns = static_cast<size_t>(mdp.n_states);
  const auto na = static_cast<size_t>(mdp.n_actions);
  if (mdp.n_states <= 0 || mdp.n_actions <= 0 ||
      mdp.transitions.size() != ns * na * ns ||
      mdp.reward_by_state.size() != ns || mdp.initial_dist.size() != ns ||
      mdp.admissible.size() != ns) {
    add(ViolationKind::kShape, -1, -1, 0.0, "array sizes disagree with counts");
    return report;
  }
  if (mdp.centroids && mdp.centroids->rows != mdp.n_states) {
    add(ViolationKind::kShape, -1, -1, 0.0, "centroid table row count");
  }

  const StateId terminals[] = {mdp.survival_state, mdp.death_state,
                               mdp.absorbing_state};
  for (StateId t : terminals) {
    if (t < 0 || t >= mdp.n_states) {
      add(ViolationKind::kTerminalIds, t, -1, 0.0, "terminal id out of range");
      return report;
    }
  }
  if (mdp.survival_state == mdp.death_state ||
      mdp.survival_state == mdp.absorbing_state ||
      mdp.death_state == mdp.absorbing_state) {
    add(ViolationKind::kTerminalIds, -1, -1, 0.0, "terminal ids not distinct");
    return report;
  }

  if (!(mdp.gamma >= 0.0 && mdp.gamma <= 1.0)) {
    add(ViolationKind::kGamma, -1, -1, mdp.gamma);
  }

  for (StateId s = 0; s < mdp.n_states; ++s) {
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      auto row = mdp.row(s, a);
      long double sum = 0.0L;
      double worst = 0.0;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) worst = std::max(worst, std::abs(p));
        sum += p;
      }
      if (worst > 0.0 || std::isnan(static_cast<double>(sum))) {
        add(ViolationKind::kProbabilityRange, s, a, worst);
      }
      const double err = std::abs(static_cast<double>(sum - 1.0L));
      if (!(err <= tol.row_sum)) add(ViolationKind::kRowSum, s, a, err);
    }
  }

  long double d0_sum = 0.0L;
  for (StateId s = 0; s < mdp.n_states; ++s) {
    const double p = mdp.initial_dist[static_cast<size_t>(s)];
    if (!(p >= 0.0 && p <= 1.0)) {
      add(ViolationKind::kProbabilityRange, s, -1, p, "initial_dist entry");
    }
    d0_sum += p;
  }
  const double d0_err = std::abs(static_cast<double>(d0_sum - 1.0L));
  if (!(d0_err <= tol.initial_dist_sum)) {
    add(ViolationKind::kInitialDistSum, -1, -1, d0_err);
  }
  for (StateId t : terminals) {
    const double p = mdp.initial_dist[static_cast<size_t>(t)];
    if (p != 0.0) add(ViolationKind::kInitialDistOnTerminal, t, -1, p);
  }

  for (StateId s = 0; s < mdp.n_states; ++s) {
    const double want = s == mdp.survival_state ? 1.0 : 0.0;
    const double got = mdp.reward_by_state[static_cast<size_t>(s)];
    if (got != want) add(ViolationKind::kReward, s, -1, std::abs(got - want));
  }

  for (StateId t : terminals) {
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      const double p = mdp.p(t, a, mdp.absorbing_state);
      if (p != 1.0) add(ViolationKind::kTerminalRow, t, a, std::abs(1.0 - p));
    }
  }

  for (StateId s = 0; s < mdp.n_states; ++s) {
    const auto& adm = mdp.admissible[static_cast<size_t>(s)];
    bool ids_ok = std::is_sorted(adm.begin(), adm.end()) &&
                  std::adjacent_find(adm.begin(), adm.end()) == adm.end();
    for (ActionId a : adm) {
      if (a < 0 || a >= mdp.n_actions) ids_ok = false;
    }
    if (!ids_ok) {
      add(ViolationKind::kAdmissibleId, s, -1, 0.0,
          "admissible ids must be sorted, unique, and in range");
      continue;
    }
    if (mdp.is_terminal(s)) continue;
    if (adm.empty()) {
      add(ViolationKind::kEmptyAdmissibleSet, s, -1, 0.0);
      continue;
    }
    if (adm.size() == na) continue;
    std::vector<long double> mean(ns, 0.0L);
    for (ActionId a : adm) {
      auto row = mdp.row(s, a);
      for (size_t j = 0; j < ns; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= static_cast<long double>(adm.size());
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (mdp.is_admissible(s, a)) continue;
      auto row = mdp.row(s, a);
      double worst = 0.0;
      for (size_t j = 0; j < ns; ++j) {
        worst = std::max(worst, std::abs(static_cast<double>(row[j] - mean[j])));
      }
      if (!(worst <= tol.inadmissible_mean)) {
        add(ViolationKind::kInadmissibleRowNotMean, s, a, worst);
      }
    }
  }
  return report;
}

}  // namespace icu_sepsis
