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

#ifndef ICU_SEPSIS_VALIDATION_H_
#define ICU_SEPSIS_VALIDATION_H_

#include <string>
#include <vector>

#include "icu_sepsis/mdp.h"

namespace icu_sepsis {

enum class ViolationKind {
  kShape,
  kTerminalIds,
  kProbabilityRange,
  kRowSum,
  kInitialDistSum,
  kInitialDistOnTerminal,
  kReward,
  kTerminalRow,
  kEmptyAdmissibleSet,
  kAdmissibleId,
  kInadmissibleRowNotMean,
  kGamma,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  StateId state = -1;   // -1 when not tied to a state
  ActionId action = -1; // -1 when not tied to an action
  double magnitude = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  int count(ViolationKind kind) const;
  std::string to_text() const;
};

struct ValidationTolerances {
  double row_sum = 1e-6;
  double initial_dist_sum = 1e-6;
  double inadmissible_mean = 1e-9;
};

// Checks every structural invariant and reports each violation with its
// location and magnitude. Never throws for a malformed model; if the shape is
// inconsistent the report contains only shape violations.
ValidationReport validate_mdp(const TabularMdp& mdp,
                              const ValidationTolerances& tol = {});

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_VALIDATION_H_
