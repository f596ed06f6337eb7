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

#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"

namespace icu_sepsis {
namespace {

void check_rule(const ConvergenceRule& rule) {
  if (rule.short_window < 1 || rule.long_window < rule.short_window) {
    throw UsageError("convergence windows must satisfy 1 <= short <= long");
  }
  if (!(rule.rel_tol >= 0.0)) throw UsageError("rel_tol must be non-negative");
}

std::vector<long double> prefix(const std::vector<double>& xs) {
  std::vector<long double> p(xs.size() + 1, 0.0L);
  for (size_t i = 0; i < xs.size(); ++i) p[i + 1] = p[i] + xs[i];
  return p;
}

bool holds(const std::vector<long double>& p, size_t e, const ConvergenceRule& rule,
           long double* long_mean) {
  const auto s = static_cast<size_t>(rule.short_window);
  const auto l = static_cast<size_t>(rule.long_window);
  const long double ms = (p[e] - p[e - s]) / static_cast<long double>(s);
  const long double ml = (p[e] - p[e - l]) / static_cast<long double>(l);
  if (long_mean) *long_mean = ml;
  return std::fabs(ms - ml) <= static_cast<long double>(rule.rel_tol) * std::fabs(ml);
}

}  // namespace

ConvergenceResult detect_convergence(const LearningCurve& curve,
                                     const ConvergenceRule& rule) {
  check_rule(rule);
  ConvergenceResult out;
  const size_t n = curve.returns.size();
  const auto l = static_cast<size_t>(rule.long_window);
  if (n < l) return out;
  const auto p = prefix(curve.returns);
  for (size_t e = l; e <= n; ++e) {
    long double ml = 0.0L;
    if (!holds(p, e, rule, &ml)) continue;
    out.episode = static_cast<int64_t>(e);
    out.average_return = static_cast<double>(ml);
    for (size_t i = 0; i < e; ++i) out.steps += curve.lengths[i];
    return out;
  }
  return out;
}

bool converged_at_end(const LearningCurve& curve, const ConvergenceRule& rule) {
  check_rule(rule);
  const size_t n = curve.returns.size();
  if (n < static_cast<size_t>(rule.long_window)) return false;
  return holds(prefix(curve.returns), n, rule, nullptr);
}

double final_window_mean(const LearningCurve& curve, size_t window) {
  const size_t n = curve.returns.size();
  if (n == 0) return 0.0;
  const size_t w = std::clamp<size_t>(window, 1, n);
  long double s = 0.0L;
  for (size_t i = n - w; i < n; ++i) s += curve.returns[i];
  return static_cast<double>(s / static_cast<long double>(w));
}

double final_fraction_mean(const LearningCurve& curve, double fraction) {
  const auto n = static_cast<double>(curve.returns.size());
  return final_window_mean(curve, static_cast<size_t>(std::ceil(fraction * n)));
}

double mean_length(const LearningCurve& curve) {
  if (curve.lengths.empty()) return 0.0;
  long double s = 0.0L;
  for (int x : curve.lengths) s += x;
  return static_cast<double>(s / static_cast<long double>(curve.lengths.size()));
}

}  // namespace icu_sepsis
