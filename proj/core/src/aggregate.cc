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


#include <cmath>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"

namespace icu_sepsis {
namespace {

std::vector<double> trailing_mean(const std::vector<double>& xs, int window) {
  if (window <= 1) return xs;
  std::vector<double> out(xs.size());
  long double run = 0.0L;
  for (size_t i = 0; i < xs.size(); ++i) {
    run += xs[i];
    if (i >= static_cast<size_t>(window)) run -= xs[i - static_cast<size_t>(window)];
    const size_t n = std::min(i + 1, static_cast<size_t>(window));
    out[i] = static_cast<double>(run / static_cast<long double>(n));
  }
  return out;
}

}  // namespace

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  const auto n = static_cast<double>(xs.size());
  long double s = 0.0L;
  for (double x : xs) s += x;
  out.mean = static_cast<double>(s / xs.size());
  if (xs.size() < 2) return out;
  long double ss = 0.0L;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(static_cast<double>(ss) / (n - 1.0)) / std::sqrt(n);
  return out;
}

CurveSummary aggregate(const std::vector<LearningCurve>& curves, int smoothing_window) {
  CurveSummary out;
  out.runs = static_cast<int>(curves.size());
  out.smoothing_window = std::max(1, smoothing_window);
  if (curves.empty()) return out;
  const size_t n = curves.front().episodes();
  for (const auto& c : curves) {
    if (c.episodes() != n) throw UsageError("curves have different lengths");
  }
  std::vector<std::vector<double>> ret, len;
  for (const auto& c : curves) {
    ret.push_back(trailing_mean(c.returns, out.smoothing_window));
    len.push_back(trailing_mean(std::vector<double>(c.lengths.begin(), c.lengths.end()),
                                out.smoothing_window));
  }
  out.mean_return.resize(n);
  out.stderr_return.resize(n);
  out.mean_length.resize(n);
  out.stderr_length.resize(n);
  std::vector<double> col(curves.size());
  for (size_t e = 0; e < n; ++e) {
    for (size_t k = 0; k < curves.size(); ++k) col[k] = ret[k][e];
    MeanStderr r = mean_stderr(col);
    out.mean_return[e] = r.mean;
    out.stderr_return[e] = r.se;
    for (size_t k = 0; k < curves.size(); ++k) col[k] = len[k][e];
    r = mean_stderr(col);
    out.mean_length[e] = r.mean;
    out.stderr_length[e] = r.se;
  }
  return out;
}

}  // namespace icu_sepsis
