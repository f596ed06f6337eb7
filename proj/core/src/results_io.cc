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

std::string num(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

}  // namespace

void write_curve_csv(const LearningCurve& curve, const fs::path& path) {
  std::string out = "episode,return,length,truncated\n";
  for (size_t e = 0; e < curve.episodes(); ++e) {
    out += std::to_string(e + 1) + ',' + num(curve.returns[e]) + ',' +
           std::to_string(curve.lengths[e]) + ',' +
           std::to_string(static_cast<int>(curve.truncated[e])) + '\n';
  }
  write_text_file(path, out);
}

void write_curves_csv(const std::vector<LearningCurve>& curves, const fs::path& path) {
  std::string out = "agent,seed,episode,return,length,truncated\n";
  for (const LearningCurve& c : curves) {
    const std::string prefix = c.agent + ',' + std::to_string(c.seed) + ',';
    for (size_t e = 0; e < c.episodes(); ++e) {
      out += prefix + std::to_string(e + 1) + ',' + num(c.returns[e]) + ',' +
             std::to_string(c.lengths[e]) + ',' +
             std::to_string(static_cast<int>(c.truncated[e])) + '\n';
    }
  }
  write_text_file(path, out);
}

void write_summary_csv(const CurveSummary& s, const fs::path& path) {
  std::string out =
      "episode,mean_return,stderr_return,mean_length,stderr_length,runs,smoothing_window\n";
  const std::string tail = ',' + std::to_string(s.runs) + ',' +
                           std::to_string(s.smoothing_window) + '\n';
  for (size_t e = 0; e < s.mean_return.size(); ++e) {
    out += std::to_string(e + 1) + ',' + num(s.mean_return[e]) + ',' +
           num(s.stderr_return[e]) + ',' + num(s.mean_length[e]) + ',' +
           num(s.stderr_length[e]) + tail;
  }
  write_text_file(path, out);
}

ConvergenceRow convergence_row(const std::string& algorithm,
                               const std::vector<LearningCurve>& curves,
                               const ConvergenceRule& rule) {
  ConvergenceRow row;
  row.algorithm = algorithm;
  row.total_runs = static_cast<int>(curves.size());
  double episodes = 0.0, steps = 0.0, ret = 0.0;
  for (const LearningCurve& c : curves) {
    const ConvergenceResult r = detect_convergence(c, rule);
    if (converged_at_end(c, rule)) ++row.converged_at_end_runs;
    if (!r.episode) continue;
    ++row.converged_runs;
    episodes += static_cast<double>(*r.episode);
    steps += static_cast<double>(r.steps);
    ret += r.average_return;
  }
  if (row.converged_runs > 0) {
    const double n = row.converged_runs;
    row.episodes_k = episodes / n / 1e3;
    row.steps_m = steps / n / 1e6;
    row.average_return = ret / n;
  } else {
    row.episodes_k = row.steps_m = row.average_return = std::nan("");
  }
  return row;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const fs::path& path) {
  std::string out =
      "algorithm,episodes_k,steps_m,average_return,converged_runs,total_runs,"
      "converged_at_end_runs\n";
  for (const ConvergenceRow& r : rows) {
    out += r.algorithm + ',' + num(r.episodes_k) + ',' + num(r.steps_m) + ',' +
           num(r.average_return) + ',' + std::to_string(r.converged_runs) + ',' +
           std::to_string(r.total_runs) + ',' + std::to_string(r.converged_at_end_runs) +
           '\n';
  }
  write_text_file(path, out);
}

void write_perturbation_csv(const std::vector<PerturbRecord>& records,
                            const fs::path& path) {
  std::string out = "sigma,repetition,policy,return,length\n";
  for (const PerturbRecord& r : records) {
    out += num(r.sigma) + ',' + std::to_string(r.repetition) + ',' + r.policy + ',' +
           num(r.ret) + ',' + num(r.length) + '\n';
  }
  write_text_file(path, out);
}

void write_perturbation_summary_csv(const std::vector<PerturbSummary>& rows,
                                    const fs::path& path) {
  std::string out =
      "sigma,policy,repetitions,mean_return,var_return,stderr_return,mean_length,"
      "stderr_length\n";
  for (const PerturbSummary& s : rows) {
    out += num(s.sigma) + ',' + s.policy + ',' + std::to_string(s.repetitions) + ',' +
           num(s.mean_return) + ',' + num(s.var_return) + ',' + num(s.stderr_return) +
           ',' + num(s.mean_length) + ',' + num(s.stderr_length) + '\n';
  }
  write_text_file(path, out);
}

void write_search_csv(const std::vector<SearchResult>& results, const fs::path& path) {
  std::vector<std::string> keys;
  for (const SearchResult& r : results) {
    for (const auto& [k, v] : r.sampled) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  std::string out = "rank,index,score";
  for (const std::string& k : keys) out += ',' + k;
  out += '\n';
  for (size_t i = 0; i < results.size(); ++i) {
    const SearchResult& r = results[i];
    out += std::to_string(i + 1) + ',' + std::to_string(r.index) + ',' + num(r.score);
    for (const std::string& k : keys) {
      const auto it = r.sampled.find(k);
      out += ',' + (it == r.sampled.end() ? std::string{} : it->second);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace icu_sepsis
