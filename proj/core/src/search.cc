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
#include <sstream>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(trim(part));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("search space '" + key + "': not a number: '" + text + "'");
}

}  // namespace

void Distribution::check(const std::string& name) const {
  auto fail = [&](const std::string& why) {
    throw UsageError("search space '" + name + "': " + why);
  };
  switch (kind) {
    case DistKind::kFixed:
      if (choices.size() != 1) fail("fixed needs exactly one value");
      break;
    case DistKind::kCategorical:
      if (choices.empty()) fail("categorical needs at least one choice");
      break;
    case DistKind::kUniform:
    case DistKind::kIntUniform:
      if (!(lo < hi)) fail("bounds must satisfy a < b");
      break;
    case DistKind::kLogUniform:
    case DistKind::kIntLogUniform:
      if (!(lo < hi)) fail("bounds must satisfy a < b");
      if (!(lo > 0.0)) fail("log-scale bounds must be positive");
      break;
  }
  if ((kind == DistKind::kIntUniform || kind == DistKind::kIntLogUniform) &&
      (lo != std::floor(lo) || hi != std::floor(hi))) {
    fail("integer bounds must be integers");
  }
}

std::string Distribution::sample(Rng& rng) const {
  switch (kind) {
    case DistKind::kFixed:
      return choices.front();
    case DistKind::kCategorical:
      return choices[rng.uniform_int(choices.size())];
    case DistKind::kUniform:
      return format_double(lo + (hi - lo) * rng.uniform());
    case DistKind::kLogUniform:
      return format_double(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform()));
    case DistKind::kIntUniform: {
      const auto span = static_cast<uint64_t>(hi - lo) + 1;
      return std::to_string(static_cast<int64_t>(lo) + static_cast<int64_t>(rng.uniform_int(span)));
    }
    case DistKind::kIntLogUniform: {
      // Log-uniform on [lo, hi + 1), floored: every integer in range reachable.
      const double x = std::exp(std::log(lo) + (std::log(hi + 1.0) - std::log(lo)) * rng.uniform());
      return std::to_string(static_cast<int64_t>(std::clamp(std::floor(x), lo, hi)));
    }
  }
  return {};
}

SearchSpace parse_search_space(const std::string& text) {
  SearchSpace space;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("search space line " + std::to_string(line_no) + ": expected key = spec");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string spec = trim(line.substr(eq + 1));
    Distribution d;
    const size_t open = spec.find('(');
    if (open == std::string::npos || spec.back() != ')') {
      d.kind = DistKind::kFixed;
      d.choices = {spec};
    } else {
      const std::string name = trim(spec.substr(0, open));
      const auto args = split_args(spec.substr(open + 1, spec.size() - open - 2));
      auto bounds = [&] {
        if (args.size() != 2) {
          throw UsageError("search space '" + key + "': " + name + " takes two bounds");
        }
        d.lo = to_double(key, args[0]);
        d.hi = to_double(key, args[1]);
      };
      if (name == "uniform") {
        d.kind = DistKind::kUniform;
        bounds();
      } else if (name == "log_uniform") {
        d.kind = DistKind::kLogUniform;
        bounds();
      } else if (name == "int_uniform") {
        d.kind = DistKind::kIntUniform;
        bounds();
      } else if (name == "int_log_uniform") {
        d.kind = DistKind::kIntLogUniform;
        bounds();
      } else if (name == "categorical") {
        d.kind = DistKind::kCategorical;
        d.choices = args;
      } else if (name == "fixed") {
        d.kind = DistKind::kFixed;
        d.choices = args;
      } else {
        throw UsageError("search space '" + key + "': unknown distribution '" + name + "'");
      }
    }
    d.check(key);
    space.emplace_back(key, std::move(d));
  }
  return space;
}

std::vector<SearchResult> random_search(const Simulator& sim, const AgentConfig& base,
                                        const SearchSpace& space,
                                        const SearchOptions& options) {
  if (options.budget < 1) throw UsageError("budget must be at least 1");
  if (options.seeds_per_config < 1) throw UsageError("seeds_per_config must be at least 1");
  for (const auto& [key, d] : space) d.check(key);

  Rng sampler(options.master_seed, 0);
  std::vector<SearchResult> results(static_cast<size_t>(options.budget));
  for (size_t i = 0; i < results.size(); ++i) {
    SearchResult& r = results[i];
    r.index = i;
    r.config = base;
    for (const auto& [key, d] : space) {
      const std::string value = d.sample(sampler);
      r.sampled[key] = value;
      if (key == "algorithm") {
        r.config = AgentConfig::defaults(parse_algorithm(value));
      }
    }
    for (const auto& [key, value] : r.sampled) {
      if (key != "algorithm") r.config.set(key, value);
    }
    r.config.check();
    r.seed_scores.assign(static_cast<size_t>(options.seeds_per_config), 0.0);
  }

  const auto per = static_cast<size_t>(options.seeds_per_config);
  parallel_for(results.size() * per, options.workers, [&](size_t job) {
    SearchResult& r = results[job / per];
    const uint64_t seed = mix64(options.master_seed ^ mix64(job + 1));
    const LearningCurve c =
        train(sim, r.config, options.episodes, seed, options.max_steps);
    r.seed_scores[job % per] = final_fraction_mean(c, 0.1);
  });
  for (SearchResult& r : results) r.score = mean_stderr(r.seed_scores).mean;
  std::stable_sort(results.begin(), results.end(),
                   [](const SearchResult& a, const SearchResult& b) { return a.score > b.score; });
  return results;
}

}  // namespace icu_sepsis
