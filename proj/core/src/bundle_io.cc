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
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

constexpr double kUnitTolerance = 1e-12;

fs::path resolve(const fs::path& dir, const std::string& stem) {
  const fs::path plain = dir / (stem + ".csv");
  if (fs::exists(plain)) return plain;
  const fs::path gz = dir / (stem + ".csv.gz");
  if (fs::exists(gz)) return gz;
  return plain;
}

std::optional<fs::path> resolve_optional(const fs::path& dir,
                                         const std::string& stem) {
  fs::path p = resolve(dir, stem);
  if (fs::exists(p)) return p;
  return std::nullopt;
}

std::string join_ids(const std::vector<StateId>& ids) {
  std::ostringstream out;
  for (size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
  return "[" + out.str() + "]";
}

int metadata_int(const Metadata& md, const std::string& key) {
  const auto it = md.find(key);
  if (it == md.end()) throw DataError("metadata missing key '" + key + "'");
  try {
    size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw DataError("metadata key '" + key + "' is not an integer");
  }
}

DenseMatrix read_vector_table(const fs::path& path, HeaderMode header,
                              int n_states, const char* what) {
  DenseMatrix t = read_csv_table(path, header);
  if (t.rows != 1 || t.cols != n_states) {
    throw DataError(std::string(what) + " table must have 1 row and " +
                    std::to_string(n_states) + " columns, found " +
                    std::to_string(t.rows) + "x" + std::to_string(t.cols));
  }
  return t;
}

}  // namespace

MdpFileBundle MdpFileBundle::in_directory(const fs::path& dir) {
  MdpFileBundle b;
  b.transitions_path = resolve(dir, "transitions");
  b.reward_path = resolve(dir, "rewards");
  b.initial_dist_path = resolve(dir, "initial_dist");
  if (fs::exists(dir / "admissible_actions.txt")) {
    b.admissible_path = dir / "admissible_actions.txt";
  }
  if (fs::exists(dir / "metadata.txt")) b.metadata_path = dir / "metadata.txt";
  b.centroids_path = resolve_optional(dir, "centroids");
  b.expert_policy_path = resolve_optional(dir, "expert_policy");
  return b;
}

MdpFileBundle MdpFileBundle::for_writing(const fs::path& dir, bool compress) {
  const std::string ext = compress ? ".csv.gz" : ".csv";
  MdpFileBundle b;
  b.transitions_path = dir / ("transitions" + ext);
  b.reward_path = dir / ("rewards" + ext);
  b.initial_dist_path = dir / ("initial_dist" + ext);
  b.admissible_path = dir / "admissible_actions.txt";
  b.centroids_path = dir / ("centroids" + ext);
  b.metadata_path = dir / "metadata.txt";
  b.expert_policy_path = dir / ("expert_policy" + ext);
  return b;
}

TerminalIds detect_terminal_states(const TabularMdp& mdp) {
  std::vector<StateId> rewarding;
  std::vector<StateId> self_loops;
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (mdp.reward_by_state[static_cast<size_t>(s)] == 1.0) rewarding.push_back(s);
    bool loops = true;
    for (ActionId a = 0; a < mdp.n_actions && loops; ++a) {
      loops = std::abs(mdp.p(s, a, s) - 1.0) <= kUnitTolerance;
    }
    if (loops) self_loops.push_back(s);
  }
  if (rewarding.size() != 1) {
    throw DataError("survival state detection: expected one state with reward "
                    "1, candidates " + join_ids(rewarding));
  }
  if (self_loops.size() != 1) {
    throw DataError("absorbing state detection: expected one self-looping "
                    "state, candidates " + join_ids(self_loops));
  }
  TerminalIds ids;
  ids.survival = rewarding.front();
  ids.absorbing = self_loops.front();
  std::vector<StateId> feeders;
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (s == ids.absorbing || s == ids.survival) continue;
    bool feeds = true;
    for (ActionId a = 0; a < mdp.n_actions && feeds; ++a) {
      feeds = std::abs(mdp.p(s, a, ids.absorbing) - 1.0) <= kUnitTolerance;
    }
    if (feeds) feeders.push_back(s);
  }
  if (feeders.size() != 1) {
    throw DataError("death state detection: expected one state that always "
                    "enters the absorbing state, candidates " +
                    join_ids(feeders));
  }
  ids.death = feeders.front();
  return ids;
}

std::vector<std::vector<ActionId>> infer_admissible_sets(const TabularMdp& mdp) {
  constexpr double kSameRow = 1e-12;
  constexpr double kDiffersFromMean = 1e-9;
  const auto ns = static_cast<size_t>(mdp.n_states);
  std::vector<std::vector<ActionId>> sets(ns);
  auto max_abs_diff = [&](std::span<const double> x, std::span<const double> y) {
    double worst = 0.0;
    for (size_t j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(x[j] - y[j]));
    return worst;
  };
  std::vector<ActionId> all(static_cast<size_t>(mdp.n_actions));
  for (ActionId a = 0; a < mdp.n_actions; ++a) all[static_cast<size_t>(a)] = a;
  std::vector<double> mean(ns);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) {
      sets[static_cast<size_t>(s)] = all;
      continue;
    }
    std::vector<ActionId> distinct;
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](ActionId b) {
        return max_abs_diff(mdp.row(s, a), mdp.row(s, b)) <= kSameRow;
      });
      if (!seen) distinct.push_back(a);
    }
    if (distinct.size() == 1) {
      sets[static_cast<size_t>(s)] = all;
      continue;
    }
    for (size_t j = 0; j < ns; ++j) {
      long double acc = 0.0L;
      for (ActionId b : distinct) acc += mdp.row(s, b)[j];
      mean[j] = static_cast<double>(acc / static_cast<long double>(distinct.size()));
    }
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (max_abs_diff(mdp.row(s, a), mean) > kDiffersFromMean) {
        sets[static_cast<size_t>(s)].push_back(a);
      }
    }
  }
  return sets;
}

TabularMdp load_mdp(const MdpFileBundle& bundle, const LoadOptions& options) {
  DenseMatrix tx = read_csv_table(bundle.transitions_path, options.header);
  const int n_states = tx.cols;
  if (n_states <= 0 || tx.rows == 0) {
    throw DataError("transition table is empty");
  }
  if (tx.rows % n_states != 0) {
    throw DataError("transition table has " + std::to_string(tx.rows) +
                    " rows, not a multiple of " + std::to_string(n_states) +
                    " states");
  }
  const int n_actions = tx.rows / n_states;

  Metadata md;
  if (bundle.metadata_path) md = read_metadata(*bundle.metadata_path);
  if (md.count("n_states") && metadata_int(md, "n_states") != n_states) {
    throw DataError("metadata n_states disagrees with the transition table");
  }
  if (md.count("n_actions") && metadata_int(md, "n_actions") != n_actions) {
    throw DataError("transition table has " + std::to_string(tx.rows) +
                    " rows, expected n_states * n_actions = " +
                    std::to_string(n_states * metadata_int(md, "n_actions")));
  }

  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.transitions = std::move(tx.values);
  mdp.reward_by_state = read_vector_table(bundle.reward_path, options.header,
                                          n_states, "reward").values;
  mdp.initial_dist = read_vector_table(bundle.initial_dist_path, options.header,
                                       n_states, "initial distribution").values;

  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      auto row = mdp.mutable_row(s, a);
      long double sum = 0.0L;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw DataError("transition entry outside [0, 1] at s=" +
                          std::to_string(s) + " a=" + std::to_string(a));
        }
        sum += p;
      }
      const double err = std::abs(static_cast<double>(sum - 1.0L));
      if (err <= options.row_sum_tolerance) continue;
      if (!options.renormalize || sum <= 0.0L) {
        throw DataError("transition row s=" + std::to_string(s) + " a=" +
                        std::to_string(a) + " sums to " +
                        std::to_string(static_cast<double>(sum)));
      }
      for (double& p : row) p = static_cast<double>(p / sum);
    }
  }

  if (md.count("survival_state")) {
    mdp.survival_state = metadata_int(md, "survival_state");
    mdp.death_state = metadata_int(md, "death_state");
    mdp.absorbing_state = metadata_int(md, "absorbing_state");
  } else {
    const TerminalIds ids = detect_terminal_states(mdp);
    mdp.survival_state = ids.survival;
    mdp.death_state = ids.death;
    mdp.absorbing_state = ids.absorbing;
  }
  if (auto it = md.find("gamma"); it != md.end()) {
    try {
      mdp.gamma = std::stod(it->second);
    } catch (const std::exception&) {
      throw DataError("metadata gamma is not a number");
    }
  }
  if (md.count("tau")) mdp.provenance.tau = metadata_int(md, "tau");
  mdp.provenance.source = md.count("source") ? md.at("source") : "loaded";

  if (bundle.admissible_path) {
    mdp.admissible =
        read_admissible_file(*bundle.admissible_path, n_actions, n_states).sets;
    mdp.provenance.admissible_source = "explicit";
  } else {
    mdp.admissible = infer_admissible_sets(mdp);
    mdp.provenance.admissible_source = "heuristic";
  }

  if (bundle.centroids_path) {
    DenseMatrix c = read_csv_table(*bundle.centroids_path, options.header);
    if (c.rows != n_states) {
      throw DataError("centroid table has " + std::to_string(c.rows) +
                      " rows, expected " + std::to_string(n_states));
    }
    mdp.centroids = std::move(c);
  }
  return mdp;
}

void save_mdp(const TabularMdp& mdp, const MdpFileBundle& bundle,
              const Policy* expert_policy) {
  const fs::path dir = bundle.transitions_path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  write_csv_values(bundle.transitions_path, mdp.n_states * mdp.n_actions,
                   mdp.n_states, mdp.transitions);
  write_csv_values(bundle.reward_path, 1, mdp.n_states, mdp.reward_by_state);
  write_csv_values(bundle.initial_dist_path, 1, mdp.n_states, mdp.initial_dist);
  if (bundle.admissible_path) {
    write_admissible_file(*bundle.admissible_path, mdp.admissible);
  }
  if (mdp.centroids && bundle.centroids_path) {
    write_csv_table(*bundle.centroids_path, *mdp.centroids);
  }
  if (expert_policy != nullptr && bundle.expert_policy_path) {
    write_csv_table(*bundle.expert_policy_path, expert_policy->matrix());
  }
  if (bundle.metadata_path) {
    Metadata md;
    md["format_version"] = "1";
    md["n_states"] = std::to_string(mdp.n_states);
    md["n_actions"] = std::to_string(mdp.n_actions);
    md["survival_state"] = std::to_string(mdp.survival_state);
    md["death_state"] = std::to_string(mdp.death_state);
    md["absorbing_state"] = std::to_string(mdp.absorbing_state);
    md["gamma"] = format_double(mdp.gamma);
    if (mdp.provenance.tau) md["tau"] = std::to_string(*mdp.provenance.tau);
    md["source"] = mdp.provenance.source;
    md["admissible_source"] = mdp.provenance.admissible_source;
    write_metadata(*bundle.metadata_path, md);
  }
}

std::optional<Policy> load_expert_policy(const MdpFileBundle& bundle,
                                         const TabularMdp* mdp, HeaderMode header) {
  if (!bundle.expert_policy_path) return std::nullopt;
  Policy pi = Policy::from_matrix(read_csv_table(*bundle.expert_policy_path, header));
  if (mdp != nullptr &&
      (pi.n_states() != mdp->n_states || pi.n_actions() != mdp->n_actions)) {
    throw DataError("expert policy table is " + std::to_string(pi.n_states()) + "x" +
                    std::to_string(pi.n_actions()) + ", model is " +
                    std::to_string(mdp->n_states) + "x" + std::to_string(mdp->n_actions));
  }
  for (StateId s = 0; s < pi.n_states(); ++s) {
    auto row = pi.mutable_row(s);
    if (std::any_of(row.begin(), row.end(), [](double p) { return p != 0.0; })) continue;
    if (mdp != nullptr && !mdp->is_terminal(s)) {
      throw DataError("expert policy row " + std::to_string(s) +
                      " is empty at a live state");
    }
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
  }
  pi.check(1e-6);
  return pi;
}

Metadata read_metadata(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  Metadata md;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected key=value");
    }
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t");
      const size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    md[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return md;
}

void write_metadata(const fs::path& path, const Metadata& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) out += k + "=" + v + "\n";
  write_text_file(path, out);
}

}  // namespace icu_sepsis
