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

// Readers and writers for the published parameter tables.
//
// Transition table: n_states * n_actions rows, n_states columns; p(s, a, s')
// sits in column s' of row s * n_actions + a. Reward and initial-distribution
// tables: one row, n_states columns. Centroid table: n_states rows, one column
// per feature. All tables are comma-separated, LF-terminated, and may be
// gzip-compressed (".gz" suffix). Numbers are written in the shortest form
// that parses back to the same double.

#ifndef ICU_SEPSIS_IO_H_
#define ICU_SEPSIS_IO_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icu_sepsis/dataset.h"
#include "icu_sepsis/mdp.h"
#include "icu_sepsis/policy.h"

namespace icu_sepsis {

namespace fs = std::filesystem;

// Whether the first line of a table is a header. kAuto treats the first line
// as a header when its first cell does not parse as a number.
enum class HeaderMode { kAuto, kPresent, kAbsent };

DenseMatrix read_csv_table(const fs::path& path,
                           HeaderMode header = HeaderMode::kAuto);
void write_csv_table(const fs::path& path, const DenseMatrix& table);
void write_csv_values(const fs::path& path, int rows, int cols,
                      std::span<const double> values);

// Shortest decimal text that round-trips to the same double; "0" for zero.
std::string format_double(double value);

// Reads a whole file, inflating it when the name ends in ".gz".
std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& contents);

// ---------------------------------------------------------------------------
// Bundles

struct MdpFileBundle {
  fs::path transitions_path;
  fs::path reward_path;
  fs::path initial_dist_path;
  std::optional<fs::path> admissible_path;
  std::optional<fs::path> centroids_path;
  std::optional<fs::path> metadata_path;
  std::optional<fs::path> expert_policy_path;

  // Resolves the conventional file names inside `dir`, preferring "x.csv" over
  // "x.csv.gz". Optional tables are set only when present on disk.
  static MdpFileBundle in_directory(const fs::path& dir);

  // Every path set to "<dir>/<name>.csv" (".csv.gz" when compress is true).
  static MdpFileBundle for_writing(const fs::path& dir, bool compress = false);
};

struct LoadOptions {
  HeaderMode header = HeaderMode::kAuto;
  bool renormalize = false;
  double row_sum_tolerance = 1e-6;
};

struct TerminalIds {
  StateId survival = -1;
  StateId death = -1;
  StateId absorbing = -1;
};

// Structural detection: survival is the unique state with reward 1, absorbing
// the unique state that self-loops with probability 1 under every action, and
// death the remaining state that moves to absorbing with probability 1 under
// every action. Throws DataError naming the candidates when ambiguous.
TerminalIds detect_terminal_states(const TabularMdp& mdp);

// When no sidecar is available: a is admissible at s iff its row differs by
// more than 1e-9 from the mean of the distinct rows at s, or every row at s is
// identical (then all actions are admissible).
std::vector<std::vector<ActionId>> infer_admissible_sets(const TabularMdp& mdp);

TabularMdp load_mdp(const MdpFileBundle& bundle, const LoadOptions& options = {});

// Writes every table plus the metadata file. The centroid table is written
// only when the MDP carries centroids; the expert policy only when given.
void save_mdp(const TabularMdp& mdp, const MdpFileBundle& bundle,
              const Policy* expert_policy = nullptr);

// All-zero rows (the published table leaves terminal states empty) become
// uniform. With `mdp` given, an all-zero row at a live state is a DataError.
std::optional<Policy> load_expert_policy(const MdpFileBundle& bundle,
                                         const TabularMdp* mdp = nullptr,
                                         HeaderMode header = HeaderMode::kAuto);

// ---------------------------------------------------------------------------
// Admissible-actions sidecar

// Three grammars are accepted:
//   kIndexed      one record per state, "s: a a a"
//   kPerLine      one whitespace-separated line per state, in state order
//   kCountsHeader a first line with the set size of every state, then one
//                 line per state (the layout of the published file)
enum class AdmissibleFormat { kIndexed, kPerLine, kCountsHeader };

const char* to_string(AdmissibleFormat format);

struct AdmissibleSets {
  std::vector<std::vector<ActionId>> sets;  // sorted per state
  AdmissibleFormat format = AdmissibleFormat::kIndexed;
};

// n_states <= 0 means "infer from the file". Throws DataError on duplicate
// or out-of-range action ids and on record counts that do not match.
AdmissibleSets parse_admissible(std::istream& in, int n_actions,
                                int n_states = 0);
AdmissibleSets read_admissible_file(const fs::path& path, int n_actions,
                                    int n_states = 0);
// Always writes kIndexed.
void write_admissible_file(const fs::path& path,
                           const std::vector<std::vector<ActionId>>& sets);

// ---------------------------------------------------------------------------
// Metadata: flat "key=value" lines, '#' comments allowed.

using Metadata = std::map<std::string, std::string>;
Metadata read_metadata(const fs::path& path);
void write_metadata(const fs::path& path, const Metadata& metadata);

// ---------------------------------------------------------------------------
// Trajectory datasets: header "episode_id,t,state,action,reward", one row per
// step, episodes contiguous, t counting 0, 1, 2, ... within each episode.

TrajectoryDataset load_dataset(const fs::path& path);
void save_dataset(const TrajectoryDataset& data, const fs::path& path);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_IO_H_
