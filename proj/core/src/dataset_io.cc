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


#include <charconv>
#include <string_view>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

constexpr std::string_view kDatasetHeader = "episode_id,t,state,action,reward";

template <typename T>
bool parse_field(std::string_view cell, T& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && !cell.empty();
}

}  // namespace

size_t TrajectoryDataset::total_steps() const {
  size_t n = 0;
  for (const Episode& e : episodes) n += e.steps.size();
  return n;
}

void check_dataset(const TrajectoryDataset& data, int n_states, int n_actions) {
  for (size_t i = 0; i < data.episodes.size(); ++i) {
    const Episode& e = data.episodes[i];
    const std::string where = "episode " + std::to_string(i);
    if (e.steps.empty()) throw DataError(where + " is empty");
    for (size_t t = 0; t < e.steps.size(); ++t) {
      const Step& st = e.steps[t];
      if (n_states > 0 && (st.state < 0 || st.state >= n_states)) {
        throw DataError(where + ": state id " + std::to_string(st.state) +
                        " out of range");
      }
      if (n_actions > 0 && (st.action < 0 || st.action >= n_actions)) {
        throw DataError(where + ": action id " + std::to_string(st.action) +
                        " out of range");
      }
      const bool last = t + 1 == e.steps.size();
      if (!last && st.reward != 0.0) {
        throw DataError(where + ": nonzero reward before the final step");
      }
      if (last && st.reward != (e.survived ? 1.0 : 0.0)) {
        throw DataError(where + ": final reward disagrees with the outcome");
      }
    }
  }
}

TrajectoryDataset load_dataset(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::string_view rest(text);
  TrajectoryDataset data;
  long current_id = 0;
  bool have_episode = false;
  std::vector<bool> closed_ids;  // ids already finished, to catch reordering
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (!rest.empty()) {
    const size_t eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!have_episode && line == kDatasetHeader) continue;

    std::string_view cells[5];
    int n = 0;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      if (n == 5) fail("expected 5 columns");
      cells[n++] = line.substr(start, comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n != 5) fail("expected 5 columns");
    long id = 0;
    long t = 0;
    Step st;
    if (!parse_field(cells[0], id) || !parse_field(cells[1], t) ||
        !parse_field(cells[2], st.state) || !parse_field(cells[3], st.action) ||
        !parse_field(cells[4], st.reward)) {
      fail("unparseable row");
    }
    if (!have_episode || id != current_id) {
      if (have_episode) {
        if (static_cast<size_t>(current_id) >= closed_ids.size()) {
          closed_ids.resize(static_cast<size_t>(current_id) + 1, false);
        }
        closed_ids[static_cast<size_t>(current_id)] = true;
      }
      if (id < 0) fail("negative episode id");
      if (static_cast<size_t>(id) < closed_ids.size() &&
          closed_ids[static_cast<size_t>(id)]) {
        fail("rows of episode " + std::to_string(id) + " are not contiguous");
      }
      if (t != 0) fail("episode " + std::to_string(id) + " does not start at t=0");
      data.episodes.emplace_back();
      current_id = id;
      have_episode = true;
    } else if (t != static_cast<long>(data.episodes.back().steps.size())) {
      fail("t jumps to " + std::to_string(t) + " in episode " +
           std::to_string(id));
    }
    data.episodes.back().steps.push_back(st);
  }
  for (Episode& e : data.episodes) e.survived = e.steps.back().reward == 1.0;
  check_dataset(data);
  return data;
}

void save_dataset(const TrajectoryDataset& data, const fs::path& path) {
  check_dataset(data);
  std::string out(kDatasetHeader);
  out.push_back('\n');
  for (size_t i = 0; i < data.episodes.size(); ++i) {
    const auto& steps = data.episodes[i].steps;
    for (size_t t = 0; t < steps.size(); ++t) {
      out += std::to_string(i) + ',' + std::to_string(t) + ',' +
             std::to_string(steps[t].state) + ',' +
             std::to_string(steps[t].action) + ',' +
             format_double(steps[t].reward) + '\n';
    }
  }
  write_text_file(path, out);
}

}  // namespace icu_sepsis
