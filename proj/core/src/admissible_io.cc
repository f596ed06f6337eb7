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
#include <fstream>
#include <sstream>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

struct Line {
  int number;
  std::string text;
};

std::vector<long> parse_ints(const std::string& text, int line_no) {
  std::istringstream in(text);
  std::vector<long> out;
  std::string tok;
  while (in >> tok) {
    size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw DataError("admissible actions line " + std::to_string(line_no) +
                      ": not an integer: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ActionId> to_set(const std::vector<long>& ids, int n_actions,
                             int state) {
  std::vector<ActionId> set;
  set.reserve(ids.size());
  for (long a : ids) {
    if (a < 0 || a >= n_actions) {
      throw DataError("state " + std::to_string(state) + ": action id " +
                      std::to_string(a) + " out of range [0, " +
                      std::to_string(n_actions) + ")");
    }
    set.push_back(static_cast<ActionId>(a));
  }
  std::sort(set.begin(), set.end());
  if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
    throw DataError("state " + std::to_string(state) +
                    ": duplicate action in admissible list");
  }
  return set;
}

}  // namespace

const char* to_string(AdmissibleFormat format) {
  switch (format) {
    case AdmissibleFormat::kIndexed: return "indexed";
    case AdmissibleFormat::kPerLine: return "per-line";
    case AdmissibleFormat::kCountsHeader: return "counts-header";
  }
  return "unknown";
}

AdmissibleSets parse_admissible(std::istream& in, int n_actions, int n_states) {
  std::vector<Line> lines;
  std::string text;
  int line_no = 0;
  bool indexed = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const size_t first = text.find_first_not_of(" \t");
    if (first == std::string::npos || text[first] == '#') continue;
    indexed = indexed || text.find(':') != std::string::npos;
    lines.push_back({line_no, text});
  }

  AdmissibleSets result;
  if (indexed) {
    result.format = AdmissibleFormat::kIndexed;
    std::vector<std::pair<long, std::vector<long>>> records;
    long max_state = -1;
    for (const Line& l : lines) {
      const size_t colon = l.text.find(':');
      if (colon == std::string::npos) {
        throw DataError("admissible actions line " + std::to_string(l.number) +
                        ": expected 's: a a a'");
      }
      const auto head = parse_ints(l.text.substr(0, colon), l.number);
      if (head.size() != 1 || head[0] < 0) {
        throw DataError("admissible actions line " + std::to_string(l.number) +
                        ": bad state id");
      }
      records.emplace_back(head[0], parse_ints(l.text.substr(colon + 1), l.number));
      max_state = std::max(max_state, head[0]);
    }
    const long count = n_states > 0 ? n_states : max_state + 1;
    if (max_state >= count) {
      throw DataError("admissible actions: state id " +
                      std::to_string(max_state) + " out of range");
    }
    result.sets.assign(static_cast<size_t>(count), {});
    std::vector<bool> seen(static_cast<size_t>(count), false);
    for (const auto& [s, ids] : records) {
      if (seen[static_cast<size_t>(s)]) {
        throw DataError("admissible actions: state " + std::to_string(s) +
                        " listed twice");
      }
      seen[static_cast<size_t>(s)] = true;
      result.sets[static_cast<size_t>(s)] =
          to_set(ids, n_actions, static_cast<int>(s));
    }
    const auto missing = std::find(seen.begin(), seen.end(), false);
    if (missing != seen.end()) {
      throw DataError("admissible actions: no record for state " +
                      std::to_string(missing - seen.begin()));
    }
    return result;
  }

  std::vector<std::vector<long>> rows;
  rows.reserve(lines.size());
  for (const Line& l : lines) rows.push_back(parse_ints(l.text, l.number));

  // Counts header: the first line has one entry per remaining line and each
  // entry is that line's length.
  bool counts_header = rows.size() > 1 && rows[0].size() == rows.size() - 1;
  for (size_t i = 1; counts_header && i < rows.size(); ++i) {
    counts_header = rows[0][i - 1] == static_cast<long>(rows[i].size());
  }
  if (counts_header && n_states > 0 &&
      static_cast<int>(rows.size()) != n_states + 1) {
    counts_header = false;
  }
  size_t begin = 0;
  if (counts_header) {
    result.format = AdmissibleFormat::kCountsHeader;
    begin = 1;
  } else {
    result.format = AdmissibleFormat::kPerLine;
  }
  const auto records = static_cast<int>(rows.size() - begin);
  if (n_states > 0 && records != n_states) {
    throw DataError("admissible actions: " + std::to_string(records) +
                    " records for " + std::to_string(n_states) + " states");
  }
  for (size_t i = begin; i < rows.size(); ++i) {
    result.sets.push_back(
        to_set(rows[i], n_actions, static_cast<int>(i - begin)));
  }
  return result;
}

AdmissibleSets read_admissible_file(const fs::path& path, int n_actions,
                                    int n_states) {
  std::istringstream in(read_text_file(path));
  return parse_admissible(in, n_actions, n_states);
}

void write_admissible_file(const fs::path& path,
                           const std::vector<std::vector<ActionId>>& sets) {
  std::string out;
  for (size_t s = 0; s < sets.size(); ++s) {
    out += std::to_string(s) + ":";
    for (ActionId a : sets[s]) out += " " + std::to_string(a);
    out += "\n";
  }
  write_text_file(path, out);
}

}  // namespace icu_sepsis
