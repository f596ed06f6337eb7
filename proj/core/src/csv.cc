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

#include <zlib.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

bool is_gzip_path(const fs::path& path) { return path.extension() == ".gz"; }

bool parse_number(std::string_view cell, double& out) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' ||
                           cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::string_view first_cell(std::string_view line) {
  return line.substr(0, line.find(','));
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  if (is_gzip_path(path)) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw IoError("cannot open " + path.string());
    std::string out;
    std::array<char, 1 << 16> buffer{};
    int n = 0;
    while ((n = gzread(file, buffer.data(), buffer.size())) > 0) {
      out.append(buffer.data(), static_cast<size_t>(n));
    }
    int err = 0;
    const char* msg = gzerror(file, &err);
    gzclose(file);
    if (n < 0 || (err != Z_OK && err != Z_STREAM_END)) {
      throw IoError("cannot inflate " + path.string() + ": " + msg);
    }
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_text_file(const fs::path& path, const std::string& contents) {
  if (is_gzip_path(path)) {
    gzFile file = gzopen(path.c_str(), "wb6");
    if (file == nullptr) throw IoError("cannot write " + path.string());
    const int written = contents.empty()
        ? 0
        : gzwrite(file, contents.data(), static_cast<unsigned>(contents.size()));
    const int closed = gzclose(file);
    if (written != static_cast<int>(contents.size()) || closed != Z_OK) {
      throw IoError("failed writing " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_double(double value) {
  if (value == 0.0) return "0";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf.data(), ptr);
}

DenseMatrix read_csv_table(const fs::path& path, HeaderMode header) {
  const std::string text = read_text_file(path);
  std::string_view rest(text);
  DenseMatrix table;
  bool first_line = true;
  int line_no = 0;
  while (!rest.empty()) {
    const size_t eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{}
                                         : rest.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (first_line) {
      first_line = false;
      double probe = 0.0;
      const bool skip = header == HeaderMode::kPresent ||
                        (header == HeaderMode::kAuto &&
                         !parse_number(first_cell(line), probe));
      if (skip) continue;
    }
    int cols = 0;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      const std::string_view cell = line.substr(start, comma - start);
      double value = 0.0;
      if (!parse_number(cell, value)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": not a number: '" + std::string(cell) + "'");
      }
      table.values.push_back(value);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (table.rows == 0) {
      table.cols = cols;
    } else if (cols != table.cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(table.cols) +
                      " columns, found " + std::to_string(cols));
    }
    ++table.rows;
  }
  return table;
}

void write_csv_values(const fs::path& path, int rows, int cols,
                      std::span<const double> values) {
  if (values.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    throw UsageError("table size does not match its shape");
  }
  std::string out;
  out.reserve(values.size() * 4);
  size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c > 0) out.push_back(',');
      out += format_double(values[k++]);
    }
    out.push_back('\n');
  }
  write_text_file(path, out);
}

void write_csv_table(const fs::path& path, const DenseMatrix& table) {
  write_csv_values(path, table.rows, table.cols, table.values);
}

}  // namespace icu_sepsis
