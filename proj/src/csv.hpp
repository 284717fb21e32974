// Copyright 2026 The patchpose Authors
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


#ifndef PATCHPOSE_CSV_HPP_
#define PATCHPOSE_CSV_HPP_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace patchpose::csv {

struct Rows {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string first_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

/// Rows after the header; throws IoError naming the line on a field-count
/// mismatch and when there are no data rows.
inline Rows read_rows(const std::filesystem::path& path, std::string_view header,
                      std::size_t n_fields) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw IoError(path.string() + ": line 1: unexpected header '" + line + "'");
  Rows out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != n_fields) {
      throw IoError(path.string() + ": line " + std::to_string(lineno) + ": expected " +
                    std::to_string(n_fields) + " fields");
    }
    out.rows.push_back(std::move(fields));
    out.line_numbers.push_back(lineno);
  }
  if (out.rows.empty()) throw IoError(path.string() + ": no data rows");
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, int lineno) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(path.string() + ": line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

inline double parse_rate(const std::string& s, const std::filesystem::path& path, int lineno) {
  const double v = parse_number<double>(s, path, lineno);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw IoError(path.string() + ": line " + std::to_string(lineno) + ": value outside [0,1]");
  }
  return v;
}

}  // namespace patchpose::csv

#endif  // PATCHPOSE_CSV_HPP_
