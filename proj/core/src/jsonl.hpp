// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Private JSON-lines helpers shared by the file loaders.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"

namespace clipdpo::jsonl {

using json = nlohmann::json;

// Line-oriented reader; invokes `fn(object, line_no)` for every non-blank line.
inline void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what(), {}, line_no);
    }
    if (!obj.is_object()) throw Error(ErrorCode::SchemaError, "record is not an object", {}, line_no);
    try {
      fn(obj, line_no);
    } catch (const Error& e) {
      if (e.line() != 0) throw;
      throw Error(e.code(), e.message(), e.record_id(), line_no);
    }
  }
}

[[noreturn]] inline void schema_fail(const std::string& msg, std::size_t line) {
  throw Error(ErrorCode::SchemaError, msg, {}, line);
}

inline std::string get_string(const json& o, const char* key, std::size_t line) {
  auto it = o.find(key);
  if (it == o.end()) schema_fail(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) schema_fail(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

inline std::string get_nonempty_string(const json& o, const char* key, std::size_t line) {
  auto s = get_string(o, key, line);
  if (s.empty()) schema_fail(std::string("field '") + key + "' must be non-empty", line);
  return s;
}

inline std::optional<std::string> get_opt_string(const json& o, const char* key, std::size_t line) {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_fail(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

inline double get_number(const json& o, const char* key, std::size_t line) {
  auto it = o.find(key);
  if (it == o.end()) schema_fail(std::string("missing field '") + key + "'", line);
  if (!it->is_number()) schema_fail(std::string("field '") + key + "' must be a number", line);
  const double v = it->get<double>();
  if (!std::isfinite(v)) schema_fail(std::string("field '") + key + "' must be finite", line);
  return v;
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace clipdpo::jsonl
