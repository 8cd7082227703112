// Copyright 2026 The hbench Authors.
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

#pragma once

// Minimal RFC 4180 reader/writer for the tabular inputs (responses,
// utilities, weights, model metrics). Header row required.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hbench/error.hpp"

namespace hbench::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("CSV: missing required column '" + std::string(name) + "'",
                     1, 1);
  }
};

inline Table parse(std::string_view text) {
  Table t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t line = 1, record_line = 1;

  // Strip UTF-8 BOM.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (t.header.empty()) {
        t.header = std::move(record);
      } else {
        if (record.size() != t.header.size())
          throw ParseError("CSV: expected " + std::to_string(t.header.size()) +
                               " fields, got " + std::to_string(record.size()),
                           record_line, 1);
        t.rows.push_back(std::move(record));
        t.row_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          throw ParseError("CSV: stray quote", line, 1);
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("CSV: unterminated quoted field", line, 1);
  if (!field.empty() || !record.empty()) end_record();
  if (t.header.empty()) throw ParseError("CSV: missing header row", 1, 1);
  for (auto& h : t.header) {
    while (!h.empty() && h.back() == ' ') h.pop_back();
    while (!h.empty() && h.front() == ' ') h.erase(h.begin());
  }
  return t;
}

inline double to_double(std::string_view s, std::size_t line) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("CSV: '" + std::string(s) + "' is not a finite number", line, 1);
  return v;
}

inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Long-format numeric table: rows keyed by (row_key, col_key) -> value.
/// Used for utilities (stakeholder_id, metric_id, u), weights and model
/// metric tables.
struct Triple {
  std::string row;
  std::string col;
  double value = 0.0;
  std::size_t line = 0;
};

inline std::vector<Triple> read_triples(std::string_view text,
                                        std::string_view row_col,
                                        std::string_view col_col,
                                        std::string_view value_col) {
  Table t = parse(text);
  const std::size_t ri = t.column(row_col), ci = t.column(col_col),
                    vi = t.column(value_col);
  std::vector<Triple> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({t.rows[r][ri], t.rows[r][ci], to_double(t.rows[r][vi], t.row_lines[r]),
                   t.row_lines[r]});
  return out;
}

}  // namespace hbench::csv
