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

// JSON (de)serialization of network documents plus small helpers shared by
// the other document readers.
//
// Network document layout:
//
//   {
//     "metrics":      [{"id": "acc", "name": "Accuracy", "higher_is_better": true}],
//     "components":   [{"id": "m1"}],
//     "stakeholders": [{"id": "h1", "importance": 1.0}],
//     "blocks": {"A_T": [[1, 0.5], [0.5, 1]], "A_HT": [[...]], ...}
//   }
//
// Matrices are row-major nested arrays; an absent block means zeros.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"

namespace hbench {

using json = nlohmann::json;

namespace io {

inline std::pair<std::size_t, std::size_t> line_col(std::string_view text,
                                                    std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

/// Parses text as JSON; syntax errors become ParseError with line/column.
inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte *after* the offending character.
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    const auto [l, c] = line_col(text, byte);
    throw ParseError(std::string(what) + ": malformed JSON", l, c);
  }
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("read failure on '" + p.string() + "'");
  return ss.str();
}

/// Write to a sibling temp file, then rename over the destination so readers
/// never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& p,
                              std::string_view content) {
  namespace fs = std::filesystem;
  if (p.has_parent_path() && !fs::exists(p.parent_path()))
    fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto '" + p.string() + "': " + ec.message());
  }
}

inline json matrix_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// `cols_hint` fixes the column count of an empty (0-row) matrix.
inline DenseMatrix matrix_from_json(const json& j, std::string_view what,
                                    std::size_t cols_hint = 0) {
  if (!j.is_array())
    throw ParseError(std::string(what) + ": expected an array of rows");
  if (j.empty()) return DenseMatrix(0, cols_hint);
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array())
      throw ParseError(std::string(what) + ": row " + std::to_string(r) +
                       " is not an array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols)
      throw DimensionError(std::string(what) + ": ragged rows (row " +
                           std::to_string(r) + " has " +
                           std::to_string(j[r].size()) + " entries, expected " +
                           std::to_string(cols) + ")");
  }
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const json& v = j[r][c];
      if (!v.is_number())
        throw ParseError(std::string(what) + ": entry (" + std::to_string(r) +
                         "," + std::to_string(c) + ") is not a number");
      m(r, c) = v.get<double>();
    }
  return m;
}

inline json vector_to_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<std::string_view> known,
                                std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok)
      throw ParseError(std::string(where) + ": unknown key '" + key + "'");
  }
}

}  // namespace io

// ----------------------------------------------------------------------------
// Network documents
// ----------------------------------------------------------------------------

inline NetworkSpec network_spec_from_json(const json& doc) {
  if (!doc.is_object())
    throw ParseError("network document: top level must be an object");
  io::reject_unknown_keys(doc, {"metrics", "components", "stakeholders",
                                "blocks"},
                          "network document");
  NetworkSpec spec;
  try {
    if (doc.contains("metrics"))
      for (const auto& m : doc.at("metrics")) {
        io::reject_unknown_keys(m, {"id", "name", "higher_is_better"},
                                "metric node");
        MetricNode n;
        n.id = m.at("id").get<std::string>();
        n.name = m.value("name", n.id);
        n.higher_is_better = m.value("higher_is_better", true);
        spec.metrics.push_back(std::move(n));
      }
    if (doc.contains("components"))
      for (const auto& m : doc.at("components")) {
        io::reject_unknown_keys(m, {"id"}, "component node");
        spec.components.push_back({m.at("id").get<std::string>()});
      }
    if (doc.contains("stakeholders"))
      for (const auto& s : doc.at("stakeholders")) {
        io::reject_unknown_keys(s, {"id", "importance"}, "stakeholder node");
        spec.stakeholders.push_back(
            {s.at("id").get<std::string>(), s.value("importance", 1.0)});
      }
  } catch (const json::exception& e) {
    throw ParseError(std::string("network document: ") + e.what());
  }

  if (doc.contains("blocks")) {
    const json& blocks = doc.at("blocks");
    if (!blocks.is_object())
      throw ParseError("network document: 'blocks' must be an object");
    for (const auto& [key, val] : blocks.items()) {
      auto id = parse_block_name(key);
      if (!id) throw ParseError("network document: unknown block '" + key + "'");
      if (val.is_null()) continue;  // declared absent
      spec.block(*id) =
          io::matrix_from_json(val, key, spec.expected_shape(*id).second);
    }
  }
  return spec;
}

inline NetworkSpec load_spec_text(std::string_view text) {
  return network_spec_from_json(io::parse_json(text, "network document"));
}

inline NetworkSpec load_spec(const std::filesystem::path& p) {
  return load_spec_text(io::read_file(p));
}

/// Convenience: parse and build in one go.
inline BenchmarkNetwork load_network(const std::filesystem::path& p) {
  return build_network(load_spec(p));
}

inline json network_to_json(const NetworkSpec& spec) {
  json doc;
  doc["metrics"] = json::array();
  for (const auto& m : spec.metrics)
    doc["metrics"].push_back(
        {{"id", m.id}, {"name", m.name}, {"higher_is_better", m.higher_is_better}});
  doc["components"] = json::array();
  for (const auto& c : spec.components) doc["components"].push_back({{"id", c.id}});
  doc["stakeholders"] = json::array();
  for (const auto& s : spec.stakeholders)
    doc["stakeholders"].push_back({{"id", s.id}, {"importance", s.importance}});
  doc["blocks"] = json::object();
  for (BlockId b : kAllBlocks)
    if (const auto& m = spec.block(b))
      doc["blocks"][std::string(block_name(b))] = io::matrix_to_json(*m);
  return doc;
}

/// Doubles are written in shortest round-trip form, so load(save(n)) is
/// bit-exact.
inline std::string save_spec_text(const NetworkSpec& spec) {
  return network_to_json(spec).dump(2) + "\n";
}
inline std::string save_spec_text(const BenchmarkNetwork& net) {
  return save_spec_text(net.spec());
}

inline void save_spec(const BenchmarkNetwork& net,
                      const std::filesystem::path& p) {
  io::write_file_atomic(p, save_spec_text(net));
}

inline json validation_report_to_json(const ValidationReport& rep) {
  json out = json::object();
  out["accepted"] = rep.accepted();
  out["findings"] = json::array();
  for (const auto& f : rep.findings) {
    json j = {{"severity", f.severity == Severity::kError ? "error" : "warning"},
              {"block", f.block},
              {"message", f.message}};
    if (f.row) j["row"] = *f.row;
    if (f.col) j["col"] = *f.col;
    out["findings"].push_back(std::move(j));
  }
  return out;
}

/// 64-bit FNV-1a over the canonical document; used as the network component
/// of scoring fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string network_hash(const BenchmarkNetwork& net) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(network_to_json(net.spec()).dump())));
  return buf;
}

}  // namespace hbench
