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

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hbench/error.hpp"
#include "hbench/matrix.hpp"

namespace hbench {

// ----------------------------------------------------------------------------
// Node layers
// ----------------------------------------------------------------------------

/// The three layers of the benchmark network, in supra-matrix order.
enum class Layer { kMetric = 0, kModel = 1, kStakeholder = 2 };

inline std::string_view layer_name(Layer l) {
  switch (l) {
    case Layer::kMetric: return "T";
    case Layer::kModel: return "M";
    case Layer::kStakeholder: return "H";
  }
  return "?";
}

/// Accepts the short block-letter names ("T", "M", "H") and the long forms
/// ("metric", "model", "stakeholder").
inline Layer parse_layer(std::string_view s) {
  if (s == "T" || s == "metric" || s == "technical") return Layer::kMetric;
  if (s == "M" || s == "model" || s == "component") return Layer::kModel;
  if (s == "H" || s == "stakeholder" || s == "human") return Layer::kStakeholder;
  throw UnknownIdError("unknown layer name '" + std::string(s) + "'");
}

struct MetricNode {
  std::string id;
  std::string name;
  bool higher_is_better = true;

  bool operator==(const MetricNode&) const = default;
};

struct ModelNode {
  std::string id;

  bool operator==(const ModelNode&) const = default;
};

struct StakeholderNode {
  std::string id;
  double importance = 1.0;  // a_h

  bool operator==(const StakeholderNode&) const = default;
};

// ----------------------------------------------------------------------------
// Candidate network and validation
// ----------------------------------------------------------------------------

/// Block identifiers. Only the six stored blocks; reverse blocks are
/// transposes and never materialized.
enum class BlockId { kT, kM, kH, kTM, kHT, kHM };

inline constexpr std::array<BlockId, 6> kAllBlocks = {
    BlockId::kT, BlockId::kM, BlockId::kH,
    BlockId::kTM, BlockId::kHT, BlockId::kHM};

inline std::string_view block_name(BlockId b) {
  switch (b) {
    case BlockId::kT: return "A_T";
    case BlockId::kM: return "A_M";
    case BlockId::kH: return "A_H";
    case BlockId::kTM: return "A_TM";
    case BlockId::kHT: return "A_HT";
    case BlockId::kHM: return "A_HM";
  }
  return "?";
}

inline std::optional<BlockId> parse_block_name(std::string_view s) {
  for (BlockId b : kAllBlocks)
    if (block_name(b) == s) return b;
  return std::nullopt;
}

/// An unvalidated network candidate: whatever a document or a caller put
/// together. `build_network` turns it into a BenchmarkNetwork.
///
/// Absent blocks are represented by std::nullopt and become zero blocks of
/// the correct shape on build.
struct NetworkSpec {
  std::vector<MetricNode> metrics;
  std::vector<ModelNode> components;
  std::vector<StakeholderNode> stakeholders;
  std::array<std::optional<DenseMatrix>, 6> blocks;

  std::optional<DenseMatrix>& block(BlockId b) {
    return blocks[static_cast<std::size_t>(b)];
  }
  const std::optional<DenseMatrix>& block(BlockId b) const {
    return blocks[static_cast<std::size_t>(b)];
  }

  std::pair<std::size_t, std::size_t> expected_shape(BlockId b) const {
    const std::size_t t = metrics.size(), m = components.size(),
                      h = stakeholders.size();
    switch (b) {
      case BlockId::kT: return {t, t};
      case BlockId::kM: return {m, m};
      case BlockId::kH: return {h, h};
      case BlockId::kTM: return {t, m};
      case BlockId::kHT: return {h, t};
      case BlockId::kHM: return {h, m};
    }
    return {0, 0};
  }

  bool operator==(const NetworkSpec&) const = default;
};

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string block;  // block name, or "nodes" for node-level findings
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& f : findings) n += f.severity == Severity::kError;
    return n;
  }
  bool accepted() const { return error_count() == 0; }

  std::vector<Finding> errors() const {
    std::vector<Finding> out;
    for (const auto& f : findings)
      if (f.severity == Severity::kError) out.push_back(f);
    return out;
  }
  std::vector<Finding> warnings() const {
    std::vector<Finding> out;
    for (const auto& f : findings)
      if (f.severity == Severity::kWarning) out.push_back(f);
    return out;
  }

  std::string summary() const {
    std::string s;
    for (const auto& f : findings) {
      if (!s.empty()) s += "; ";
      s += f.severity == Severity::kError ? "error" : "warning";
      s += " [" + f.block + "]";
      if (f.row && f.col)
        s += " (" + std::to_string(*f.row) + "," + std::to_string(*f.col) + ")";
      s += ": " + f.message;
    }
    return s;
  }
};

/// Thrown by build_network; the report names every offending block.
class NetworkValidationError : public Error {
 public:
  explicit NetworkValidationError(ValidationReport report)
      : Error("network rejected: " + report.summary()),
        report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Deterministic report over any candidate. Findings are ordered: node
/// checks first, then blocks in A_T, A_M, A_H, A_TM, A_HT, A_HM order, then
/// warnings; within a block, row-major.
inline ValidationReport validate_network(const NetworkSpec& spec) {
  ValidationReport rep;
  auto error = [&](std::string block, std::string msg,
                   std::optional<std::size_t> r = std::nullopt,
                   std::optional<std::size_t> c = std::nullopt) {
    rep.findings.push_back({Severity::kError, std::move(block), r, c,
                            std::move(msg)});
  };

  std::set<std::string> seen;
  auto check_id = [&](const std::string& id, std::string_view layer) {
    if (id.empty()) {
      error("nodes", std::string("empty identifier in layer ") +
                         std::string(layer));
      return;
    }
    if (!seen.insert(id).second)
      error("nodes", "duplicate node id '" + id + "'");
  };
  for (const auto& n : spec.metrics) check_id(n.id, "T");
  for (const auto& n : spec.components) check_id(n.id, "M");
  for (const auto& n : spec.stakeholders) check_id(n.id, "H");

  for (std::size_t h = 0; h < spec.stakeholders.size(); ++h) {
    const double a = spec.stakeholders[h].importance;
    if (!std::isfinite(a) || a < 0.0)
      error("nodes", "stakeholder '" + spec.stakeholders[h].id +
                         "' has invalid importance (must be finite and >= 0)");
  }

  for (BlockId b : kAllBlocks) {
    const auto& blk = spec.block(b);
    if (!blk) continue;
    const auto [er, ec] = spec.expected_shape(b);
    const std::string name(block_name(b));
    if (blk->rows() != er || blk->cols() != ec) {
      error(name, "dimension mismatch: expected " + std::to_string(er) + "x" +
                      std::to_string(ec) + ", got " + blk->shape_string());
      continue;
    }
    for (std::size_t r = 0; r < blk->rows(); ++r)
      for (std::size_t c = 0; c < blk->cols(); ++c) {
        const double v = (*blk)(r, c);
        if (!std::isfinite(v))
          error(name, "non-finite weight", r, c);
        else if (v < 0.0)
          error(name, "negative weight " + std::to_string(v), r, c);
      }
  }

  // A stakeholder with no edge into the metric layer exerts no direct
  // influence; legal, but usually a spec mistake.
  const auto& ht = spec.block(BlockId::kHT);
  const bool ht_ok = ht && ht->rows() == spec.stakeholders.size() &&
                     ht->cols() == spec.metrics.size();
  for (std::size_t h = 0; h < spec.stakeholders.size(); ++h) {
    bool connected = false;
    if (ht_ok)
      for (std::size_t k = 0; k < ht->cols(); ++k)
        connected = connected || (*ht)(h, k) != 0.0;
    if (!connected)
      rep.findings.push_back({Severity::kWarning, "A_HT", h, std::nullopt,
                              "disconnected stakeholder '" +
                                  spec.stakeholders[h].id + "'"});
  }
  return rep;
}

// ----------------------------------------------------------------------------
// Validated network
// ----------------------------------------------------------------------------

class BenchmarkNetwork;
BenchmarkNetwork build_network(NetworkSpec spec);

/// A validated three-layer benchmark network. Immutable after construction;
/// every block is present with the correct shape.
class BenchmarkNetwork {
 public:
  const std::vector<MetricNode>& metrics() const { return spec_.metrics; }
  const std::vector<ModelNode>& components() const { return spec_.components; }
  const std::vector<StakeholderNode>& stakeholders() const {
    return spec_.stakeholders;
  }

  std::size_t n_metrics() const { return spec_.metrics.size(); }
  std::size_t n_components() const { return spec_.components.size(); }
  std::size_t n_stakeholders() const { return spec_.stakeholders.size(); }

  const DenseMatrix& block(BlockId b) const {
    return *spec_.block(b);
  }
  const DenseMatrix& A_T() const { return block(BlockId::kT); }
  const DenseMatrix& A_M() const { return block(BlockId::kM); }
  const DenseMatrix& A_H() const { return block(BlockId::kH); }
  const DenseMatrix& A_TM() const { return block(BlockId::kTM); }
  const DenseMatrix& A_HT() const { return block(BlockId::kHT); }
  const DenseMatrix& A_HM() const { return block(BlockId::kHM); }

  std::vector<double> importances() const {
    std::vector<double> a;
    a.reserve(n_stakeholders());
    for (const auto& s : spec_.stakeholders) a.push_back(s.importance);
    return a;
  }

  std::size_t metric_index(std::string_view id) const {
    return index_of(spec_.metrics, id, "metric");
  }
  std::size_t stakeholder_index(std::string_view id) const {
    return index_of(spec_.stakeholders, id, "stakeholder");
  }
  std::size_t component_index(std::string_view id) const {
    return index_of(spec_.components, id, "component");
  }

  /// The fully materialized spec (every block present).
  const NetworkSpec& spec() const { return spec_; }

  bool operator==(const BenchmarkNetwork& o) const { return spec_ == o.spec_; }

 private:
  friend BenchmarkNetwork build_network(NetworkSpec spec);
  explicit BenchmarkNetwork(NetworkSpec spec) : spec_(std::move(spec)) {}

  template <class Node>
  static std::size_t index_of(const std::vector<Node>& nodes,
                              std::string_view id, const char* what) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return i;
    throw UnknownIdError(std::string("unknown ") + what + " id '" +
                         std::string(id) + "'");
  }

  NetworkSpec spec_;
};

/// Validates and materializes absent blocks as zeros. Throws
/// NetworkValidationError when any error-severity finding exists.
inline BenchmarkNetwork build_network(NetworkSpec spec) {
  ValidationReport rep = validate_network(spec);
  if (!rep.accepted()) throw NetworkValidationError(std::move(rep));
  for (BlockId b : kAllBlocks) {
    if (!spec.block(b)) {
      const auto [r, c] = spec.expected_shape(b);
      spec.block(b) = DenseMatrix(r, c);
    }
  }
  return BenchmarkNetwork(std::move(spec));
}

// ----------------------------------------------------------------------------
// Supra-adjacency
// ----------------------------------------------------------------------------

/// Index ranges of the three layers inside a supra matrix. Order is fixed:
/// metrics, then model components, then stakeholders.
struct SupraLayout {
  std::size_t n_metric = 0;
  std::size_t n_model = 0;
  std::size_t n_stakeholder = 0;

  std::size_t total() const { return n_metric + n_model + n_stakeholder; }

  std::size_t offset(Layer l) const {
    switch (l) {
      case Layer::kMetric: return 0;
      case Layer::kModel: return n_metric;
      case Layer::kStakeholder: return n_metric + n_model;
    }
    return 0;
  }
  std::size_t extent(Layer l) const {
    switch (l) {
      case Layer::kMetric: return n_metric;
      case Layer::kModel: return n_model;
      case Layer::kStakeholder: return n_stakeholder;
    }
    return 0;
  }

  bool operator==(const SupraLayout&) const = default;
};

struct SupraMatrix {
  DenseMatrix data;
  SupraLayout layout;

  /// Sub-block with rows in `from` and columns in `to`; block(H, T) has
  /// shape |V_H| x |V_T|.
  DenseMatrix block(Layer from, Layer to) const {
    return data.block(layout.offset(from), layout.offset(to),
                      layout.extent(from), layout.extent(to));
  }
};

inline SupraLayout layout_of(const BenchmarkNetwork& net) {
  return {net.n_metrics(), net.n_components(), net.n_stakeholders()};
}

/// Block layout
///   [ A_T     A_TM    A_HT^T ]
///   [ A_TM^T  A_M     A_HM^T ]
///   [ A_HT    A_HM    A_H    ]
inline SupraMatrix assemble_supra(const BenchmarkNetwork& net) {
  SupraMatrix s{DenseMatrix(0, 0), layout_of(net)};
  const SupraLayout& L = s.layout;
  s.data = DenseMatrix(L.total(), L.total());
  const auto T = L.offset(Layer::kMetric), M = L.offset(Layer::kModel),
             H = L.offset(Layer::kStakeholder);
  s.data.set_block(T, T, net.A_T());
  s.data.set_block(T, M, net.A_TM());
  s.data.set_block(T, H, net.A_HT().transpose());
  s.data.set_block(M, T, net.A_TM().transpose());
  s.data.set_block(M, M, net.A_M());
  s.data.set_block(M, H, net.A_HM().transpose());
  s.data.set_block(H, T, net.A_HT());
  s.data.set_block(H, M, net.A_HM());
  s.data.set_block(H, H, net.A_H());
  return s;
}

/// Stored-block view back out of a supra matrix (inverse of assembly).
inline DenseMatrix extract_block(const SupraMatrix& s, BlockId b) {
  switch (b) {
    case BlockId::kT: return s.block(Layer::kMetric, Layer::kMetric);
    case BlockId::kM: return s.block(Layer::kModel, Layer::kModel);
    case BlockId::kH: return s.block(Layer::kStakeholder, Layer::kStakeholder);
    case BlockId::kTM: return s.block(Layer::kMetric, Layer::kModel);
    case BlockId::kHT: return s.block(Layer::kStakeholder, Layer::kMetric);
    case BlockId::kHM: return s.block(Layer::kStakeholder, Layer::kModel);
  }
  return {};
}

}  // namespace hbench
