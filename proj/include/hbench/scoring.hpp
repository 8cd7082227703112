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

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hbench/conjoint.hpp"
#include "hbench/csv.hpp"
#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/propagation.hpp"
#include "hbench/spec_io.hpp"
#include "hbench/weighting.hpp"

namespace hbench {

// ----------------------------------------------------------------------------
// Metric ingestion
// ----------------------------------------------------------------------------

/// Flips lower-is-better metrics by plain negation so every downstream
/// quantity is higher-is-better and linear in the raw values.
inline MetricVector orient_metrics(const BenchmarkNetwork& net, const MetricVector& raw) {
  if (raw.values.size() != net.n_metrics())
    throw DimensionError("orient_metrics: model '" + raw.model_id + "' has " +
                         std::to_string(raw.values.size()) + " values for " +
                         std::to_string(net.n_metrics()) + " metrics");
  MetricVector out = raw;
  for (std::size_t k = 0; k < net.n_metrics(); ++k) {
    if (!std::isfinite(out.values[k]))
      throw NumericRangeError("model '" + raw.model_id + "': non-finite value for metric '" +
                              net.metrics()[k].id + "'");
    if (!net.metrics()[k].higher_is_better) out.values[k] = -out.values[k];
  }
  return out;
}

/// Models CSV (model_id, metric_id, value) into raw metric vectors in network
/// metric order. Every model must report exactly the network's metric set.
inline std::vector<MetricVector> read_models_csv(std::string_view text,
                                                 const BenchmarkNetwork& net) {
  const auto rows = csv::read_triples(text, "model_id", "metric_id", "value");
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, double>> cells;
  for (const auto& r : rows) {
    auto [it, fresh] = cells.try_emplace(r.row);
    if (fresh) order.push_back(r.row);
    if (!it->second.emplace(r.col, r.value).second)
      throw ParseError("models: duplicate value for (" + r.row + ", " + r.col + ")", r.line, 1);
  }
  std::vector<MetricVector> out;
  for (const auto& model : order) {
    const auto& m = cells[model];
    MetricVector v{model, std::vector<double>(net.n_metrics(), 0.0)};
    if (m.size() != net.n_metrics())
      throw Error("models: inconsistent metric set for '" + model + "' (" +
                  std::to_string(m.size()) + " metrics, network has " +
                  std::to_string(net.n_metrics()) + ")");
    for (const auto& [metric, value] : m) {
      std::size_t k;
      try {
        k = net.metric_index(metric);
      } catch (const UnknownIdError&) {
        throw Error("models: inconsistent metric set for '" + model + "' (unknown metric '" +
                    metric + "')");
      }
      v.values[k] = value;
    }
    out.push_back(std::move(v));
  }
  return out;
}

// ----------------------------------------------------------------------------
// Score functionals
// ----------------------------------------------------------------------------

/// B = w~ . M~.
inline double score(std::span<const double> w_tilde, std::span<const double> m_tilde) {
  if (w_tilde.size() != m_tilde.size())
    throw DimensionError("score: " + std::to_string(w_tilde.size()) + " weights for " +
                         std::to_string(m_tilde.size()) + " metrics");
  return dot(w_tilde, m_tilde);
}

/// Plain weighted sum with no network adjustment.
inline double classical_score(std::span<const double> w, const MetricVector& M) {
  if (w.size() != M.values.size())
    throw DimensionError("classical_score: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * M.values[k];
  return s;
}

/// Supra form: B = sum_k [sum_h C(h,k) U_h(k)] (A_T M)_k with C the HT block
/// of exp(tau A). Utilities enter as edge weights directly.
inline double score_supra(const BenchmarkNetwork& net, const UtilityVector& U,
                          const MetricVector& M, double tau) {
  const UtilityVector aligned = align_utilities(U, net);
  const DenseMatrix C = influence_kernel(net, tau);
  return score(network_adjusted_weights(aligned.u, C), adjusted_metrics(net, M).values);
}

// ----------------------------------------------------------------------------
// Leaderboards
// ----------------------------------------------------------------------------

struct LeaderboardEntry {
  std::string model_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const LeaderboardEntry&) const = default;
};

struct ScoringFingerprint {
  std::string network_hash;
  std::optional<double> tau;  // absent when an explicit kernel was supplied
  std::string transform;
  std::string extraction_mode;

  bool operator==(const ScoringFingerprint&) const = default;
};

struct Leaderboard {
  std::vector<LeaderboardEntry> entries;
  ScoringFingerprint fingerprint;

  std::vector<std::string> order() const {
    std::vector<std::string> ids;
    for (const auto& e : entries) ids.push_back(e.model_id);
    return ids;
  }

  bool operator==(const Leaderboard&) const = default;
};

/// Sorts by score descending, ties by ascending model id.
inline std::vector<LeaderboardEntry> rank_entries(std::vector<LeaderboardEntry> e) {
  std::sort(e.begin(), e.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.model_id < b.model_id;
  });
  for (std::size_t i = 0; i < e.size(); ++i) e[i].rank = i + 1;
  return e;
}

/// Scores raw models through orientation -> M~ -> w~ -> B with an explicit
/// influence kernel C (|V_H| x |V_T|).
inline Leaderboard leaderboard_with_kernel(const BenchmarkNetwork& net, const DenseMatrix& W,
                                           const std::vector<MetricVector>& models,
                                           const DenseMatrix& C,
                                           ScoringFingerprint fp = {}) {
  if (models.empty()) throw Error("leaderboard: no models");
  if (W.rows() != net.n_stakeholders() || W.cols() != net.n_metrics())
    throw DimensionError("leaderboard: weight table " + W.shape_string() +
                         " does not match the network");
  const std::vector<double> w_tilde = network_adjusted_weights(W, C);
  std::vector<LeaderboardEntry> entries;
  for (const auto& m : models) {
    if (m.values.size() != net.n_metrics())
      throw Error("leaderboard: inconsistent metric sets across models ('" + m.model_id +
                  "' has " + std::to_string(m.values.size()) + " values)");
    const MetricVector adjusted = adjusted_metrics(net, orient_metrics(net, m));
    entries.push_back({m.model_id, score(w_tilde, adjusted.values), 0});
  }
  if (fp.network_hash.empty()) fp.network_hash = network_hash(net);
  return {rank_entries(std::move(entries)), std::move(fp)};
}

inline Leaderboard leaderboard(const BenchmarkNetwork& net, const WeightState& W,
                               const std::vector<MetricVector>& models, double tau,
                               ScoringFingerprint fp = {}) {
  const WeightState aligned = align_weights(W, net);
  fp.tau = tau;
  return leaderboard_with_kernel(net, aligned.w, models, influence_kernel(net, tau),
                                 std::move(fp));
}

inline json leaderboard_to_json(const Leaderboard& lb) {
  json j;
  j["entries"] = json::array();
  for (const auto& e : lb.entries)
    j["entries"].push_back({{"model_id", e.model_id}, {"score", e.score}, {"rank", e.rank}});
  j["fingerprint"] = {{"network_hash", lb.fingerprint.network_hash},
                      {"transform", lb.fingerprint.transform},
                      {"extraction_mode", lb.fingerprint.extraction_mode}};
  j["fingerprint"]["tau"] = lb.fingerprint.tau ? json(*lb.fingerprint.tau) : json(nullptr);
  return j;
}

inline std::string leaderboard_to_csv(const Leaderboard& lb) {
  std::string out = "rank,model_id,score\n";
  for (const auto& e : lb.entries)
    out += std::to_string(e.rank) + "," + csv::quote(e.model_id) + "," +
           csv::format_double(e.score) + "\n";
  return out;
}

// ----------------------------------------------------------------------------
// Score smoothness
// ----------------------------------------------------------------------------

/// B(W) = sum_{h,k} W_hk D_hk with D_hk = C(h,k) M~_k, so by Cauchy-Schwarz
/// |B(W1) - B(W2)| <= ||D||_F ||W1 - W2||_F.
struct ScoreLipschitz {
  DenseMatrix coefficients;  // D
  double constant = 0.0;     // L_B = ||D||_F

  double evaluate(const DenseMatrix& W) const {
    if (W.rows() != coefficients.rows() || W.cols() != coefficients.cols())
      throw DimensionError("ScoreLipschitz: weight table shape mismatch");
    return dot(W.data(), coefficients.data());
  }

  /// |B(W1) - B(W2)| <= L_B ||W1 - W2||_F, with a relative slack of a few ulps
  /// for the floating-point evaluation of both sides.
  bool holds(const DenseMatrix& W1, const DenseMatrix& W2) const {
    const double lhs = std::abs(evaluate(W1) - evaluate(W2));
    const double rhs = constant * (W1 - W2).frobenius();
    return lhs <= rhs * (1.0 + 1e-12) + 1e-15;
  }
};

inline ScoreLipschitz score_lipschitz(std::span<const double> m_tilde, const DenseMatrix& C) {
  if (m_tilde.size() != C.cols())
    throw DimensionError("score_lipschitz: metric vector / kernel mismatch");
  ScoreLipschitz out{DenseMatrix(C.rows(), C.cols()), 0.0};
  for (std::size_t h = 0; h < C.rows(); ++h)
    for (std::size_t k = 0; k < C.cols(); ++k) out.coefficients(h, k) = C(h, k) * m_tilde[k];
  out.constant = out.coefficients.frobenius();
  return out;
}

}  // namespace hbench
