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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/operators.hpp"

namespace hbench {

/// Metric values for one model, in network metric order, oriented so that
/// higher is better.
struct MetricVector {
  std::string model_id;
  std::vector<double> values;

  bool operator==(const MetricVector&) const = default;
};

/// M~ = A_T M.
inline MetricVector adjusted_metrics(const BenchmarkNetwork& net,
                                     const MetricVector& M) {
  if (M.values.size() != net.n_metrics())
    throw DimensionError("adjusted_metrics: metric vector of length " +
                         std::to_string(M.values.size()) + " for " +
                         std::to_string(net.n_metrics()) + " metrics");
  return {M.model_id, net.A_T().apply(M.values)};
}

/// Sign convention for Laplacian diffusion. kHeat is exp(-tau L) (smoothing,
/// the default); kLiteral is exp(+tau L).
enum class DiffusionConvention { kHeat, kLiteral };

inline std::string_view convention_name(DiffusionConvention c) {
  return c == DiffusionConvention::kHeat ? "heat" : "literal";
}

inline DiffusionConvention parse_convention(std::string_view s) {
  if (s == "heat") return DiffusionConvention::kHeat;
  if (s == "literal") return DiffusionConvention::kLiteral;
  throw ConfigError("unknown diffusion convention '" + std::string(s) +
                    "' (expected heat or literal)");
}

inline MetricVector diffuse_metrics(
    const BenchmarkNetwork& net, const MetricVector& M, double tau,
    DiffusionConvention convention = DiffusionConvention::kHeat) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ConfigError("diffuse_metrics: tau must be finite and >= 0");
  if (M.values.size() != net.n_metrics())
    throw DimensionError("diffuse_metrics: metric vector length mismatch");
  const double sign = convention == DiffusionConvention::kHeat ? -1.0 : 1.0;
  const DenseMatrix K = matrix_exponential(laplacian(net.A_T()), sign * tau);
  return {M.model_id, K.apply(M.values)};
}

/// P = exp(tau A) over the supra-adjacency, layout preserved.
inline SupraMatrix combined_kernel(const BenchmarkNetwork& net, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ConfigError("combined_kernel: tau must be finite and >= 0");
  SupraMatrix A = assemble_supra(net);
  return {matrix_exponential(A.data, tau), A.layout};
}

inline DenseMatrix kernel_block(const SupraMatrix& P, Layer from, Layer to) {
  return P.block(from, to);
}

inline DenseMatrix kernel_block(const SupraMatrix& P, std::string_view from,
                                std::string_view to) {
  return P.block(parse_layer(from), parse_layer(to));
}

struct CoupledPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;  // (A_ij + A_ji) / 2
};

struct CouplingReport {
  double spectral_radius = 0.0;
  std::vector<double> eigenvalues;  // descending; empty unless A_T symmetric
  bool symmetric = false;
  double threshold = 0.0;
  bool high = false;
  std::vector<CoupledPair> top_pairs;
};

/// 1.0 + 0.1 * mean(diag(A_T)).
inline double default_coupling_threshold(const DenseMatrix& A_T) {
  if (A_T.rows() == 0) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < A_T.rows(); ++i) s += A_T(i, i);
  return 1.0 + 0.1 * s / static_cast<double>(A_T.rows());
}

inline CouplingReport coupling_report(const BenchmarkNetwork& net,
                                      std::optional<double> threshold = std::nullopt,
                                      std::size_t max_pairs = 5) {
  const DenseMatrix& A = net.A_T();
  if (A.rows() == 0) throw DimensionError("coupling_report: no metrics");
  CouplingReport rep;
  rep.spectral_radius = spectral_radius(A);
  rep.symmetric = A.is_symmetric();
  if (rep.symmetric) rep.eigenvalues = symmetric_eigenvalues(A);
  rep.threshold = threshold.value_or(default_coupling_threshold(A));
  rep.high = rep.spectral_radius > rep.threshold;

  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = i + 1; j < A.cols(); ++j) {
      const double w = 0.5 * (A(i, j) + A(j, i));
      if (w > 0.0) rep.top_pairs.push_back({i, j, w});
    }
  std::stable_sort(rep.top_pairs.begin(), rep.top_pairs.end(),
                   [](const CoupledPair& a, const CoupledPair& b) {
                     return a.weight > b.weight;
                   });
  if (rep.top_pairs.size() > max_pairs) rep.top_pairs.resize(max_pairs);
  return rep;
}

}  // namespace hbench
