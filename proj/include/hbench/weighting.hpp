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

// Utility -> weight embedding: monotone transforms, the axiom audit, group
// aggregation, kernel-propagated weights and Lipschitz diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hbench/conjoint.hpp"
#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/propagation.hpp"
#include "hbench/rng.hpp"

namespace hbench {

// ============================================================================
// Transforms
// ============================================================================

enum class TransformKind { kRelu, kExponential, kLogistic };

inline std::string_view transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::kRelu: return "relu";
    case TransformKind::kExponential: return "exponential";
    case TransformKind::kLogistic: return "logistic";
  }
  return "?";
}

inline TransformKind parse_transform(std::string_view s) {
  if (s == "relu") return TransformKind::kRelu;
  if (s == "exponential" || s == "exp") return TransformKind::kExponential;
  if (s == "logistic") return TransformKind::kLogistic;
  throw ConfigError("unknown transform '" + std::string(s) +
                    "' (expected relu, exponential or logistic)");
}

/// Monotone map g from a utility to an edge weight.
///
///   relu:        max(0, z)                 L_g = 1
///   exponential: exp(scale * z)            L_g = scale * exp(scale * hi) on [lo, hi]
///   logistic:    1 / (1 + exp(-slope * z)) L_g = slope / 4
struct Transform {
  TransformKind kind = TransformKind::kRelu;
  double slope = 1.0;  // logistic
  double scale = 1.0;  // exponential
  // Input interval the Lipschitz constant is declared on. Mandatory for
  // exponential in any Lipschitz-dependent diagnostic.
  std::optional<std::pair<double, double>> interval;

  static Transform relu() { return {}; }
  static Transform exponential(double scale = 1.0,
                               std::optional<std::pair<double, double>> iv = std::nullopt) {
    return {TransformKind::kExponential, 1.0, scale, iv};
  }
  static Transform logistic(double slope = 1.0) {
    return {TransformKind::kLogistic, slope, 1.0, std::nullopt};
  }

  double operator()(double z) const {
    switch (kind) {
      case TransformKind::kRelu: return z > 0.0 ? z : 0.0;
      case TransformKind::kExponential: return std::exp(scale * z);
      case TransformKind::kLogistic: return 1.0 / (1.0 + std::exp(-slope * z));
    }
    return 0.0;
  }

  void validate() const {
    if (kind == TransformKind::kLogistic && !(slope > 0.0 && std::isfinite(slope)))
      throw ConfigError("logistic slope must be finite and > 0");
    if (kind == TransformKind::kExponential && !(scale > 0.0 && std::isfinite(scale)))
      throw ConfigError("exponential scale must be finite and > 0");
    if (interval && !(interval->first <= interval->second))
      throw ConfigError("transform interval must satisfy lo <= hi");
  }

  double lipschitz() const {
    validate();
    switch (kind) {
      case TransformKind::kRelu: return 1.0;
      case TransformKind::kLogistic: return slope / 4.0;
      case TransformKind::kExponential:
        if (!interval)
          throw ConfigError("exponential transform has no global Lipschitz constant; "
                            "declare an input interval");
        return scale * std::exp(scale * interval->second);
    }
    return 0.0;
  }

  std::string describe() const {
    std::string s(transform_name(kind));
    if (kind == TransformKind::kLogistic) s += "(slope=" + csv::format_double(slope) + ")";
    if (kind == TransformKind::kExponential) s += "(scale=" + csv::format_double(scale) + ")";
    return s;
  }
};

/// Stakeholder x metric weight table w_{hk}.
struct WeightState {
  std::vector<std::string> stakeholder_ids;
  std::vector<std::string> metric_ids;
  DenseMatrix w;
  std::string provenance;
  std::size_t iteration = 0;

  bool operator==(const WeightState&) const = default;
};

inline WeightState transform_weights(const UtilityVector& U, const Transform& g) {
  g.validate();
  WeightState W{U.stakeholder_ids, U.metric_ids, DenseMatrix(U.u.rows(), U.u.cols()),
                g.describe() + " of utilities" +
                    (U.mode ? " (" + std::string(mode_name(*U.mode)) + ")" : ""),
                0};
  for (std::size_t h = 0; h < U.u.rows(); ++h)
    for (std::size_t k = 0; k < U.u.cols(); ++k) {
      const double u = U.u(h, k);
      if (!std::isfinite(u))
        throw NumericRangeError("transform_weights: non-finite utility at (" +
                                U.stakeholder_ids[h] + ", " + U.metric_ids[k] + ")");
      const double w = g(u);
      if (!std::isfinite(w))
        throw NumericRangeError("transform_weights: " + g.describe() + " overflows at (" +
                                U.stakeholder_ids[h] + ", " + U.metric_ids[k] +
                                "), u = " + csv::format_double(u));
      W.w(h, k) = w;
    }
  return W;
}

/// Entrywise g over a bare table (dynamics works on raw matrices).
inline DenseMatrix apply_transform(const DenseMatrix& U, const Transform& g) {
  DenseMatrix out(U.rows(), U.cols());
  for (std::size_t i = 0; i < U.rows(); ++i)
    for (std::size_t j = 0; j < U.cols(); ++j) {
      out(i, j) = g(U(i, j));
      if (!std::isfinite(out(i, j)))
        throw NumericRangeError("transform overflow at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
    }
  return out;
}

/// Weights CSV: stakeholder_id, metric_id, w.
inline WeightState read_weights_csv(std::string_view text) {
  UtilityVector t =
      table_from_triples(csv::read_triples(text, "stakeholder_id", "metric_id", "w"), "weights");
  return {t.stakeholder_ids, t.metric_ids, t.u, "weights table", 0};
}

inline std::string write_weights_csv(const WeightState& W) {
  return write_utilities_csv({W.stakeholder_ids, W.metric_ids, W.w, std::nullopt, false}, "w");
}

/// Reorders a weight table into network order.
inline WeightState align_weights(const WeightState& W, const BenchmarkNetwork& net) {
  UtilityVector aligned =
      align_utilities({W.stakeholder_ids, W.metric_ids, W.w, std::nullopt, false}, net);
  return {aligned.stakeholder_ids, aligned.metric_ids, aligned.u, W.provenance, W.iteration};
}

// ============================================================================
// Axiom audit
// ============================================================================

struct AuditSampleSpec {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t grid_points = 41;
  std::size_t random_points = 64;
  std::uint64_t seed = 7;
  std::vector<double> lambdas = {0.5, 2.0, 3.0};
};

struct AxiomResult {
  bool pass = true;
  std::optional<std::string> counterexample;
  std::optional<double> alpha;  // homogeneity exponent when it passes
};

struct AxiomReport {
  std::string transform;
  AxiomResult monotonicity;
  AxiomResult equivalence;
  AxiomResult homogeneity;

  bool all_pass() const {
    return monotonicity.pass && equivalence.pass && homogeneity.pass;
  }
};

inline std::vector<double> audit_samples(const AuditSampleSpec& spec) {
  std::vector<double> xs;
  if (spec.grid_points == 1) {
    xs.push_back(spec.lo);
  } else {
    for (std::size_t i = 0; i < spec.grid_points; ++i)
      xs.push_back(spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                 static_cast<double>(spec.grid_points - 1));
  }
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.random_points; ++i)
    xs.push_back(rng.uniform(spec.lo, spec.hi));
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// Checks the three weighting axioms numerically:
///   monotonicity     u <= u'  =>  g(u) <= g(u')       (sorted samples)
///   equivalence      u == u'  =>  g(u) == g(u')
///   homogeneity      g(lambda u) = lambda^alpha g(u) for a single alpha
/// For homogeneity an exponent is estimated from every (u, lambda) pair with
/// g(u) != 0; the axiom fails when the estimates disagree by more than 1e-6
/// or some pair admits no exponent at all.
inline AxiomReport audit_transform(const Transform& g,
                                   const AuditSampleSpec& spec = {}) {
  g.validate();
  AxiomReport rep;
  rep.transform = g.describe();
  const std::vector<double> xs = audit_samples(spec);

  for (std::size_t i = 1; i < xs.size(); ++i)
    if (g(xs[i]) < g(xs[i - 1])) {
      rep.monotonicity = {false,
                          "g(" + csv::format_double(xs[i]) + ") = " +
                              csv::format_double(g(xs[i])) + " < g(" +
                              csv::format_double(xs[i - 1]) + ") = " +
                              csv::format_double(g(xs[i - 1])),
                          std::nullopt};
      break;
    }

  for (std::size_t i = 0; i < xs.size() && rep.equivalence.pass; ++i) {
    const double copy = xs[i];
    if (g(xs[i]) != g(copy))
      rep.equivalence = {false, "equal utilities " + csv::format_double(copy) +
                                    " map to different weights", std::nullopt};
    if (i > 0 && xs[i] == xs[i - 1] && g(xs[i]) != g(xs[i - 1]))
      rep.equivalence = {false, "duplicate sample " + csv::format_double(xs[i]) +
                                    " maps to different weights", std::nullopt};
  }

  struct Estimate {
    double u, lambda, alpha;
  };
  std::vector<Estimate> est;
  for (double u : xs)
    for (double lam : spec.lambdas) {
      if (!(lam > 0.0) || lam == 1.0) continue;
      const double gu = g(u), glu = g(lam * u);
      if (gu == 0.0 && glu == 0.0) continue;  // 0 = lambda^alpha * 0 for any alpha
      if (gu == 0.0 || glu / gu <= 0.0) {
        rep.homogeneity = {false,
                           "u=" + csv::format_double(u) + ", lambda=" + csv::format_double(lam) +
                               ": g(lambda u)=" + csv::format_double(glu) +
                               " is not a power multiple of g(u)=" + csv::format_double(gu),
                           std::nullopt};
        return rep;
      }
      est.push_back({u, lam, std::log(glu / gu) / std::log(lam)});
    }
  if (est.empty()) {
    rep.homogeneity = {false, "no sample with g(u) != 0", std::nullopt};
    return rep;
  }
  std::vector<double> alphas;
  for (const auto& e : est) alphas.push_back(e.alpha);
  std::nth_element(alphas.begin(), alphas.begin() + alphas.size() / 2, alphas.end());
  const double alpha = alphas[alphas.size() / 2];
  const Estimate* worst = &est.front();
  for (const auto& e : est)
    if (std::abs(e.alpha - alpha) > std::abs(worst->alpha - alpha)) worst = &e;
  if (std::abs(worst->alpha - alpha) > 1e-6) {
    const double lhs = g(worst->lambda * worst->u);
    const double rhs = std::pow(worst->lambda, alpha) * g(worst->u);
    rep.homogeneity = {false,
                       "u=" + csv::format_double(worst->u) + ", lambda=" +
                           csv::format_double(worst->lambda) + ": g(lambda u)=" +
                           csv::format_double(lhs) + " but lambda^alpha g(u)=" +
                           csv::format_double(rhs) + " at best-fit alpha=" +
                           csv::format_double(alpha) + " (this pair needs alpha=" +
                           csv::format_double(worst->alpha) + ")",
                       std::nullopt};
  } else {
    rep.homogeneity = {true, std::nullopt, alpha};
  }
  return rep;
}

// ============================================================================
// Influence and aggregation
// ============================================================================

struct DirectInfluence {
  DenseMatrix per_stakeholder;  // I_h(k) = (A_HT)_{hk} U_h(k)
  std::vector<double> total;    // I(k) = sum_h I_h(k)
};

/// Per-edge direct influence. `U` must be aligned to the network (see
/// align_utilities).
inline DirectInfluence direct_influence(const BenchmarkNetwork& net,
                                        const UtilityVector& U) {
  const UtilityVector A = align_utilities(U, net);
  DirectInfluence out{DenseMatrix(net.n_stakeholders(), net.n_metrics()),
                      std::vector<double>(net.n_metrics(), 0.0)};
  for (std::size_t h = 0; h < net.n_stakeholders(); ++h)
    for (std::size_t k = 0; k < net.n_metrics(); ++k) {
      const double v = net.A_HT()(h, k) * A.u(h, k);
      out.per_stakeholder(h, k) = v;
      out.total[k] += v;
    }
  return out;
}

/// w_bar_k = sum_h a_h w_hk, optionally divided by sum_h a_h.
inline std::vector<double> aggregate_group_weights(const DenseMatrix& W,
                                                   std::span<const double> a,
                                                   bool normalized) {
  if (a.size() != W.rows())
    throw DimensionError("aggregate_group_weights: " + std::to_string(a.size()) +
                         " importances for " + std::to_string(W.rows()) + " stakeholders");
  double total = 0.0;
  for (double x : a) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ConfigError("aggregate_group_weights: importances must be finite and >= 0");
    total += x;
  }
  if (normalized && total == 0.0)
    throw ConfigError("aggregate_group_weights: all-zero importances cannot be normalized");
  std::vector<double> out(W.cols(), 0.0);
  for (std::size_t k = 0; k < W.cols(); ++k) {
    for (std::size_t h = 0; h < W.rows(); ++h) out[k] += a[h] * W(h, k);
    if (normalized) out[k] /= total;
  }
  return out;
}

/// C(h, k) = [exp(tau A)]_{hk}: the stakeholder -> metric block of the supra
/// diffusion kernel, shape |V_H| x |V_T|.
inline DenseMatrix influence_kernel(const BenchmarkNetwork& net, double tau) {
  return kernel_block(combined_kernel(net, tau), Layer::kStakeholder, Layer::kMetric);
}

/// w~_k = sum_h w_hk C(h, k).
inline std::vector<double> network_adjusted_weights(const DenseMatrix& W,
                                                    const DenseMatrix& C) {
  if (W.rows() != C.rows() || W.cols() != C.cols())
    throw DimensionError("network_adjusted_weights: W " + W.shape_string() + " vs C " +
                         C.shape_string());
  std::vector<double> out(W.cols(), 0.0);
  for (std::size_t k = 0; k < W.cols(); ++k)
    for (std::size_t h = 0; h < W.rows(); ++h) out[k] += W(h, k) * C(h, k);
  return out;
}

/// sum_h a_h C(h, k) w_hk: group aggregation through the kernel. This is the
/// aggregate whose sensitivity robustness_bound controls; with C = 1 it is
/// the plain w_bar.
inline std::vector<double> kernel_aggregated_weights(const DenseMatrix& W,
                                                     std::span<const double> a,
                                                     const DenseMatrix& C) {
  if (a.size() != W.rows() || W.rows() != C.rows() || W.cols() != C.cols())
    throw DimensionError("kernel_aggregated_weights: shape mismatch");
  std::vector<double> out(W.cols(), 0.0);
  for (std::size_t k = 0; k < W.cols(); ++k)
    for (std::size_t h = 0; h < W.rows(); ++h) out[k] += a[h] * C(h, k) * W(h, k);
  return out;
}

/// Per-metric bound (sum_h a_h L_g C(h,k)) * delta_u on the shift of the
/// kernel-aggregated weight when every utility moves by at most delta_u.
inline std::vector<double> robustness_bound(const Transform& g, std::span<const double> a,
                                            const DenseMatrix& C, double delta_u) {
  if (a.size() != C.rows())
    throw DimensionError("robustness_bound: importances/kernel shape mismatch");
  if (!(delta_u >= 0.0)) throw ConfigError("robustness_bound: delta_u must be >= 0");
  const double Lg = g.lipschitz();
  std::vector<double> out(C.cols(), 0.0);
  for (std::size_t k = 0; k < C.cols(); ++k) {
    for (std::size_t h = 0; h < C.rows(); ++h) out[k] += a[h] * Lg * std::abs(C(h, k));
    out[k] *= delta_u;
  }
  return out;
}

}  // namespace hbench
