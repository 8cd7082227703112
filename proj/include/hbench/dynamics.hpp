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

// Projected weight dynamics
//
//   W(t+1) = Pi_C( W(t) + eta * Delta(t) ),
//   Delta_hk = lambda_T * G_T,k + lambda_H * (g(U_h(k)) - w_hk),
//
// where G_T is the negative gradient of the variance of the network-adjusted
// metrics (broadcast over stakeholders) and Pi_C is the Euclidean projection
// onto the constraint set. Only the stakeholder -> metric weight table
// evolves; every adjacency block of the network is frozen.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbench/conjoint.hpp"
#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/operators.hpp"
#include "hbench/propagation.hpp"
#include "hbench/scoring.hpp"
#include "hbench/spec_io.hpp"
#include "hbench/weighting.hpp"

namespace hbench {

// ============================================================================
// Configuration
// ============================================================================

enum class LossKind { kVariance };

struct DynamicsConfig {
  double eta = 0.5;
  double lambda_T = 0.0;
  double lambda_H = 1.0;
  Transform transform;
  ConstraintSet constraints;
  LossKind loss = LossKind::kVariance;
  double tau = 0.5;
  std::size_t max_iterations = 200;
  double fixed_point_tol = 1e-8;
  std::size_t debounce = 3;  // consecutive sub-tolerance steps

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("dynamics: eta must be > 0");
    if (!(lambda_T >= 0.0) || !(lambda_H >= 0.0))
      throw ConfigError("dynamics: lambda_T and lambda_H must be >= 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("dynamics: tau must be >= 0");
    if (!(fixed_point_tol > 0.0)) throw ConfigError("dynamics: fixed_point_tol must be > 0");
    if (debounce == 0) throw ConfigError("dynamics: debounce must be >= 1");
    transform.validate();
  }
};

// ============================================================================
// Signals
// ============================================================================

/// Population variance (1/K) sum (m_k - mean)^2.
inline double variance_loss(std::span<const double> m) {
  if (m.empty()) return 0.0;
  double mean = 0.0;
  for (double x : m) mean += x;
  mean /= static_cast<double>(m.size());
  double s = 0.0;
  for (double x : m) s += (x - mean) * (x - mean);
  return s / static_cast<double>(m.size());
}

/// G_T,k = -dVar/dM~_k = -(2/K)(M~_k - mean).
inline std::vector<double> technical_signal(std::span<const double> m_tilde) {
  const std::size_t K = m_tilde.size();
  if (K == 0) throw DimensionError("technical_signal: empty metric vector");
  double mean = 0.0;
  for (double x : m_tilde) mean += x;
  mean /= static_cast<double>(K);
  std::vector<double> g(K);
  for (std::size_t k = 0; k < K; ++k)
    g[k] = -(2.0 / static_cast<double>(K)) * (m_tilde[k] - mean) + 0.0;  // no -0
  return g;
}

/// G_H,hk = g(U_h(k)) - w_hk.
inline DenseMatrix human_signal(const DenseMatrix& U, const DenseMatrix& W, const Transform& g) {
  if (U.rows() != W.rows() || U.cols() != W.cols())
    throw DimensionError("human_signal: utilities " + U.shape_string() + " vs weights " +
                         W.shape_string());
  DenseMatrix out = apply_transform(U, g);
  out -= W;
  return out;
}

/// Delta_hk = lambda_T G_T,k + lambda_H G_H,hk; G_T broadcast over rows.
inline DenseMatrix combine_signals(std::span<const double> G_T, const DenseMatrix& G_H,
                                   double lambda_T, double lambda_H) {
  DenseMatrix D = G_H * lambda_H;
  if (lambda_T != 0.0) {
    if (G_T.size() != D.cols()) throw DimensionError("combine_signals: G_T length mismatch");
    for (std::size_t h = 0; h < D.rows(); ++h)
      for (std::size_t k = 0; k < D.cols(); ++k) D(h, k) += lambda_T * G_T[k];
  }
  return D;
}

// ============================================================================
// One step
// ============================================================================

struct StepRecord {
  std::vector<double> G_T;
  DenseMatrix G_H;
  double step_norm = 0.0;  // ||W' - W||_F after projection
  bool projection_active = false;
};

/// One projected update. `m_tilde` is the network-adjusted metric vector the
/// technical signal is taken from; it may be empty when lambda_T == 0.
inline std::pair<DenseMatrix, StepRecord> step(const DenseMatrix& W, const DenseMatrix& U,
                                               std::span<const double> m_tilde,
                                               const DynamicsConfig& cfg) {
  cfg.validate();
  StepRecord rec;
  if (cfg.lambda_T != 0.0 || !m_tilde.empty()) {
    if (m_tilde.size() != W.cols())
      throw DimensionError("step: metric vector of length " + std::to_string(m_tilde.size()) +
                           " for " + std::to_string(W.cols()) + " metrics");
    rec.G_T = technical_signal(m_tilde);
  }
  rec.G_H = human_signal(U, W, cfg.transform);
  DenseMatrix raw = W + combine_signals(rec.G_T, rec.G_H, cfg.lambda_T, cfg.lambda_H) * cfg.eta;
  if (!raw.all_finite()) throw NumericRangeError("step: update overflowed");
  DenseMatrix next = project(raw, cfg.constraints);
  rec.projection_active = !(next == raw);
  rec.step_norm = (next - W).frobenius();
  return {std::move(next), std::move(rec)};
}

// ============================================================================
// Schedules and traces
// ============================================================================

/// Additive utility shift that takes effect from `iteration` on: the step
/// producing W(iteration) is the first to see it.
struct ShiftEvent {
  std::size_t iteration = 0;
  std::size_t stakeholder = 0;  // row index in network order
  std::size_t metric = 0;       // column index in network order
  double delta = 0.0;

  bool operator==(const ShiftEvent&) const = default;
};

struct UtilitySchedule {
  DenseMatrix base;  // stakeholders x metrics, network order
  std::vector<ShiftEvent> shifts;

  DenseMatrix at(std::size_t t) const {
    DenseMatrix U = base;
    for (const auto& s : shifts)
      if (s.iteration <= t) U(s.stakeholder, s.metric) += s.delta;
    return U;
  }

  bool has_pending_after(std::size_t t) const {
    return std::any_of(shifts.begin(), shifts.end(),
                       [t](const ShiftEvent& s) { return s.iteration > t; });
  }

  /// Smallest and largest utility value over every schedule time.
  std::pair<double, double> range() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<std::size_t> times = {0};
    for (const auto& s : shifts) times.push_back(s.iteration);
    for (std::size_t t : times) {
      const DenseMatrix U = at(t);
      for (double v : U.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return {lo, hi};
  }
};

struct ModelScore {
  std::string model_id;
  double score = 0.0;

  bool operator==(const ModelScore&) const = default;
};

/// Record t holds W(t). For t >= 1 it also holds the signals of the step
/// that produced W(t) from W(t-1) and that step's norm; record 0 is the
/// initial state with no signals.
struct TraceRecord {
  std::size_t iteration = 0;
  DenseMatrix W;
  std::vector<double> G_T;
  DenseMatrix G_H;
  double step_norm = 0.0;
  bool projection_active = false;
  std::vector<double> w_tilde;
  std::vector<ModelScore> scores;
};

struct FixedPointVerdict {
  std::size_t iteration = 0;  // record holding W*
  DenseMatrix W_star;
  double residual = 0.0;  // ||W* - Pi_C(W* + eta Delta(W*))||_F
};

/// Everything needed to replay or re-check a run.
struct DynamicsContext {
  DynamicsConfig config;
  UtilitySchedule schedule;
  std::vector<double> m_tilde_signal;     // pooled M~ the technical signal reads
  std::vector<MetricVector> tracked;      // oriented + adjusted, per model
  DenseMatrix kernel;                     // C(h, k) used for w~ and scores
};

struct DynamicsTrace {
  DynamicsContext context;
  std::vector<TraceRecord> records;
  std::optional<FixedPointVerdict> verdict;

  const TraceRecord& back() const { return records.back(); }
};

/// Append-only trace buffer that readers may poll from other threads.
class ObservableTrace {
 public:
  void append(TraceRecord r) {
    std::lock_guard lock(mu_);
    records_.push_back(std::move(r));
  }
  /// Copy of records with iteration >= since.
  std::vector<TraceRecord> snapshot(std::size_t since = 0) const {
    std::lock_guard lock(mu_);
    std::vector<TraceRecord> out;
    for (const auto& r : records_)
      if (r.iteration >= since) out.push_back(r);
    return out;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<TraceRecord> records_;
};

// ============================================================================
// Fixed points
// ============================================================================

inline double fixed_point_residual(const DenseMatrix& W, const DenseMatrix& U,
                                   std::span<const double> m_tilde, const DynamicsConfig& cfg) {
  return step(W, U, m_tilde, cfg).second.step_norm;
}

/// Fires on the first run of `tol`-small step norms of length
/// `context.config.debounce` (default 3) after which no scheduled shift is
/// still pending; a plateau before a later shift is not a fixed point of
/// the run.
inline std::optional<FixedPointVerdict> detect_fixed_point(const DynamicsTrace& trace, double tol) {
  const auto& cfg = trace.context.config;
  std::size_t streak = 0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    streak = trace.records[i].step_norm < tol ? streak + 1 : 0;
    if (streak >= cfg.debounce &&
        !trace.context.schedule.has_pending_after(trace.records[i].iteration)) {
      const TraceRecord& r = trace.records[i];
      const DenseMatrix U = trace.context.schedule.at(r.iteration + 1);
      return FixedPointVerdict{r.iteration, r.W,
                               fixed_point_residual(r.W, U, trace.context.m_tilde_signal, cfg)};
    }
  }
  return std::nullopt;
}

// ============================================================================
// Run
// ============================================================================

inline std::vector<double> pooled_metrics(const std::vector<MetricVector>& adjusted,
                                          std::size_t K) {
  std::vector<double> m(K, 0.0);
  if (adjusted.empty()) return m;
  for (const auto& v : adjusted)
    for (std::size_t k = 0; k < K; ++k) m[k] += v.values[k];
  for (double& x : m) x /= static_cast<double>(adjusted.size());
  return m;
}

inline std::vector<ModelScore> score_models(const std::vector<MetricVector>& adjusted,
                                            std::span<const double> w_tilde) {
  std::vector<ModelScore> out;
  for (const auto& m : adjusted) out.push_back({m.model_id, score(w_tilde, m.values)});
  return out;
}

/// Builds the context for a run: orients and adjusts the tracked models and
/// computes the influence kernel once.
inline DynamicsContext make_context(const BenchmarkNetwork& net, UtilitySchedule schedule,
                                    const std::vector<MetricVector>& raw_models,
                                    const DynamicsConfig& cfg) {
  cfg.validate();
  if (schedule.base.rows() != net.n_stakeholders() || schedule.base.cols() != net.n_metrics())
    throw DimensionError("dynamics: utility table " + schedule.base.shape_string() +
                         " does not match the network");
  for (const auto& s : schedule.shifts)
    if (s.stakeholder >= net.n_stakeholders() || s.metric >= net.n_metrics())
      throw DimensionError("dynamics: shift event outside the weight table");
  if (cfg.lambda_T > 0.0 && raw_models.empty())
    throw ConfigError("dynamics: lambda_T > 0 needs at least one tracked model");
  DynamicsContext ctx{cfg, std::move(schedule), {}, {}, influence_kernel(net, cfg.tau)};
  for (const auto& m : raw_models) ctx.tracked.push_back(adjusted_metrics(net, orient_metrics(net, m)));
  if (!ctx.tracked.empty()) ctx.m_tilde_signal = pooled_metrics(ctx.tracked, net.n_metrics());
  return ctx;
}

inline TraceRecord make_record(std::size_t t, DenseMatrix W, const DynamicsContext& ctx) {
  TraceRecord r;
  r.iteration = t;
  r.w_tilde = network_adjusted_weights(W, ctx.kernel);
  r.scores = score_models(ctx.tracked, r.w_tilde);
  r.W = std::move(W);
  return r;
}

/// Iterates until max_iterations steps or a debounced fixed point with no
/// scheduled shift still pending. Deterministic for identical inputs.
inline DynamicsTrace run(const DenseMatrix& W0, DynamicsContext ctx,
                         const std::function<void(const TraceRecord&)>& observer = {}) {
  const DynamicsConfig& cfg = ctx.config;
  if (W0.rows() != ctx.schedule.base.rows() || W0.cols() != ctx.schedule.base.cols())
    throw DimensionError("run: initial weights " + W0.shape_string() + " vs utilities " +
                         ctx.schedule.base.shape_string());
  DynamicsTrace trace{std::move(ctx), {}, std::nullopt};
  const DynamicsContext& c = trace.context;
  trace.records.push_back(make_record(0, W0, c));
  if (observer) observer(trace.records.back());

  DenseMatrix W = W0;
  std::size_t streak = 0;
  for (std::size_t t = 1; t <= c.config.max_iterations; ++t) {
    auto [next, srec] = step(W, c.schedule.at(t), c.m_tilde_signal, c.config);
    TraceRecord r = make_record(t, next, c);
    r.G_T = std::move(srec.G_T);
    r.G_H = std::move(srec.G_H);
    r.step_norm = srec.step_norm;
    r.projection_active = srec.projection_active;
    trace.records.push_back(std::move(r));
    if (observer) observer(trace.records.back());
    W = std::move(next);

    streak = trace.records.back().step_norm < cfg.fixed_point_tol ? streak + 1 : 0;
    if (streak >= cfg.debounce && !c.schedule.has_pending_after(t)) break;
  }
  trace.verdict = detect_fixed_point(trace, cfg.fixed_point_tol);
  return trace;
}

inline DynamicsTrace run(const BenchmarkNetwork& net, const DenseMatrix& W0,
                         UtilitySchedule schedule, const std::vector<MetricVector>& raw_models,
                         const DynamicsConfig& cfg,
                         const std::function<void(const TraceRecord&)>& observer = {}) {
  return run(W0, make_context(net, std::move(schedule), raw_models, cfg), observer);
}

// ============================================================================
// Step-size bound
// ============================================================================

struct SignalBounds {
  double L_T = 0.0;  // bound on ||broadcast G_T||_F
  double L_H = 0.0;  // bound on ||G_H||_F
};

/// Bounds from the run's input ranges.
///
///   L_T = 2 sqrt(H/K) * range(M~)            since |M~_k - mean| <= range
///   L_H = sqrt(HK) * max(g_hi - w_lo, w_hi - g_lo)
///
/// [g_lo, g_hi] covers g over the schedule's utility range, using
/// g_hi <= g(u_lo) + L_g (u_hi - u_lo); [w_lo, w_hi] is the range of the
/// weights each step starts from.
inline SignalBounds estimate_signal_bounds(const DynamicsTrace& trace) {
  const auto& ctx = trace.context;
  const std::size_t H = ctx.schedule.base.rows(), K = ctx.schedule.base.cols();
  SignalBounds b;
  if (H == 0 || K == 0) return b;
  if (!ctx.m_tilde_signal.empty()) {
    const auto [mn, mx] = std::minmax_element(ctx.m_tilde_signal.begin(), ctx.m_tilde_signal.end());
    b.L_T = 2.0 * std::sqrt(static_cast<double>(H) / static_cast<double>(K)) * (*mx - *mn);
  }
  const Transform& g = ctx.config.transform;
  const double Lg = g.lipschitz();  // throws for exponential without interval
  const auto [u_lo, u_hi] = ctx.schedule.range();
  const double g_lo = g(u_lo);
  const double g_hi = g_lo + Lg * (u_hi - u_lo);
  double w_lo = std::numeric_limits<double>::infinity(), w_hi = -w_lo;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i)
    for (double w : trace.records[i].W.data()) {
      w_lo = std::min(w_lo, w);
      w_hi = std::max(w_hi, w);
    }
  if (!std::isfinite(w_lo)) w_lo = w_hi = 0.0;
  b.L_H = std::sqrt(static_cast<double>(H * K)) * std::max({g_hi - w_lo, w_hi - g_lo, 0.0});
  return b;
}

struct StepCheck {
  std::size_t iteration = 0;
  double step_norm = 0.0;
  bool checked = false;  // false when the step started outside C
  bool ok = true;
};

struct StepBoundReport {
  double bound = 0.0;  // eta (lambda_T L_T + lambda_H L_H)
  bool asserted = true;  // false when the constraint set is not convex
  std::vector<StepCheck> checks;
  std::vector<std::size_t> violations;

  bool ok() const { return violations.empty(); }
};

/// ||W(t+1) - W(t)||_F <= eta (lambda_T L_T + lambda_H L_H) for every step
/// whose origin lies in C (projection is non-expansive there).
inline StepBoundReport step_bound_check(const DynamicsTrace& trace, double L_T, double L_H) {
  const auto& cfg = trace.context.config;
  StepBoundReport rep;
  rep.bound = cfg.eta * (cfg.lambda_T * L_T + cfg.lambda_H * L_H);
  rep.asserted = cfg.constraints.is_convex();
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    StepCheck c{trace.records[i].iteration, trace.records[i].step_norm, false, true};
    c.checked = rep.asserted && satisfies(trace.records[i - 1].W, cfg.constraints);
    if (c.checked) {
      c.ok = c.step_norm <= rep.bound * (1.0 + 1e-12) + 1e-15;
      if (!c.ok) rep.violations.push_back(c.iteration);
    }
    rep.checks.push_back(c);
  }
  return rep;
}

inline StepBoundReport step_bound_check(const DynamicsTrace& trace) {
  const SignalBounds b = estimate_signal_bounds(trace);
  return step_bound_check(trace, b.L_T, b.L_H);
}

// ============================================================================
// Serialization
// ============================================================================

inline json trace_record_to_json(const TraceRecord& r) {
  json j;
  j["t"] = r.iteration;
  j["W"] = io::matrix_to_json(r.W);
  j["G_T"] = io::vector_to_json(r.G_T);
  j["G_H"] = r.G_H.empty() ? json::array() : io::matrix_to_json(r.G_H);
  j["step_norm"] = r.step_norm;
  j["projection_active"] = r.projection_active;
  j["w_tilde"] = io::vector_to_json(r.w_tilde);
  j["scores"] = json::array();
  for (const auto& s : r.scores) j["scores"].push_back({{"model_id", s.model_id}, {"B", s.score}});
  return j;
}

inline std::string trace_to_jsonl(const DynamicsTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) out += trace_record_to_json(r).dump() + "\n";
  return out;
}

inline json verdict_to_json(const std::optional<FixedPointVerdict>& v) {
  if (!v) return nullptr;
  return {{"iteration", v->iteration},
          {"residual", v->residual},
          {"W_star", io::matrix_to_json(v->W_star)}};
}

inline json trace_summary_to_json(const DynamicsTrace& trace) {
  json j;
  j["iterations"] = trace.records.empty() ? 0 : trace.records.back().iteration;
  j["fixed_point"] = verdict_to_json(trace.verdict);
  j["final_W"] = trace.records.empty() ? json::array() : io::matrix_to_json(trace.back().W);
  j["final_w_tilde"] =
      trace.records.empty() ? json::array() : io::vector_to_json(trace.back().w_tilde);
  const auto& cfg = trace.context.config;
  j["config"] = {{"eta", cfg.eta},
                 {"lambda_T", cfg.lambda_T},
                 {"lambda_H", cfg.lambda_H},
                 {"transform", cfg.transform.describe()},
                 {"tau", cfg.tau},
                 {"max_iterations", cfg.max_iterations},
                 {"fixed_point_tol", cfg.fixed_point_tol},
                 {"constraints_convex", cfg.constraints.is_convex()}};
  try {
    const StepBoundReport rep = step_bound_check(trace);
    j["step_bound"] = {{"bound", rep.bound},
                       {"asserted", rep.asserted},
                       {"violations", rep.violations}};
  } catch (const ConfigError& e) {
    j["step_bound"] = {{"error", e.what()}};
  }
  return j;
}

// ----------------------------------------------------------------------------
// Config and schedule documents
// ----------------------------------------------------------------------------

inline ConstraintSet constraints_from_json(const json& j) {
  io::reject_unknown_keys(j, {"nonneg", "box_upper", "column_sum_cap", "sparsity_k"},
                          "constraints");
  ConstraintSet c;
  c.nonneg = j.value("nonneg", true);
  if (j.contains("box_upper") && !j["box_upper"].is_null()) c.box_upper = j["box_upper"].get<double>();
  if (j.contains("column_sum_cap") && !j["column_sum_cap"].is_null()) {
    const json& cap = j["column_sum_cap"];
    if (cap.is_number()) c.column_sum_cap = {cap.get<double>()};
    else c.column_sum_cap = cap.get<std::vector<double>>();
  }
  if (j.contains("sparsity_k") && !j["sparsity_k"].is_null())
    c.sparsity_k = j["sparsity_k"].get<std::size_t>();
  return c;
}

inline json constraints_to_json(const ConstraintSet& c) {
  json j = {{"nonneg", c.nonneg}};
  j["box_upper"] = c.box_upper ? json(*c.box_upper) : json(nullptr);
  j["column_sum_cap"] = c.column_sum_cap;
  j["sparsity_k"] = c.sparsity_k ? json(*c.sparsity_k) : json(nullptr);
  return j;
}

inline Transform transform_from_json(const json& j) {
  if (j.is_string()) return {parse_transform(j.get<std::string>()), 1.0, 1.0, std::nullopt};
  io::reject_unknown_keys(j, {"kind", "slope", "scale", "interval"}, "transform");
  Transform g;
  g.kind = parse_transform(j.value("kind", std::string("relu")));
  g.slope = j.value("slope", 1.0);
  g.scale = j.value("scale", 1.0);
  if (j.contains("interval") && !j["interval"].is_null()) {
    const auto iv = j["interval"].get<std::vector<double>>();
    if (iv.size() != 2) throw ParseError("transform: interval must be [lo, hi]");
    g.interval = std::pair{iv[0], iv[1]};
  }
  g.validate();
  return g;
}

inline DynamicsConfig dynamics_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("dynamics config: expected an object");
  io::reject_unknown_keys(j, {"eta", "lambda_T", "lambda_H", "transform", "constraints", "loss",
                              "tau", "max_iterations", "fixed_point_tol", "debounce"},
                          "dynamics config");
  DynamicsConfig c;
  try {
    c.eta = j.value("eta", c.eta);
    c.lambda_T = j.value("lambda_T", c.lambda_T);
    c.lambda_H = j.value("lambda_H", c.lambda_H);
    if (j.contains("transform")) c.transform = transform_from_json(j["transform"]);
    if (j.contains("constraints")) c.constraints = constraints_from_json(j["constraints"]);
    if (j.contains("loss") && j["loss"].get<std::string>() != "variance")
      throw ConfigError("dynamics config: only the variance loss is available");
    c.tau = j.value("tau", c.tau);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.fixed_point_tol = j.value("fixed_point_tol", c.fixed_point_tol);
    c.debounce = j.value("debounce", c.debounce);
  } catch (const json::exception& e) {
    throw ParseError(std::string("dynamics config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Schedule document: {"shifts": [{"iteration": 50, "stakeholder": "h2",
/// "metric": "lat", "delta": -1.0}, ...]} or a bare array of events.
inline std::vector<ShiftEvent> shifts_from_json(const json& j, const BenchmarkNetwork& net) {
  const json& arr = j.is_object() ? j.at("shifts") : j;
  if (!arr.is_array()) throw ParseError("schedule: expected an array of shift events");
  std::vector<ShiftEvent> out;
  for (const auto& e : arr) {
    io::reject_unknown_keys(e, {"iteration", "stakeholder", "metric", "delta"}, "shift event");
    try {
      out.push_back({e.at("iteration").get<std::size_t>(),
                     net.stakeholder_index(e.at("stakeholder").get<std::string>()),
                     net.metric_index(e.at("metric").get<std::string>()),
                     e.at("delta").get<double>()});
    } catch (const json::exception& ex) {
      throw ParseError(std::string("shift event: ") + ex.what());
    }
  }
  return out;
}

}  // namespace hbench
