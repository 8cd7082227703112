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

// End-to-end scenarios: synthetic or explicit stakeholder utilities, a shift
// schedule, a dynamics run and per-iteration leaderboards, plus the
// centralization index of stakeholder influence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hbench/conjoint.hpp"
#include "hbench/dynamics.hpp"
#include "hbench/error.hpp"
#include "hbench/network.hpp"
#include "hbench/rng.hpp"
#include "hbench/scoring.hpp"
#include "hbench/spec_io.hpp"
#include "hbench/weighting.hpp"

namespace hbench {

// ============================================================================
// Synthetic stakeholders
// ============================================================================

enum class UtilityDistribution { kUniform, kDegenerate, kNormal };

struct SyntheticStakeholderSpec {
  std::vector<std::string> stakeholder_ids;
  std::vector<std::string> metric_ids;
  UtilityDistribution distribution = UtilityDistribution::kUniform;
  double lo = 0.0;  // declared interval; normal draws are clamped into it
  double hi = 1.0;
  double value = 0.5;  // degenerate
  double mean = 0.5;   // normal
  double sd = 0.1;
};

inline UtilityVector synth_stakeholders(const SyntheticStakeholderSpec& spec, std::uint64_t seed) {
  if (!(spec.lo <= spec.hi) || !std::isfinite(spec.lo) || !std::isfinite(spec.hi))
    throw ConfigError("synth_stakeholders: invalid interval [" + csv::format_double(spec.lo) +
                      ", " + csv::format_double(spec.hi) + "]");
  if (spec.distribution == UtilityDistribution::kDegenerate &&
      (spec.value < spec.lo || spec.value > spec.hi))
    throw ConfigError("synth_stakeholders: degenerate value outside the declared interval");
  if (spec.distribution == UtilityDistribution::kNormal && !(spec.sd >= 0.0))
    throw ConfigError("synth_stakeholders: sd must be >= 0");

  UtilityVector U{spec.stakeholder_ids, spec.metric_ids,
                  DenseMatrix(spec.stakeholder_ids.size(), spec.metric_ids.size()), std::nullopt,
                  false};
  Rng rng(seed);
  for (double& u : U.u.data()) {
    switch (spec.distribution) {
      case UtilityDistribution::kUniform: u = rng.uniform(spec.lo, spec.hi); break;
      case UtilityDistribution::kDegenerate: u = spec.value; break;
      case UtilityDistribution::kNormal:
        u = std::clamp(rng.normal(spec.mean, spec.sd), spec.lo, spec.hi);
        break;
    }
  }
  return U;
}

// ============================================================================
// Centralization
// ============================================================================

/// Gini coefficient of per-stakeholder influence mass
/// s_h = sum_k w_hk C(h, k). 0 means evenly spread influence; a single
/// dominant stakeholder among n gives 1 - 1/n. All-zero influence is 0.
inline double centralization_index(const DenseMatrix& W, const DenseMatrix& C) {
  if (W.rows() != C.rows() || W.cols() != C.cols())
    throw DimensionError("centralization_index: W " + W.shape_string() + " vs C " +
                         C.shape_string());
  const std::size_t n = W.rows();
  if (n == 0) throw DimensionError("centralization_index: no stakeholders");
  std::vector<double> s(n, 0.0);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t k = 0; k < W.cols(); ++k) s[h] += W(h, k) * C(h, k);
  double total = 0.0;
  for (double x : s) total += x;
  if (total == 0.0) return 0.0;
  // Mean absolute difference over 2 * n * sum, via the sorted form.
  std::sort(s.begin(), s.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * s[i];
  return acc / (static_cast<double>(n) * total);
}

inline double centralization_index(const BenchmarkNetwork& net, const DenseMatrix& W, double tau) {
  return centralization_index(W, influence_kernel(net, tau));
}

// ============================================================================
// Scenario documents
// ============================================================================

enum class InitialWeights { kZero, kTarget };

struct Scenario {
  NetworkSpec network;
  std::uint64_t seed = 0;
  std::optional<UtilityVector> explicit_utilities;
  std::optional<SyntheticStakeholderSpec> synthetic;
  std::vector<ShiftEvent> shifts;
  DynamicsConfig dynamics;
  std::vector<MetricVector> models;  // raw values, network metric order
  InitialWeights initial = InitialWeights::kZero;
  bool emit_csv = true;
};

/// Scenario document:
///
///   {
///     "seed": 42,
///     "network": {...network document...} | "network_path": "f1.json",
///     "utilities": [{"stakeholder": "h1", "metric": "acc", "u": 1.0}, ...]
///       | "synthetic": {"distribution": "uniform", "lo": 0, "hi": 1, ...},
///     "shifts": [{"iteration": 50, "stakeholder": "h2", "metric": "lat", "delta": -1}],
///     "dynamics": {...dynamics config...},
///     "initial_weights": "zero" | "target",
///     "models": [{"id": "a", "metrics": {"acc": 0.8, "lat": 0.4}}],
///     "report": {"csv": true}
///   }
///
/// `base_dir` resolves a relative network_path.
inline Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir = {}) {
  if (!doc.is_object()) throw ParseError("scenario: expected an object");
  io::reject_unknown_keys(doc, {"seed", "network", "network_path", "utilities", "synthetic",
                                "shifts", "dynamics", "initial_weights", "models", "report"},
                          "scenario");
  Scenario s;
  const auto seed_ok = [](const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  };
  if (!doc.contains("seed") || !seed_ok(doc["seed"]))
    throw ConfigError("scenario: a nonnegative integer 'seed' is mandatory");
  s.seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("network")) {
    s.network = network_spec_from_json(doc["network"]);
  } else if (doc.contains("network_path")) {
    std::filesystem::path p = doc["network_path"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    s.network = load_spec(p);
  } else {
    throw ConfigError("scenario: 'network' or 'network_path' is required");
  }
  const BenchmarkNetwork net = build_network(s.network);

  try {
    if (doc.contains("utilities") == doc.contains("synthetic"))
      throw ConfigError("scenario: exactly one of 'utilities' and 'synthetic' is required");
    if (doc.contains("utilities")) {
      std::vector<csv::Triple> rows;
      for (const auto& e : doc["utilities"]) {
        io::reject_unknown_keys(e, {"stakeholder", "metric", "u"}, "scenario utility");
        rows.push_back({e.at("stakeholder").get<std::string>(), e.at("metric").get<std::string>(),
                        e.at("u").get<double>(), 0});
      }
      s.explicit_utilities = align_utilities(table_from_triples(rows, "scenario utilities"), net);
    } else {
      const json& j = doc["synthetic"];
      io::reject_unknown_keys(j, {"distribution", "lo", "hi", "value", "mean", "sd"},
                              "scenario synthetic");
      SyntheticStakeholderSpec sp;
      for (const auto& h : net.stakeholders()) sp.stakeholder_ids.push_back(h.id);
      for (const auto& m : net.metrics()) sp.metric_ids.push_back(m.id);
      const std::string dist = j.value("distribution", std::string("uniform"));
      if (dist == "uniform") sp.distribution = UtilityDistribution::kUniform;
      else if (dist == "degenerate") sp.distribution = UtilityDistribution::kDegenerate;
      else if (dist == "normal") sp.distribution = UtilityDistribution::kNormal;
      else throw ConfigError("scenario: unknown distribution '" + dist + "'");
      sp.lo = j.value("lo", sp.lo);
      sp.hi = j.value("hi", sp.hi);
      sp.value = j.value("value", sp.value);
      sp.mean = j.value("mean", sp.mean);
      sp.sd = j.value("sd", sp.sd);
      s.synthetic = sp;
    }

    if (doc.contains("shifts")) s.shifts = shifts_from_json(doc["shifts"], net);
    if (doc.contains("dynamics")) s.dynamics = dynamics_config_from_json(doc["dynamics"]);
    const std::string init = doc.value("initial_weights", std::string("zero"));
    if (init == "zero") s.initial = InitialWeights::kZero;
    else if (init == "target") s.initial = InitialWeights::kTarget;
    else throw ConfigError("scenario: initial_weights must be 'zero' or 'target'");

    if (doc.contains("models"))
      for (const auto& m : doc["models"]) {
        io::reject_unknown_keys(m, {"id", "metrics"}, "scenario model");
        MetricVector v{m.at("id").get<std::string>(), std::vector<double>(net.n_metrics(), 0.0)};
        const json& vals = m.at("metrics");
        if (vals.size() != net.n_metrics())
          throw Error("scenario: inconsistent metric set for model '" + v.model_id + "'");
        for (const auto& [metric, value] : vals.items())
          v.values[net.metric_index(metric)] = value.get<double>();
        s.models.push_back(std::move(v));
      }
    if (doc.contains("report")) s.emit_csv = doc["report"].value("csv", true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }

  for (const auto& sh : s.shifts)
    if (sh.iteration >= s.dynamics.max_iterations && s.dynamics.max_iterations > 0)
      throw ConfigError("scenario: shift at iteration " + std::to_string(sh.iteration) +
                        " is not below max_iterations " +
                        std::to_string(s.dynamics.max_iterations));
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& p) {
  return scenario_from_json(io::parse_json(io::read_file(p), "scenario"), p.parent_path());
}

// ============================================================================
// Execution
// ============================================================================

struct LeaderboardSnapshot {
  std::size_t iteration = 0;
  std::vector<ModelScore> ranking;  // best first, ties by ascending id
};

struct ScenarioReport {
  std::uint64_t seed = 0;
  DynamicsTrace trace;
  std::vector<LeaderboardSnapshot> leaderboards;
  std::vector<bool> churn_flags;  // per record; record 0 is never churn
  std::size_t churn_count = 0;
  std::vector<double> centralization;
  StepBoundReport step_bound;
};

inline std::vector<ModelScore> ranked(std::vector<ModelScore> s) {
  std::sort(s.begin(), s.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.model_id < b.model_id;
  });
  return s;
}

inline ScenarioReport run_scenario(const Scenario& s) {
  const BenchmarkNetwork net = build_network(s.network);
  UtilityVector U = s.explicit_utilities
                        ? *s.explicit_utilities
                        : align_utilities(synth_stakeholders(*s.synthetic, s.seed), net);
  const DynamicsConfig& cfg = s.dynamics;
  UtilitySchedule schedule{U.u, s.shifts};

  DenseMatrix W0 = s.initial == InitialWeights::kZero
                       ? DenseMatrix(net.n_stakeholders(), net.n_metrics())
                       : apply_transform(U.u, cfg.transform);
  W0 = project(W0, cfg.constraints);

  ScenarioReport rep;
  rep.seed = s.seed;
  rep.trace = run(net, W0, schedule, s.models, cfg);

  const DenseMatrix& C = rep.trace.context.kernel;
  for (std::size_t i = 0; i < rep.trace.records.size(); ++i) {
    const TraceRecord& r = rep.trace.records[i];
    rep.leaderboards.push_back({r.iteration, ranked(r.scores)});
    bool churn = false;
    if (i > 0) {
      const auto& prev = rep.leaderboards[i - 1].ranking;
      const auto& cur = rep.leaderboards[i].ranking;
      for (std::size_t m = 0; m < cur.size(); ++m) churn = churn || cur[m].model_id != prev[m].model_id;
    }
    rep.churn_flags.push_back(churn);
    rep.churn_count += churn;
    rep.centralization.push_back(centralization_index(r.W, C));
  }
  rep.step_bound = step_bound_check(rep.trace);
  return rep;
}

inline json scenario_report_to_json(const ScenarioReport& rep) {
  json j;
  j["seed"] = rep.seed;
  j["summary"] = trace_summary_to_json(rep.trace);
  j["churn_count"] = rep.churn_count;
  j["churn_iterations"] = json::array();
  for (std::size_t i = 0; i < rep.churn_flags.size(); ++i)
    if (rep.churn_flags[i]) j["churn_iterations"].push_back(rep.leaderboards[i].iteration);
  j["leaderboards"] = json::array();
  for (const auto& lb : rep.leaderboards) {
    json order = json::array();
    for (const auto& m : lb.ranking) order.push_back({{"model_id", m.model_id}, {"B", m.score}});
    j["leaderboards"].push_back({{"t", lb.iteration}, {"ranking", order}});
  }
  j["centralization"] = rep.centralization;
  j["step_bound"] = {{"bound", rep.step_bound.bound},
                     {"asserted", rep.step_bound.asserted},
                     {"violations", rep.step_bound.violations}};
  return j;
}

/// iteration, B per model (scenario model order), churn flag, centralization.
inline std::string scenario_report_to_csv(const ScenarioReport& rep) {
  std::string out = "iteration";
  const auto& recs = rep.trace.records;
  if (!recs.empty())
    for (const auto& s : recs.front().scores) out += ",B_" + csv::quote(s.model_id);
  out += ",step_norm,churn,centralization\n";
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out += std::to_string(recs[i].iteration);
    for (const auto& s : recs[i].scores) out += "," + csv::format_double(s.score);
    out += "," + csv::format_double(recs[i].step_norm);
    out += rep.churn_flags[i] ? ",1" : ",0";
    out += "," + csv::format_double(rep.centralization[i]) + "\n";
  }
  return out;
}

}  // namespace hbench
