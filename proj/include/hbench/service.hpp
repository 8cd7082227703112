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

// Session-oriented elicitation service.
//
// A session owns a network, an attribute catalog, a conjoint design and the
// ordered log of ratings it has accepted. Everything else (part-worths,
// utilities, the weight table, the trace) is derived from that log, so
// replaying the log against a fresh session reproduces the state exactly.
//
// SessionCore holds the logic and is single-threaded. SessionStore adds
// per-session write serialization and publishes immutable snapshots that
// readers load without taking the write lock. make_http_server wires the
// store to cpp-httplib.

#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "hbench/hbench.hpp"

namespace hbench::service {

inline constexpr const char* kMediaType = "application/vnd.hbench.v1+json";
inline constexpr const char* kJsonLinesType = "application/x-ndjson";

// ============================================================================
// Errors
// ============================================================================

/// Carries the HTTP status the failure maps to. `details` is attached to the
/// error body verbatim (a ValidationReport for rejected networks).
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& what, json details = nullptr)
      : Error(what), status_(status), code_(std::move(code)), details_(std::move(details)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const json& details() const { return details_; }

 private:
  int status_;
  std::string code_;
  json details_;
};

// ============================================================================
// Session configuration
// ============================================================================

struct SessionConfig {
  std::size_t batch_size = 5;
  double rating_lo = 0.0;
  double rating_hi = 10.0;
  std::size_t n_profiles = 0;  // 0: twice the coefficient count
  std::uint64_t seed = 0;
  ExtractionMode mode = ExtractionMode::kRange;
  DynamicsConfig dynamics;
};

/// Everything a session is created from. Kept verbatim so a replay can
/// rebuild an identical session.
struct SessionSpec {
  NetworkSpec network;
  AttributeCatalog catalog;
  SessionConfig config;
  std::vector<MetricVector> models;  // raw values, network metric order
};

inline AttributeCatalog catalog_from_json(const json& j) {
  const json& arr = j.is_object() ? j.at("attributes") : j;
  if (!arr.is_array()) throw ParseError("catalog: expected an array of attributes");
  AttributeCatalog cat;
  for (const auto& a : arr) {
    io::reject_unknown_keys(a, {"metric", "levels", "descriptions"}, "catalog attribute");
    Attribute at;
    at.metric_id = a.at("metric").get<std::string>();
    at.levels = a.at("levels").get<std::vector<std::string>>();
    if (a.contains("descriptions"))
      at.descriptions = a["descriptions"].get<std::vector<std::string>>();
    cat.attributes.push_back(std::move(at));
  }
  return cat;
}

inline json catalog_to_json(const AttributeCatalog& cat) {
  json arr = json::array();
  for (const auto& a : cat.attributes) {
    json j = {{"metric", a.metric_id}, {"levels", a.levels}};
    if (!a.descriptions.empty()) j["descriptions"] = a.descriptions;
    arr.push_back(std::move(j));
  }
  return {{"attributes", arr}};
}

inline std::vector<MetricVector> models_from_json(const json& arr, const BenchmarkNetwork& net) {
  std::vector<MetricVector> out;
  for (const auto& m : arr) {
    io::reject_unknown_keys(m, {"id", "metrics"}, "model");
    MetricVector v{m.at("id").get<std::string>(), std::vector<double>(net.n_metrics(), 0.0)};
    const json& vals = m.at("metrics");
    if (!vals.is_object() || vals.size() != net.n_metrics())
      throw Error("inconsistent metric set for model '" + v.model_id + "'");
    for (const auto& [metric, value] : vals.items())
      v.values[net.metric_index(metric)] = value.get<double>();
    out.push_back(std::move(v));
  }
  return out;
}

/// Session creation document:
///
///   {
///     "network": {...network document...},
///     "catalog": {"attributes": [{"metric": "acc", "levels": ["low", "high"]}]},
///     "config": {"batch_size": 5, "rating_range": [0, 10], "n_profiles": 8,
///                "seed": 1, "extraction_mode": "range", "dynamics": {...}},
///     "models": [{"id": "a", "metrics": {"acc": 0.8, "lat": 0.4}}],
///     "idempotency_key": "optional"
///   }
inline SessionSpec session_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("session: expected an object");
  io::reject_unknown_keys(doc, {"network", "catalog", "config", "models", "idempotency_key"},
                          "session");
  if (!doc.contains("network")) throw ParseError("session: 'network' is required");
  if (!doc.contains("catalog")) throw ParseError("session: 'catalog' is required");
  SessionSpec s;
  s.network = network_spec_from_json(doc["network"]);
  const ValidationReport rep = validate_network(s.network);
  if (!rep.accepted())
    throw ServiceError(422, "invalid_network", "network rejected: " + rep.summary(),
                       validation_report_to_json(rep));
  const BenchmarkNetwork net = build_network(s.network);
  try {
    s.catalog = catalog_from_json(doc["catalog"]);
    if (doc.contains("config")) {
      const json& c = doc["config"];
      io::reject_unknown_keys(c, {"batch_size", "rating_range", "n_profiles", "seed",
                                  "extraction_mode", "dynamics"},
                              "session config");
      s.config.batch_size = c.value("batch_size", s.config.batch_size);
      if (c.contains("rating_range")) {
        const auto r = c["rating_range"].get<std::vector<double>>();
        if (r.size() != 2) throw ParseError("session config: rating_range must be [lo, hi]");
        s.config.rating_lo = r[0];
        s.config.rating_hi = r[1];
      }
      s.config.n_profiles = c.value("n_profiles", s.config.n_profiles);
      s.config.seed = c.value("seed", s.config.seed);
      if (c.contains("extraction_mode"))
        s.config.mode = parse_mode(c["extraction_mode"].get<std::string>());
      if (c.contains("dynamics")) s.config.dynamics = dynamics_config_from_json(c["dynamics"]);
    }
    if (doc.contains("models")) s.models = models_from_json(doc["models"], net);
  } catch (const json::exception& e) {
    throw ParseError(std::string("session: ") + e.what());
  }
  return s;
}

// ============================================================================
// Session core
// ============================================================================

struct LoggedResponse {
  std::size_t seq = 0;  // arrival order, 1-based
  std::string stakeholder_id;
  std::string profile_id;
  double rating = 0.0;
};

inline json logged_response_to_json(const LoggedResponse& r) {
  return {{"seq", r.seq},
          {"stakeholder", r.stakeholder_id},
          {"profile", r.profile_id},
          {"rating", r.rating}};
}

struct Task {
  bool complete = false;
  std::string stakeholder_id;
  std::optional<Profile> profile;
  std::size_t answered = 0;
  std::size_t total = 0;
};

struct SubmitSummary {
  std::size_t seq = 0;
  bool stepped = false;
  std::size_t iteration = 0;
  std::optional<double> step_norm;
  std::vector<double> w_tilde;
  std::vector<ModelScore> scores;
};

/// Single-threaded session logic. All state is a function of the spec and
/// the accepted response log.
class SessionCore {
 public:
  explicit SessionCore(SessionSpec spec)
      : spec_(std::move(spec)), net_(build_network(spec_.network)) {
    const SessionConfig& cfg = spec_.config;
    if (cfg.batch_size == 0) throw ConfigError("session: batch_size must be >= 1");
    if (!(cfg.rating_lo < cfg.rating_hi) || !std::isfinite(cfg.rating_lo) ||
        !std::isfinite(cfg.rating_hi))
      throw ConfigError("session: rating_range must satisfy lo < hi");
    spec_.catalog.validate();
    for (const auto& a : spec_.catalog.attributes) attr_metric_.push_back(net_.metric_index(a.metric_id));
    if (attr_metric_.size() != net_.n_metrics())
      throw ConfigError("session: the catalog must cover every network metric exactly once");
    const std::size_t n = cfg.n_profiles ? cfg.n_profiles : 2 * spec_.catalog.n_columns();
    design_ = generate_design(spec_.catalog, n, cfg.seed);

    const std::size_t H = net_.n_stakeholders(), K = net_.n_metrics();
    ctx_ = make_context(net_, UtilitySchedule{DenseMatrix(H, K), {}}, spec_.models, cfg.dynamics);
    U_ = DenseMatrix(H, K);
    W0_ = project(DenseMatrix(H, K), cfg.dynamics.constraints);
    W_ = W0_;
    fitted_.assign(H, false);
    answered_.assign(H, {});
    order_.resize(H);
    for (std::size_t h = 0; h < H; ++h) {
      // Per-stakeholder permutation derived from the session seed only.
      std::vector<std::size_t> perm(design_.profiles.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      Rng rng(cfg.seed ^ fnv1a64(net_.stakeholders()[h].id));
      rng.shuffle(perm);
      order_[h] = std::move(perm);
    }
  }

  const SessionSpec& spec() const { return spec_; }
  const BenchmarkNetwork& network() const { return net_; }
  const ConjointDesign& design() const { return design_; }
  const DenseMatrix& weights() const { return W_; }
  const DenseMatrix& initial_weights() const { return W0_; }
  const DenseMatrix& utilities() const { return U_; }
  const std::vector<LoggedResponse>& log() const { return log_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::optional<FixedPointVerdict>& verdict() const { return verdict_; }
  const DynamicsContext& context() const { return ctx_; }
  std::size_t pending_in_batch() const { return pending_; }

  Task next_task(std::string_view stakeholder) const {
    const std::size_t h = stakeholder_or_404(stakeholder);
    Task t;
    t.stakeholder_id = std::string(stakeholder);
    t.total = design_.profiles.size();
    t.answered = answered_[h].size();
    for (std::size_t pi : order_[h])
      if (!answered_[h].contains(pi)) {
        t.profile = design_.profiles[pi];
        return t;
      }
    t.complete = true;
    return t;
  }

  /// Validates and applies one rating. Throws ServiceError without touching
  /// any state when the response is rejected.
  SubmitSummary submit(std::string_view stakeholder, std::string_view profile, double rating) {
    const std::size_t h = stakeholder_or_404(stakeholder);
    std::size_t pi;
    try {
      pi = design_.profile_index(profile);
    } catch (const UnknownIdError& e) {
      throw ServiceError(404, "unknown_profile", e.what());
    }
    if (answered_[h].contains(pi))
      throw ServiceError(409, "duplicate_response",
                         "stakeholder '" + std::string(stakeholder) + "' already rated profile '" +
                             std::string(profile) + "'");
    const SessionConfig& cfg = spec_.config;
    if (!std::isfinite(rating) || rating < cfg.rating_lo || rating > cfg.rating_hi)
      throw ServiceError(422, "rating_out_of_range",
                         "rating " + csv::format_double(rating) + " outside [" +
                             csv::format_double(cfg.rating_lo) + ", " +
                             csv::format_double(cfg.rating_hi) + "]");

    answered_[h].emplace(pi, rating);
    log_.push_back({log_.size() + 1, std::string(stakeholder), std::string(profile), rating});
    SubmitSummary s;
    s.seq = log_.size();
    if (++pending_ >= cfg.batch_size) {
      pending_ = 0;
      refit();
      advance();
      s.stepped = true;
      s.step_norm = trace_.back().step_norm;
    }
    s.iteration = trace_.size();
    s.w_tilde = network_adjusted_weights(W_, ctx_.kernel);
    s.scores = score_models(ctx_.tracked, s.w_tilde);
    return s;
  }

  /// Rebuilds a fresh session from the spec and re-applies the log.
  static SessionCore replay(const SessionSpec& spec, const std::vector<LoggedResponse>& log) {
    SessionCore c(spec);
    for (const auto& r : log) c.submit(r.stakeholder_id, r.profile_id, r.rating);
    return c;
  }

 private:
  std::size_t stakeholder_or_404(std::string_view id) const {
    try {
      return net_.stakeholder_index(std::string(id));
    } catch (const UnknownIdError& e) {
      throw ServiceError(404, "unknown_stakeholder", e.what());
    }
  }

  /// Refits every stakeholder whose rated rows identify the coefficients;
  /// others keep their previous utilities.
  void refit() {
    for (std::size_t h = 0; h < net_.n_stakeholders(); ++h) {
      if (answered_[h].size() < design_.matrix.cols()) continue;
      std::vector<std::size_t> rows;
      std::vector<double> y;
      for (const auto& [pi, r] : answered_[h]) {
        rows.push_back(pi);
        y.push_back(r);
      }
      StakeholderPartWorths pw;
      try {
        pw = fit_stakeholder(design_, net_.stakeholders()[h].id, rows, y);
      } catch (const DesignError&) {
        continue;
      }
      PartWorths one{spec_.catalog, {pw}};
      const UtilityVector u = aggregate_utilities(one, spec_.config.mode);
      for (std::size_t a = 0; a < attr_metric_.size(); ++a) U_(h, attr_metric_[a]) = u.u(0, a);
      fitted_[h] = true;
    }
  }

  void advance() {
    const DynamicsConfig& cfg = ctx_.config;
    auto [next, srec] = step(W_, U_, ctx_.m_tilde_signal, cfg);
    TraceRecord r = make_record(trace_.size() + 1, next, ctx_);
    r.G_T = std::move(srec.G_T);
    r.G_H = std::move(srec.G_H);
    r.step_norm = srec.step_norm;
    r.projection_active = srec.projection_active;
    trace_.push_back(std::move(r));
    W_ = std::move(next);
    streak_ = trace_.back().step_norm < cfg.fixed_point_tol ? streak_ + 1 : 0;
    if (streak_ >= cfg.debounce)
      verdict_ = FixedPointVerdict{trace_.back().iteration, W_,
                                   fixed_point_residual(W_, U_, ctx_.m_tilde_signal, cfg)};
    else
      verdict_.reset();
  }

  SessionSpec spec_;
  BenchmarkNetwork net_;
  ConjointDesign design_;
  DynamicsContext ctx_;
  std::vector<std::size_t> attr_metric_;  // attribute -> network metric index
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::map<std::size_t, double>> answered_;
  std::vector<bool> fitted_;
  std::vector<LoggedResponse> log_;
  std::vector<TraceRecord> trace_;
  std::optional<FixedPointVerdict> verdict_;
  DenseMatrix U_, W0_, W_;
  std::size_t pending_ = 0;
  std::size_t streak_ = 0;
};

// ============================================================================
// Snapshots
// ============================================================================

/// Immutable view of a session after some number of accepted responses.
struct Snapshot {
  std::string session_id;
  std::size_t responses = 0;
  std::size_t pending_in_batch = 0;
  DenseMatrix W;
  DenseMatrix U;
  std::vector<double> w_tilde;
  std::optional<Leaderboard> leaderboard;
  std::shared_ptr<const std::vector<TraceRecord>> trace;
  std::optional<FixedPointVerdict> verdict;
};

inline std::shared_ptr<const Snapshot> take_snapshot(const std::string& id, const SessionCore& c) {
  auto s = std::make_shared<Snapshot>();
  s->session_id = id;
  s->responses = c.log().size();
  s->pending_in_batch = c.pending_in_batch();
  s->W = c.weights();
  s->U = c.utilities();
  s->w_tilde = network_adjusted_weights(c.weights(), c.context().kernel);
  if (!c.spec().models.empty()) {
    ScoringFingerprint fp{network_hash(c.network()), c.spec().config.dynamics.tau,
                          c.spec().config.dynamics.transform.describe(),
                          std::string(mode_name(c.spec().config.mode))};
    s->leaderboard =
        leaderboard_with_kernel(c.network(), c.weights(), c.spec().models, c.context().kernel, fp);
  }
  s->trace = std::make_shared<const std::vector<TraceRecord>>(c.trace());
  s->verdict = c.verdict();
  return s;
}

inline json labelled_table(const DenseMatrix& M, const BenchmarkNetwork& net) {
  json sh = json::array(), mt = json::array();
  for (const auto& h : net.stakeholders()) sh.push_back(h.id);
  for (const auto& m : net.metrics()) mt.push_back(m.id);
  return {{"stakeholder_ids", sh}, {"metric_ids", mt}, {"values", io::matrix_to_json(M)}};
}

/// State document. The trace tail holds records with iteration > since.
inline json snapshot_to_json(const Snapshot& s, const BenchmarkNetwork& net, std::size_t since) {
  json j;
  j["session_id"] = s.session_id;
  const SupraLayout L = layout_of(net);
  j["network"] = {{"metrics", L.n_metric},
                  {"components", L.n_model},
                  {"stakeholders", L.n_stakeholder},
                  {"supra_size", L.total()},
                  {"hash", network_hash(net)}};
  j["responses"] = s.responses;
  j["pending_in_batch"] = s.pending_in_batch;
  j["iteration"] = s.trace->size();
  j["W"] = labelled_table(s.W, net);
  j["utilities"] = labelled_table(s.U, net);
  j["w_tilde"] = io::vector_to_json(s.w_tilde);
  j["leaderboard"] = s.leaderboard ? leaderboard_to_json(*s.leaderboard) : json(nullptr);
  j["trace"] = json::array();
  for (const auto& r : *s.trace)
    if (r.iteration > since) j["trace"].push_back(trace_record_to_json(r));
  j["cursor"] = s.trace->size();
  j["fixed_point"] = verdict_to_json(s.verdict);
  return j;
}

inline json task_to_json(const Task& t, const ConjointDesign& d, const SessionConfig& cfg) {
  json j = {{"stakeholder", t.stakeholder_id},
            {"complete", t.complete},
            {"answered", t.answered},
            {"total", t.total},
            {"rating_range", {cfg.rating_lo, cfg.rating_hi}}};
  if (!t.profile) {
    j["task"] = nullptr;
    return j;
  }
  json attrs = json::array();
  for (std::size_t a = 0; a < d.catalog.attributes.size(); ++a) {
    const Attribute& at = d.catalog.attributes[a];
    const std::size_t l = t.profile->levels[a];
    json e = {{"metric", at.metric_id}, {"level", at.levels[l]}};
    if (!at.descriptions.empty()) e["description"] = at.descriptions[l];
    attrs.push_back(std::move(e));
  }
  j["task"] = {{"kind", "rating"}, {"profile_id", t.profile->id}, {"attributes", attrs}};
  return j;
}

inline json submit_summary_to_json(const SubmitSummary& s) {
  json j = {{"accepted", true}, {"seq", s.seq}, {"stepped", s.stepped}, {"iteration", s.iteration}};
  j["step_norm"] = s.step_norm ? json(*s.step_norm) : json(nullptr);
  j["w_tilde"] = io::vector_to_json(s.w_tilde);
  j["scores"] = json::array();
  for (const auto& m : s.scores) j["scores"].push_back({{"model_id", m.model_id}, {"B", m.score}});
  return j;
}

// ============================================================================
// Store
// ============================================================================

/// One live session: the core behind a write mutex plus the last published
/// snapshot, which readers load atomically.
class Session {
 public:
  Session(std::string id, SessionSpec spec) : id_(std::move(id)), core_(std::move(spec)) {
    publish();
  }

  const std::string& id() const { return id_; }

  std::shared_ptr<const Snapshot> snapshot() const { return std::atomic_load(&snap_); }

  const BenchmarkNetwork& network() const { return core_.network(); }  // immutable after ctor
  const ConjointDesign& design() const { return core_.design(); }
  const SessionSpec& spec() const { return core_.spec(); }

  Task next_task(std::string_view stakeholder) const {
    std::lock_guard lock(mu_);
    return core_.next_task(stakeholder);
  }

  /// Applied in arrival order; the snapshot is swapped only after the whole
  /// refit and step finished.
  SubmitSummary submit(std::string_view stakeholder, std::string_view profile, double rating,
                       std::ostream* log_sink = nullptr) {
    std::lock_guard lock(mu_);
    SubmitSummary s = core_.submit(stakeholder, profile, rating);
    if (log_sink) {
      json line = logged_response_to_json(core_.log().back());
      line["session"] = id_;
      *log_sink << line.dump() << '\n';
      log_sink->flush();
    }
    publish();
    return s;
  }

  std::vector<LoggedResponse> log() const {
    std::lock_guard lock(mu_);
    return core_.log();
  }

 private:
  void publish() { std::atomic_store(&snap_, take_snapshot(id_, core_)); }

  std::string id_;
  mutable std::mutex mu_;
  SessionCore core_;
  std::shared_ptr<const Snapshot> snap_;
};

struct StoreOptions {
  std::optional<std::filesystem::path> response_log;  // JSONL, appended
};

class SessionStore {
 public:
  explicit SessionStore(StoreOptions opt = {}) : opt_(std::move(opt)) {
    if (opt_.response_log) {
      log_.open(*opt_.response_log, std::ios::app);
      if (!log_) throw Error("cannot open response log '" + opt_.response_log->string() + "'");
    }
  }

  /// Creates a session, or returns the existing one for a repeated
  /// idempotency key. Reusing a key with a different document is a conflict.
  std::pair<std::string, bool> create(const json& doc, std::optional<std::string> key = {}) {
    if (!key && doc.is_object() && doc.contains("idempotency_key"))
      key = doc["idempotency_key"].get<std::string>();
    json body = doc;
    if (body.is_object()) body.erase("idempotency_key");
    const std::string fingerprint = body.dump();
    if (key) {
      std::shared_lock lock(mu_);
      if (auto it = keys_.find(*key); it != keys_.end()) {
        if (it->second.second != fingerprint)
          throw ServiceError(409, "idempotency_conflict",
                             "idempotency key reused with a different document");
        return {it->second.first, false};
      }
    }
    SessionSpec spec = session_spec_from_json(doc);
    auto session = std::make_shared<Session>(new_id(), std::move(spec));
    std::unique_lock lock(mu_);
    if (key) {
      // A concurrent create with the same key may have won the race.
      if (auto it = keys_.find(*key); it != keys_.end()) return {it->second.first, false};
      keys_[*key] = {session->id(), fingerprint};
    }
    sessions_[session->id()] = session;
    return {session->id(), true};
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "unknown session '" + id + "'");
    return it->second;
  }

  SubmitSummary submit(const std::string& id, std::string_view stakeholder,
                       std::string_view profile, double rating) {
    auto s = get(id);
    if (!log_.is_open()) return s->submit(stakeholder, profile, rating);
    std::lock_guard lock(log_mu_);
    return s->submit(stakeholder, profile, rating, &log_);
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }

 private:
  std::string new_id() {
    std::lock_guard lock(id_mu_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng_()));
    return buf;
  }

  StoreOptions opt_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::pair<std::string, std::string>> keys_;  // key -> (id, body)
  std::mutex id_mu_;
  std::mt19937_64 id_rng_{std::random_device{}()};
  std::mutex log_mu_;
  std::ofstream log_;
};

// ============================================================================
// HTTP
// ============================================================================

inline json error_body(int status, const std::string& code, const std::string& message,
                       const json& details = nullptr) {
  json j = {{"error", {{"status", status}, {"code", code}, {"message", message}}}};
  if (!details.is_null()) j["error"]["details"] = details;
  if (details.is_object() && details.contains("findings")) j["validation"] = details;
  return j;
}

inline void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kMediaType);
}

/// Runs a handler and maps engine exceptions onto 4xx responses.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    reply(res, e.status(), error_body(e.status(), e.code(), e.what(), e.details()));
  } catch (const NetworkValidationError& e) {
    const json rep = validation_report_to_json(e.report());
    reply(res, 422, error_body(422, "invalid_network", e.what(), rep));
  } catch (const ParseError& e) {
    reply(res, 400, error_body(400, "malformed_document", e.what()));
  } catch (const UnknownIdError& e) {
    reply(res, 404, error_body(404, "unknown_id", e.what()));
  } catch (const Error& e) {
    reply(res, 422, error_body(422, "invalid_request", e.what()));
  } catch (const json::exception& e) {
    reply(res, 400, error_body(400, "malformed_document", e.what()));
  }
}

inline json parse_body(const httplib::Request& req) {
  return io::parse_json(req.body, "request body");
}

/// Registers every route on `srv`. The store must outlive the server.
inline void register_routes(httplib::Server& srv, SessionStore& store) {
  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}, {"media_type", kMediaType}});
  });

  srv.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> key;
      if (req.has_header("Idempotency-Key")) key = req.get_header_value("Idempotency-Key");
      const auto [id, created] = store.create(parse_body(req), key);
      auto s = store.get(id);
      json body = {{"session_id", id},
                   {"created", created},
                   {"supra_size", layout_of(s->network()).total()},
                   {"profiles", s->design().profiles.size()},
                   {"batch_size", s->spec().config.batch_size},
                   {"catalog", catalog_to_json(s->design().catalog)}};
      reply(res, created ? 201 : 200, body);
    });
  });

  srv.Get(R"(/sessions/([^/]+)/tasks/([^/]+))",
          [&store](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              auto s = store.get(req.matches[1]);
              const Task t = s->next_task(std::string(req.matches[2]));
              reply(res, 200, task_to_json(t, s->design(), s->spec().config));
            });
          });

  srv.Post(R"(/sessions/([^/]+)/responses)",
           [&store](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const json b = parse_body(req);
               io::reject_unknown_keys(b, {"stakeholder", "profile", "rating"}, "response");
               if (!b.contains("rating") || !b["rating"].is_number())
                 throw ParseError("response: 'rating' must be a number");
               const auto sum = store.submit(req.matches[1], b.at("stakeholder").get<std::string>(),
                                             b.at("profile").get<std::string>(),
                                             b["rating"].get<double>());
               reply(res, 200, submit_summary_to_json(sum));
             });
           });

  srv.Get(R"(/sessions/([^/]+)/state)",
          [&store](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              std::size_t since = 0;
              if (req.has_param("since")) {
                const std::string v = req.get_param_value("since");
                std::size_t pos = 0;
                try {
                  since = std::stoull(v, &pos);
                } catch (const std::exception&) {
                  pos = 0;
                }
                if (pos != v.size() || v.empty() || v[0] == '-')
                  throw ParseError("state: 'since' must be a nonnegative integer");
              }
              auto s = store.get(req.matches[1]);
              reply(res, 200, snapshot_to_json(*s->snapshot(), s->network(), since));
            });
          });

  srv.Get(R"(/sessions/([^/]+)/trace)",
          [&store](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              auto s = store.get(req.matches[1]);
              const auto snap = s->snapshot();
              std::string out;
              for (const auto& r : *snap->trace) out += trace_record_to_json(r).dump() + "\n";
              res.status = 200;
              res.set_content(out, kJsonLinesType);
            });
          });
}

}  // namespace hbench::service
