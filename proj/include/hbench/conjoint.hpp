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

// Rating-based conjoint analysis: design generation under effects coding,
// per-stakeholder OLS part-worths, and extraction of metric-level utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hbench/csv.hpp"
#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/rng.hpp"

namespace hbench {

// ============================================================================
// Catalog and design
// ============================================================================

/// One conjoint attribute: the levels at which metric `metric_id` is shown
/// to respondents.
struct Attribute {
  std::string metric_id;
  std::vector<std::string> levels;
  std::vector<std::string> descriptions;  // optional, same length as levels

  bool operator==(const Attribute&) const = default;
};

struct AttributeCatalog {
  std::vector<Attribute> attributes;

  void validate() const {
    if (attributes.empty()) throw ConfigError("attribute catalog: no attributes");
    std::set<std::string> metric_ids;
    for (const auto& a : attributes) {
      if (a.levels.size() < 2)
        throw ConfigError("attribute '" + a.metric_id + "' needs at least 2 levels");
      if (!metric_ids.insert(a.metric_id).second)
        throw ConfigError("attribute catalog: duplicate metric '" + a.metric_id + "'");
      std::set<std::string> labels(a.levels.begin(), a.levels.end());
      if (labels.size() != a.levels.size())
        throw ConfigError("attribute '" + a.metric_id + "' has duplicate level labels");
      if (!a.descriptions.empty() && a.descriptions.size() != a.levels.size())
        throw ConfigError("attribute '" + a.metric_id +
                          "': descriptions must match levels one-to-one");
    }
  }

  /// Design-matrix columns: intercept plus (L_k - 1) per attribute.
  std::size_t n_columns() const {
    std::size_t p = 1;
    for (const auto& a : attributes) p += a.levels.size() - 1;
    return p;
  }

  std::size_t level_index(std::size_t attr, std::string_view label) const {
    const auto& lv = attributes.at(attr).levels;
    for (std::size_t i = 0; i < lv.size(); ++i)
      if (lv[i] == label) return i;
    throw UnknownIdError("unknown level '" + std::string(label) +
                         "' for attribute '" + attributes[attr].metric_id + "'");
  }

  bool operator==(const AttributeCatalog&) const = default;
};

/// A full assignment of one level index per attribute.
struct Profile {
  std::string id;
  std::vector<std::size_t> levels;

  bool operator==(const Profile&) const = default;
};

/// Effects-coded row: 1 (intercept), then per attribute L_k - 1 entries.
/// Level l < L_k - 1 sets its own column to +1; the last level sets all of
/// the attribute's columns to -1.
inline std::vector<double> effects_row(const AttributeCatalog& cat,
                                       std::span<const std::size_t> levels) {
  if (levels.size() != cat.attributes.size())
    throw DimensionError("profile assigns " + std::to_string(levels.size()) +
                         " levels for " + std::to_string(cat.attributes.size()) +
                         " attributes");
  std::vector<double> row;
  row.reserve(cat.n_columns());
  row.push_back(1.0);
  for (std::size_t a = 0; a < cat.attributes.size(); ++a) {
    const std::size_t L = cat.attributes[a].levels.size();
    if (levels[a] >= L)
      throw UnknownIdError("level index " + std::to_string(levels[a]) +
                           " out of range for attribute '" +
                           cat.attributes[a].metric_id + "'");
    for (std::size_t l = 0; l + 1 < L; ++l)
      row.push_back(levels[a] == L - 1 ? -1.0 : (levels[a] == l ? 1.0 : 0.0));
  }
  return row;
}

struct ConjointDesign {
  AttributeCatalog catalog;
  std::vector<Profile> profiles;
  DenseMatrix matrix;  // profiles x catalog.n_columns()
  std::uint64_t seed = 0;

  std::size_t profile_index(std::string_view id) const {
    for (std::size_t i = 0; i < profiles.size(); ++i)
      if (profiles[i].id == id) return i;
    throw UnknownIdError("unknown profile '" + std::string(id) + "'");
  }

  bool operator==(const ConjointDesign&) const = default;
};

namespace detail {

/// Householder QR least squares. Returns nullopt when the numerical rank
/// is below the column count.
struct LstsqResult {
  std::vector<double> coef;
  double residual_norm = 0.0;
  double condition = 0.0;  // max|R_ii| / min|R_ii|
};

inline std::optional<LstsqResult> lstsq(DenseMatrix X, std::vector<double> y) {
  const std::size_t n = X.rows(), p = X.cols();
  if (n < p) return std::nullopt;
  const double scale = std::max(1.0, X.max_abs());
  std::vector<double> diag(p);
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += X(i, k) * X(i, k);
    norm = std::sqrt(norm);
    if (norm <= 1e-10 * scale * std::sqrt(static_cast<double>(n))) return std::nullopt;
    const double alpha = X(k, k) > 0 ? -norm : norm;
    std::vector<double> v(n - k);
    for (std::size_t i = k; i < n; ++i) v[i - k] = X(i, k);
    v[0] -= alpha;
    const double vnorm2 = dot(v, v);
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += v[i - k] * X(i, j);
        s = 2.0 * s / vnorm2;
        for (std::size_t i = k; i < n; ++i) X(i, j) -= s * v[i - k];
      }
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i - k] * y[i];
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < n; ++i) y[i] -= s * v[i - k];
    }
    diag[k] = std::abs(X(k, k));
  }
  LstsqResult r;
  r.coef.assign(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = y[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= X(k, j) * r.coef[j];
    r.coef[k] = s / X(k, k);
  }
  double res = 0.0;
  for (std::size_t i = p; i < n; ++i) res += y[i] * y[i];
  r.residual_norm = std::sqrt(res);
  const auto [mn, mx] = std::minmax_element(diag.begin(), diag.end());
  r.condition = *mx / *mn;
  return r;
}

inline bool full_column_rank(const DenseMatrix& X) {
  return lstsq(X, std::vector<double>(X.rows(), 0.0)).has_value();
}

}  // namespace detail

/// Random level-balanced design: each attribute's level sequence cycles
/// through its levels and is shuffled independently. Redrawn (up to 100
/// attempts) until the effects-coded matrix has full column rank.
inline ConjointDesign generate_design(const AttributeCatalog& catalog,
                                      std::size_t n_profiles, std::uint64_t seed) {
  catalog.validate();
  const std::size_t p = catalog.n_columns();
  if (n_profiles < p)
    throw DesignError("generate_design: " + std::to_string(n_profiles) +
                      " profiles cannot identify " + std::to_string(p) +
                      " coefficients; use at least " + std::to_string(p));
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    ConjointDesign d{catalog, {}, DenseMatrix(n_profiles, p), seed};
    std::vector<std::vector<std::size_t>> seqs;
    for (const auto& a : catalog.attributes) {
      std::vector<std::size_t> s(n_profiles);
      for (std::size_t i = 0; i < n_profiles; ++i) s[i] = i % a.levels.size();
      rng.shuffle(s);
      seqs.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < n_profiles; ++i) {
      Profile prof{"p" + std::to_string(i + 1), {}};
      for (const auto& s : seqs) prof.levels.push_back(s[i]);
      const auto row = effects_row(catalog, prof.levels);
      for (std::size_t c = 0; c < p; ++c) d.matrix(i, c) = row[c];
      d.profiles.push_back(std::move(prof));
    }
    if (detail::full_column_rank(d.matrix)) return d;
  }
  throw DesignError("generate_design: no full-rank design after 100 attempts; "
                    "increase the number of profiles");
}

// ============================================================================
// Part-worths
// ============================================================================

struct StakeholderPartWorths {
  std::string stakeholder_id;
  double alpha = 0.0;
  std::vector<std::vector<double>> beta;  // [attribute][level], all levels
  double residual_norm = 0.0;
  double condition = 0.0;
};

struct PartWorths {
  AttributeCatalog catalog;
  std::vector<StakeholderPartWorths> stakeholders;

  const StakeholderPartWorths& of(std::string_view id) const {
    for (const auto& s : stakeholders)
      if (s.stakeholder_id == id) return s;
    throw UnknownIdError("no part-worths for stakeholder '" + std::string(id) + "'");
  }
};

struct Response {
  std::string stakeholder_id;
  std::string profile_id;
  double rating = 0.0;
};

/// Maps the effects-coded coefficient vector back to per-level part-worths;
/// the omitted last level is minus the sum of the others.
inline StakeholderPartWorths unpack_coefficients(const AttributeCatalog& cat,
                                                 std::string id,
                                                 std::span<const double> coef) {
  StakeholderPartWorths s;
  s.stakeholder_id = std::move(id);
  s.alpha = coef[0];
  std::size_t c = 1;
  for (const auto& a : cat.attributes) {
    std::vector<double> b;
    double sum = 0.0;
    for (std::size_t l = 0; l + 1 < a.levels.size(); ++l) {
      b.push_back(coef[c]);
      sum += coef[c++];
    }
    b.push_back(-sum);
    s.beta.push_back(std::move(b));
  }
  return s;
}

/// OLS on the subset of design rows a stakeholder has rated. Throws
/// DesignError when those rows are rank deficient.
inline StakeholderPartWorths fit_stakeholder(const ConjointDesign& design,
                                             std::string stakeholder_id,
                                             std::span<const std::size_t> profile_rows,
                                             std::span<const double> ratings) {
  if (profile_rows.size() != ratings.size())
    throw DimensionError("fit_stakeholder: rows/ratings length mismatch");
  const std::size_t p = design.matrix.cols();
  DenseMatrix X(profile_rows.size(), p);
  for (std::size_t i = 0; i < profile_rows.size(); ++i)
    for (std::size_t c = 0; c < p; ++c) X(i, c) = design.matrix(profile_rows[i], c);
  for (double r : ratings)
    if (!std::isfinite(r)) throw NumericRangeError("fit_stakeholder: non-finite rating");
  auto fit = detail::lstsq(std::move(X), std::vector<double>(ratings.begin(), ratings.end()));
  if (!fit)
    throw DesignError("fit_part_worths: design rows rated by '" + stakeholder_id +
                      "' are rank deficient");
  auto s = unpack_coefficients(design.catalog, std::move(stakeholder_id), fit->coef);
  s.residual_norm = fit->residual_norm;
  s.condition = fit->condition;
  return s;
}

/// Per-stakeholder OLS. Every stakeholder that appears in `responses` must
/// rate every profile exactly once. Stakeholders are reported in order of
/// first appearance.
inline PartWorths fit_part_worths(const ConjointDesign& design,
                                  const std::vector<Response>& responses) {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, double>> by_sh;
  for (const auto& r : responses) {
    const std::size_t pi = design.profile_index(r.profile_id);
    auto [it, fresh] = by_sh.try_emplace(r.stakeholder_id);
    if (fresh) order.push_back(r.stakeholder_id);
    if (!it->second.emplace(pi, r.rating).second)
      throw Error("fit_part_worths: duplicate rating for (" + r.stakeholder_id +
                  ", " + r.profile_id + ")");
  }
  std::string missing;
  for (const auto& sh : order)
    for (std::size_t pi = 0; pi < design.profiles.size(); ++pi)
      if (!by_sh[sh].contains(pi)) {
        if (!missing.empty()) missing += ", ";
        missing += "(" + sh + ", " + design.profiles[pi].id + ")";
      }
  if (!missing.empty())
    throw Error("fit_part_worths: missing ratings for " + missing);

  PartWorths pw{design.catalog, {}};
  for (const auto& sh : order) {
    std::vector<std::size_t> rows;
    std::vector<double> y;
    for (const auto& [pi, rating] : by_sh[sh]) {
      rows.push_back(pi);
      y.push_back(rating);
    }
    pw.stakeholders.push_back(fit_stakeholder(design, sh, rows, y));
  }
  return pw;
}

inline double predict_rating(const StakeholderPartWorths& s,
                             std::span<const std::size_t> levels) {
  if (levels.size() != s.beta.size())
    throw DimensionError("predict_rating: profile/attribute count mismatch");
  double u = s.alpha;
  for (std::size_t a = 0; a < levels.size(); ++a) {
    if (levels[a] >= s.beta[a].size())
      throw UnknownIdError("predict_rating: level index out of range");
    u += s.beta[a][levels[a]];
  }
  return u;
}

inline double predict_rating(const StakeholderPartWorths& s,
                             const AttributeCatalog& cat,
                             const std::vector<std::string>& labels) {
  if (labels.size() != cat.attributes.size())
    throw DimensionError("predict_rating: profile/attribute count mismatch");
  std::vector<std::size_t> lv;
  for (std::size_t a = 0; a < labels.size(); ++a)
    lv.push_back(cat.level_index(a, labels[a]));
  return predict_rating(s, lv);
}

// ============================================================================
// Utilities
// ============================================================================

/// How a metric-level utility is read off part-worths: kSum is the literal
/// sum over levels (identically zero under effects coding), kRange is the
/// classical attribute importance max - min.
enum class ExtractionMode { kSum, kRange };

inline std::string_view mode_name(ExtractionMode m) {
  return m == ExtractionMode::kSum ? "sum" : "range";
}

inline ExtractionMode parse_mode(std::string_view s) {
  if (s == "sum") return ExtractionMode::kSum;
  if (s == "range") return ExtractionMode::kRange;
  throw ConfigError("unknown extraction mode '" + std::string(s) + "'");
}

/// Stakeholder x metric utility table, u(h, k) = U_h(k).
struct UtilityVector {
  std::vector<std::string> stakeholder_ids;
  std::vector<std::string> metric_ids;
  DenseMatrix u;
  std::optional<ExtractionMode> mode;  // absent when read from a table
  bool degenerate = false;             // sum mode under effects coding

  std::size_t n_stakeholders() const { return stakeholder_ids.size(); }
  std::size_t n_metrics() const { return metric_ids.size(); }

  bool operator==(const UtilityVector&) const = default;
};

inline UtilityVector aggregate_utilities(const PartWorths& pw,
                                         ExtractionMode mode = ExtractionMode::kRange) {
  UtilityVector U;
  for (const auto& a : pw.catalog.attributes) U.metric_ids.push_back(a.metric_id);
  U.u = DenseMatrix(pw.stakeholders.size(), U.metric_ids.size());
  U.mode = mode;
  U.degenerate = mode == ExtractionMode::kSum;
  for (std::size_t h = 0; h < pw.stakeholders.size(); ++h) {
    const auto& s = pw.stakeholders[h];
    U.stakeholder_ids.push_back(s.stakeholder_id);
    for (std::size_t k = 0; k < s.beta.size(); ++k) {
      const auto& b = s.beta[k];
      if (mode == ExtractionMode::kSum) {
        double sum = 0.0;
        for (double x : b) sum += x;
        U.u(h, k) = sum;
      } else {
        const auto [mn, mx] = std::minmax_element(b.begin(), b.end());
        U.u(h, k) = *mx - *mn;
      }
    }
  }
  return U;
}

/// Reorders a utility table into network order (rows = stakeholders,
/// columns = metrics). Every network stakeholder and metric must be present.
inline UtilityVector align_utilities(const UtilityVector& U,
                                     const BenchmarkNetwork& net) {
  auto find = [](const std::vector<std::string>& ids, const std::string& id,
                 const char* what) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return i;
    throw UnknownIdError(std::string("utilities: missing ") + what + " '" + id + "'");
  };
  UtilityVector out;
  out.mode = U.mode;
  out.degenerate = U.degenerate;
  out.u = DenseMatrix(net.n_stakeholders(), net.n_metrics());
  for (const auto& s : net.stakeholders()) out.stakeholder_ids.push_back(s.id);
  for (const auto& m : net.metrics()) out.metric_ids.push_back(m.id);
  for (std::size_t h = 0; h < net.n_stakeholders(); ++h) {
    const std::size_t hs = find(U.stakeholder_ids, out.stakeholder_ids[h], "stakeholder");
    for (std::size_t k = 0; k < net.n_metrics(); ++k)
      out.u(h, k) = U.u(hs, find(U.metric_ids, out.metric_ids[k], "metric"));
  }
  return out;
}

/// Builds a stakeholder x metric table from long-format triples. Missing
/// cells are an error; ids are ordered by first appearance.
inline UtilityVector table_from_triples(const std::vector<csv::Triple>& rows,
                                        const char* what) {
  UtilityVector U;
  std::map<std::pair<std::string, std::string>, double> cells;
  auto index = [](std::vector<std::string>& ids, const std::string& id) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return i;
    ids.push_back(id);
    return ids.size() - 1;
  };
  for (const auto& r : rows) {
    index(U.stakeholder_ids, r.row);
    index(U.metric_ids, r.col);
    if (!cells.emplace(std::pair{r.row, r.col}, r.value).second)
      throw ParseError(std::string(what) + ": duplicate entry for (" + r.row + ", " +
                           r.col + ")",
                       r.line, 1);
  }
  U.u = DenseMatrix(U.stakeholder_ids.size(), U.metric_ids.size());
  for (std::size_t h = 0; h < U.stakeholder_ids.size(); ++h)
    for (std::size_t k = 0; k < U.metric_ids.size(); ++k) {
      auto it = cells.find({U.stakeholder_ids[h], U.metric_ids[k]});
      if (it == cells.end())
        throw ParseError(std::string(what) + ": missing entry for (" +
                         U.stakeholder_ids[h] + ", " + U.metric_ids[k] + ")");
      U.u(h, k) = it->second;
    }
  return U;
}

/// Utilities CSV: stakeholder_id, metric_id, u.
inline UtilityVector read_utilities_csv(std::string_view text) {
  return table_from_triples(csv::read_triples(text, "stakeholder_id", "metric_id", "u"),
                            "utilities");
}

inline std::string write_utilities_csv(const UtilityVector& U,
                                       std::string_view value_col = "u") {
  std::string out = "stakeholder_id,metric_id," + std::string(value_col) + "\n";
  for (std::size_t h = 0; h < U.n_stakeholders(); ++h)
    for (std::size_t k = 0; k < U.n_metrics(); ++k)
      out += csv::quote(U.stakeholder_ids[h]) + "," + csv::quote(U.metric_ids[k]) + "," +
             csv::format_double(U.u(h, k)) + "\n";
  return out;
}

/// Responses CSV: stakeholder_id, profile_id, rating.
inline std::vector<Response> read_responses_csv(std::string_view text) {
  std::vector<Response> out;
  for (auto& t : csv::read_triples(text, "stakeholder_id", "profile_id", "rating"))
    out.push_back({std::move(t.row), std::move(t.col), t.value});
  return out;
}

}  // namespace hbench
