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

// Shared numerical kernels: matrix exponential, graph Laplacian, spectral
// radius, symmetric eigenvalues and Euclidean projection onto the weight
// constraint set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hbench/error.hpp"
#include "hbench/matrix.hpp"

namespace hbench {

// ============================================================================
// Matrix exponential
// ============================================================================

namespace detail {

// Smallest Taylor degree m such that the remainder of exp(B) truncated after
// degree m is below `tail_tol` for ||B|| <= norm. The remainder is bounded by
// the first omitted term times the geometric factor 1/(1 - norm/(m+2)).
inline int taylor_degree(double norm, double tail_tol) {
  double term = 1.0;  // norm^k / k!
  for (int m = 0; m < 64; ++m) {
    term *= norm / (m + 1);  // first omitted term for degree m
    const double ratio = norm / (m + 2);
    if (ratio < 1.0 && term / (1.0 - ratio) < tail_tol) return m;
  }
  return 64;
}

}  // namespace detail

/// exp(tau * A) by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by 2^-s so that its 1-norm is at most 1/2, the
/// series degree is chosen so the tail bound is below unit roundoff there
/// (well under 1e-13), and the
/// result is squared s times.
inline DenseMatrix matrix_exponential(const DenseMatrix& A, double tau) {
  if (!A.is_square())
    throw DimensionError("matrix_exponential: non-square input " +
                         A.shape_string());
  if (!std::isfinite(tau))
    throw NumericRangeError("matrix_exponential: non-finite tau");
  if (!A.all_finite())
    throw NumericRangeError("matrix_exponential: non-finite input entries");

  const std::size_t n = A.rows();
  if (n == 0) return {};
  DenseMatrix B = A * tau;
  const double norm = B.norm1();
  if (norm == 0.0) return DenseMatrix::identity(n);

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  if (squarings > 0) B *= std::ldexp(1.0, -squarings);

  const int degree = detail::taylor_degree(B.norm1(), 1e-17);
  // Horner: I + B(I + B/2(I + B/3(... (I + B/m))))
  DenseMatrix E = DenseMatrix::identity(n);
  for (int k = degree; k >= 1; --k) {
    E = B * E;
    E *= 1.0 / k;
    for (std::size_t i = 0; i < n; ++i) E(i, i) += 1.0;
  }
  for (int s = 0; s < squarings; ++s) {
    E = E * E;
    if (!E.all_finite())
      throw NumericRangeError(
          "matrix_exponential: result exceeds representable range (tau*||A||_1 = " +
          std::to_string(norm) + ")");
  }
  if (!E.all_finite())
    throw NumericRangeError("matrix_exponential: result exceeds representable range");
  return E;
}

// ============================================================================
// Laplacian
// ============================================================================

/// L = D - A with D the diagonal of off-diagonal row sums.
///
/// Diagonal entries of A are self-influence, not edges: they are excluded
/// from the degree and from L, so rows of L sum to zero and L is PSD for
/// symmetric nonnegative A regardless of the diagonal convention.
inline DenseMatrix laplacian(const DenseMatrix& A) {
  if (!A.is_square())
    throw DimensionError("laplacian: non-square input " + A.shape_string());
  const std::size_t n = A.rows();
  DenseMatrix L(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      L(i, j) = -A(i, j);
      degree += A(i, j);
    }
    L(i, i) = degree;
  }
  return L;
}

// ============================================================================
// Spectral radius
// ============================================================================

struct PowerIterationResult {
  double eigenvalue = 0.0;  // Rayleigh quotient at termination
  std::vector<double> vector;
  int iterations = 0;
  double residual = 0.0;  // ||A x - mu x|| with ||x|| = 1
};

namespace detail {

// Power iteration on (A + shift I) from the normalized all-ones vector,
// terminated when successive Rayleigh quotients differ by < tol (relative to
// max(1, |mu|)).
inline PowerIterationResult power_iteration(const DenseMatrix& A, double shift,
                                            double tol, int max_iter) {
  const std::size_t n = A.rows();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  auto apply_shifted = [&](const std::vector<double>& v) {
    std::vector<double> y = A.apply(v);
    for (std::size_t i = 0; i < n; ++i) y[i] += shift * v[i];
    return y;
  };

  double mu_prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> y = apply_shifted(x);
    const double mu = dot(x, y);  // ||x|| = 1
    const double ny = norm2(y);
    if (ny == 0.0) {
      // x is in the null space: A x = -shift x exactly.
      return {mu, x, it, 0.0};
    }
    std::vector<double> xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = y[i] / ny;
    if (std::isfinite(mu_prev) &&
        std::abs(mu - mu_prev) < tol * std::max(1.0, std::abs(mu))) {
      std::vector<double> r = apply_shifted(xn);
      const double mu_n = dot(xn, r);
      for (std::size_t i = 0; i < n; ++i) r[i] -= mu_n * xn[i];
      return {mu_n, xn, it, norm2(r)};
    }
    mu_prev = mu;
    x = std::move(xn);
  }
  throw NonConvergenceError("spectral_radius: power iteration did not converge in " +
                                std::to_string(max_iter) + " iterations",
                            mu_prev, x);
}

}  // namespace detail

/// Largest eigenvalue magnitude by power iteration.
///
/// Plain iteration first. When it settles on a quotient that is not an
/// eigenpair (the signature of a +/- lambda dominant pair, where the iterate
/// alternates), the matrix is shifted by +-||A||_1 so that the extreme
/// eigenvalues become strictly dominant, and the shift is subtracted back.
inline double spectral_radius(const DenseMatrix& A, double tol = 1e-12,
                              int max_iter = 100000) {
  if (!A.is_square())
    throw DimensionError("spectral_radius: non-square input " + A.shape_string());
  if (!(tol > 0.0)) throw ConfigError("spectral_radius: tol must be > 0");
  if (!A.all_finite())
    throw NumericRangeError("spectral_radius: non-finite input entries");
  if (A.rows() == 0) return 0.0;

  const double scale = std::max(1.0, A.norm1());
  const double eig_tol = 1e3 * std::sqrt(tol) * scale;

  auto plain = detail::power_iteration(A, 0.0, tol, max_iter);
  if (plain.residual <= eig_tol) return std::abs(plain.eigenvalue);

  const double s = A.norm1();
  auto hi = detail::power_iteration(A, s, tol, max_iter);
  auto lo = detail::power_iteration(A, -s, tol, max_iter);
  const bool hi_ok = hi.residual <= eig_tol, lo_ok = lo.residual <= eig_tol;
  if (!hi_ok && !lo_ok)
    // Complex dominant pair (e.g. a rotation): no shift isolates it.
    throw NonConvergenceError(
        "spectral_radius: power iteration found no dominant real eigenpair",
        std::abs(plain.eigenvalue), plain.vector);
  return std::max(hi_ok ? std::abs(hi.eigenvalue - s) : 0.0,
                  lo_ok ? std::abs(lo.eigenvalue + s) : 0.0);
}

/// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi sweeps.
inline std::vector<double> symmetric_eigenvalues(const DenseMatrix& S,
                                                 double tol = 1e-14,
                                                 int max_sweeps = 100) {
  if (!S.is_square())
    throw DimensionError("symmetric_eigenvalues: non-square input");
  if (!S.is_symmetric(1e-12 * std::max(1.0, S.max_abs())))
    throw Error("symmetric_eigenvalues: input is not symmetric");
  const std::size_t n = S.rows();
  DenseMatrix A = S;
  const double scale = std::max(A.frobenius(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (std::sqrt(off) <= tol * scale) break;

    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = A(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// ============================================================================
// Projection onto the weight constraint set
// ============================================================================

/// Constraint set for stakeholder x metric weight tables.
///
/// The convex part is nonneg ∩ box ∩ per-column sum caps and is handled by
/// an exact Euclidean projection. `sparsity_k` is a hard top-k truncation
/// applied afterwards; it is not convex and voids the stability guarantees.
struct ConstraintSet {
  bool nonneg = true;
  std::optional<double> box_upper;
  // Empty: no cap. One entry: the same cap on every column. Otherwise one
  // cap per metric column.
  std::vector<double> column_sum_cap;
  std::optional<std::size_t> sparsity_k;

  bool is_convex() const { return !sparsity_k.has_value(); }

  std::optional<double> cap_for(std::size_t col) const {
    if (column_sum_cap.empty()) return std::nullopt;
    if (column_sum_cap.size() == 1) return column_sum_cap[0];
    return column_sum_cap.at(col);
  }

  /// Throws ConfigError on violated invariants or an empty feasible set.
  void validate(std::size_t cols) const {
    if (box_upper && !std::isfinite(*box_upper))
      throw ConfigError("constraint set: box_upper must be finite");
    if (box_upper && nonneg && *box_upper < 0.0)
      throw ConfigError("constraint set: infeasible, box_upper " +
                        std::to_string(*box_upper) + " below the nonnegativity floor");
    for (double c : column_sum_cap)
      if (!(c > 0.0) || !std::isfinite(c))
        throw ConfigError("constraint set: column_sum_cap entries must be finite and > 0");
    if (column_sum_cap.size() > 1 && column_sum_cap.size() != cols)
      throw ConfigError("constraint set: " + std::to_string(column_sum_cap.size()) +
                        " column caps for " + std::to_string(cols) + " columns");
    if (sparsity_k && *sparsity_k < 1)
      throw ConfigError("constraint set: sparsity_k must be >= 1");
  }
};

/// Euclidean projection of one column onto {lo <= x <= hi, sum(x) <= cap}.
///
/// Clip first; if the cap binds, solve sum(clip(v - theta, lo, hi)) = cap for
/// theta > 0. That function is piecewise linear and nonincreasing with
/// breakpoints v_i - hi and v_i - lo; the bracketing segment is found by
/// binary search over the sorted breakpoints and solved exactly.
inline std::vector<double> project_column(std::span<const double> v, double lo,
                                          double hi, std::optional<double> cap) {
  const std::size_t n = v.size();
  auto clip = [&](double x) { return std::clamp(x, lo, hi); };
  std::vector<double> out(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += out[i] = clip(v[i]);
  if (!cap || sum <= *cap) return out;

  auto f = [&](double theta) {
    double s = 0.0;
    for (double x : v) s += clip(x - theta);
    return s;
  };

  std::vector<double> bp;
  bp.reserve(2 * n);
  for (double x : v) {
    if (std::isfinite(hi) && x - hi > 0.0) bp.push_back(x - hi);
    if (std::isfinite(lo) && x - lo > 0.0) bp.push_back(x - lo);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  // Last breakpoint with f >= cap; f(0) > cap so theta_a = 0 when none.
  double theta_a = 0.0, f_a = sum;
  std::size_t lo_i = 0, hi_i = bp.size();
  while (lo_i < hi_i) {
    const std::size_t mid = (lo_i + hi_i) / 2;
    const double fm = f(bp[mid]);
    if (fm >= *cap) {
      theta_a = bp[mid];
      f_a = fm;
      lo_i = mid + 1;
    } else {
      hi_i = mid;
    }
  }
  // Entries strictly between their two breakpoints move one-for-one with theta.
  const double theta_b = lo_i < bp.size() ? bp[lo_i] : theta_a + 1.0;
  const double theta_mid = 0.5 * (theta_a + theta_b);
  std::size_t free = 0;
  for (double x : v) {
    const double y = x - theta_mid;
    free += (y > lo && y < hi);
  }
  double theta = free == 0 ? theta_a : theta_a + (f_a - *cap) / free;
  // Rounding can leave the sum an ulp above the cap; nudge theta until it is
  // not, so a projected column is a fixed point of the projection.
  for (int guard = 0; guard < 64; ++guard) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += out[i] = clip(v[i] - theta);
    if (s <= *cap) break;
    theta = std::nextafter(theta, std::numeric_limits<double>::infinity()) +
            (s - *cap) / std::max<std::size_t>(free, 1);
  }
  return out;
}

/// Projection of a weight table onto `C`, column by column.
inline DenseMatrix project(const DenseMatrix& W, const ConstraintSet& C) {
  C.validate(W.cols());
  if (!W.all_finite()) throw NumericRangeError("project: non-finite weight entries");
  const double lo = C.nonneg ? 0.0 : -std::numeric_limits<double>::infinity();
  const double hi = C.box_upper.value_or(std::numeric_limits<double>::infinity());

  DenseMatrix P(W.rows(), W.cols());
  for (std::size_t k = 0; k < W.cols(); ++k) {
    const std::vector<double> col = W.column(k);
    P.set_column(k, project_column(col, lo, hi, C.cap_for(k)));
  }

  if (C.sparsity_k && *C.sparsity_k < W.rows()) {
    const std::size_t keep = *C.sparsity_k;
    for (std::size_t k = 0; k < P.cols(); ++k) {
      std::vector<std::size_t> order(P.rows());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return P(a, k) > P(b, k);
      });
      for (std::size_t i = keep; i < order.size(); ++i) P(order[i], k) = 0.0;
    }
  }
  return P;
}

/// True when every entry of W already satisfies the convex part of C (within
/// `tol`). Sparsity is checked exactly.
inline bool satisfies(const DenseMatrix& W, const ConstraintSet& C,
                      double tol = 1e-12) {
  for (std::size_t k = 0; k < W.cols(); ++k) {
    double s = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t h = 0; h < W.rows(); ++h) {
      const double w = W(h, k);
      if (C.nonneg && w < -tol) return false;
      if (C.box_upper && w > *C.box_upper + tol) return false;
      s += w;
      nonzero += (w != 0.0);
    }
    if (auto cap = C.cap_for(k); cap && s > *cap + tol) return false;
    if (C.sparsity_k && nonzero > *C.sparsity_k) return false;
  }
  return true;
}

}  // namespace hbench
