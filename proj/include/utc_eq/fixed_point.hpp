// Copyright 2026 The UTC-EQ Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "utc_eq/deviation.hpp"
#include "utc_eq/tfdp.hpp"

namespace utc_eq {

class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& what, double best_residual)
      : std::runtime_error(what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

struct FixedPointOptions {
  double eps = 1e-9;
  int max_pivots = 100000;
  int cesaro_steps = 200000;  // fallback budget
};

namespace detail {

/// Finds x >= 0 with M x = b by the textbook phase-1 simplex: one artificial
/// per row, Dantzig pricing, switching to Bland's rule after a run of
/// degenerate pivots. Returns false if the pivot budget runs out or the
/// system is infeasible.
inline bool phase_one(const Matrix& M, const Vector& b, int max_pivots, Vector& x, std::vector<int>& basis) {
  const int m = static_cast<int>(M.rows());
  const int n = static_cast<int>(M.cols());
  constexpr double kPivotTol = 1e-11;
  Matrix T = Matrix::Zero(m + 1, n + m + 1);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sign * M.row(i);
    T(i, n + i) = 1.0;
    T(i, n + m) = sign * b(i);
  }
  // Objective row holds reduced costs of "minimize sum of artificials".
  for (int i = 0; i < m; ++i) {
    T.block(m, 0, 1, n) -= T.block(i, 0, 1, n);
    T(m, n + m) -= T(i, n + m);
  }
  basis.resize(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  int degenerate_run = 0;
  for (int pivots = 0;; ++pivots) {
    if (pivots >= max_pivots) return false;
    const bool bland = degenerate_run > 50;
    int enter = -1;
    double best = -kPivotTol;
    for (int k = 0; k < n; ++k) {
      if (T(m, k) < best) {
        enter = k;
        if (bland) break;
        best = T(m, k);
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = T(i, enter);
      if (a <= kPivotTol) continue;
      const double r = T(i, n + m) / a;
      const bool better = r < ratio - 1e-14 ||
                          (r <= ratio + 1e-14 && leave >= 0 &&
                           (bland ? basis[i] < basis[leave] : (basis[i] >= n && basis[leave] < n)));
      if (better) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) return false;  // unbounded direction; cannot happen for phase 1
    degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }
  if (-T(m, n + m) > 1e-9) return false;
  x = Vector::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) x(basis[i]) = std::max(0.0, T(i, n + m));
  }
  return true;
}

/// Re-solves the equalities restricted to the final basic columns, which
/// removes the error accumulated over many tableau updates.
inline Vector polish(const Matrix& M, const Vector& b, const Vector& x, const std::vector<int>& basis) {
  const int n = static_cast<int>(M.cols());
  std::vector<int> cols;
  for (int k : basis) {
    if (k < n) cols.push_back(k);
  }
  std::sort(cols.begin(), cols.end());
  if (cols.empty()) return x;
  Matrix S(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) S.col(static_cast<Eigen::Index>(c)) = M.col(cols[c]);
  const Vector xs = S.completeOrthogonalDecomposition().solve(b);
  if (!xs.allFinite()) return x;
  Vector out = Vector::Zero(n);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double v = xs(static_cast<Eigen::Index>(c));
    if (v < -1e-10) return x;
    out(cols[c]) = std::max(0.0, v);
  }
  return out;
}

}  // namespace detail

/// Max of the fixed-point residual ||Ax - x|| and the sequence-form residual.
inline double fixed_point_residual(const Matrix& A, const Vector& x, const TreeFormDecisionProblem& tfdp) {
  return std::max((A * x - x).cwiseAbs().maxCoeff(), check_sequence_form(x, tfdp));
}

/// (1/K) sum_{k<K} A^k x0. Its residual is at most 2 * diam / K.
inline Vector cesaro_fixed_point(const Matrix& A, const Vector& x0, int K) {
  Vector x = x0;
  Vector sum = Vector::Zero(x0.size());
  for (int k = 0; k < K; ++k) {
    sum += x;
    x = A * x;
  }
  return sum / static_cast<double>(K);
}

/// A point x of the strategy polytope with Ax = x.
inline Vector fixed_point(const Matrix& A, const TreeFormDecisionProblem& tfdp, const FixedPointOptions& opt = {}) {
  const int d = tfdp.dim();
  if (A.rows() != d || A.cols() != d) throw std::invalid_argument("fixed point needs a square map on one polytope");
  if (!(opt.eps > 0)) throw std::invalid_argument("eps must be positive");
  const int J = tfdp.num_decisions();
  Matrix M = Matrix::Zero(d + 1 + J, d);
  Vector b = Vector::Zero(d + 1 + J);
  M.topRows(d) = A - Matrix::Identity(d, d);
  M(d, kRootSequence) = 1.0;
  b(d) = 1.0;
  for (int j = 0; j < J; ++j) {
    const DecisionPoint& dp = tfdp.decision(j);
    M(d + 1 + j, dp.parent_sequence) = 1.0;
    for (int a = 0; a < dp.num_actions; ++a) M(d + 1 + j, dp.first_sequence + a) = -1.0;
  }

  // Mixed deviations usually have a unique fixed point, and then the
  // minimum-norm solution of the equalities is it. This is also far better
  // conditioned than a long run of tableau pivots when A has tiny entries.
  const Vector direct = M.completeOrthogonalDecomposition().solve(b).cwiseMax(0.0);
  double best = fixed_point_residual(A, direct, tfdp);
  if (best <= opt.eps) return direct;

  Vector x;
  std::vector<int> basis;
  if (detail::phase_one(M, b, opt.max_pivots, x, basis)) {
    const Vector polished = detail::polish(M, b, x, basis);
    for (const Vector* cand : {static_cast<const Vector*>(&polished), static_cast<const Vector*>(&x)}) {
      const double r = fixed_point_residual(A, *cand, tfdp);
      if (r <= opt.eps) return *cand;
      best = std::min(best, r);
    }
  }
  const Vector avg = cesaro_fixed_point(A, uniform_strategy(tfdp), opt.cesaro_steps);
  const double r = fixed_point_residual(A, avg, tfdp);
  if (r <= opt.eps) return avg;
  throw FixedPointError("fixed point not found within budget", std::min(best, r));
}

inline Vector fixed_point(const UtcDeviation& dev, const TreeFormDecisionProblem& tfdp,
                          const FixedPointOptions& opt = {}) {
  const ConstraintReport rep = check_constraints(dev, tfdp, tfdp, 1e-6);
  if (rep.residual > 1e-6) throw DeviationError("deviation infeasible: " + rep.worst);
  return fixed_point(dev.A, tfdp, opt);
}

}  // namespace utc_eq
