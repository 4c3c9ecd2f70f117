#include "monokit/lp.hpp"

#include <cmath>
#include <vector>

#include "monokit/errors.hpp"

namespace monokit {

namespace {

constexpr double kPivotTol = 1e-10;

struct Tableau {
  Mat t;                    // (m+1) x (ncols+1); last row = reduced costs, last col = rhs
  std::vector<int> basis;   // basic column per constraint row
  int m = 0;
  int ncols = 0;

  double& rhs(int i) { return t(i, ncols); }
  double obj() const { return -t(m, ncols); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    basis[row] = col;
  }

  // Bland's rule: entering = lowest-index column with negative reduced cost,
  // leaving = min ratio with ties broken by lowest basic variable index.
  // price_limit restricts pricing to the first price_limit columns.
  LpStatus run(int price_limit) {
    const int max_iters = 20000;
    for (int iter = 0; iter < max_iters; ++iter) {
      int enter = -1;
      for (int j = 0; j < price_limit; ++j) {
        if (t(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t(i, enter) > kPivotTol) {
          double ratio = rhs(i) / t(i, enter);
          if (leave < 0 || ratio < best_ratio - kPivotTol ||
              (std::abs(ratio - best_ratio) <= kPivotTol && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
    }
    throw SolverError("simplex: iteration cap exceeded");
  }
};

}  // namespace

LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw ContractError("solve_lp: inconsistent dimensions");

  // phase 1 tableau: columns [x | artificials], rhs flipped nonnegative
  Tableau tb;
  tb.m = m;
  tb.ncols = n + m;
  tb.t = Mat::Zero(m + 1, tb.ncols + 1);
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    double sgn = b[i] < 0.0 ? -1.0 : 1.0;
    tb.t.block(i, 0, 1, n) = sgn * A.row(i);
    tb.t(i, n + i) = 1.0;
    tb.rhs(i) = sgn * b[i];
    tb.basis[i] = n + i;
  }
  // phase 1 costs: sum of artificials, canonicalized against the start basis
  for (int j = 0; j < m; ++j) tb.t(m, n + j) = 1.0;
  for (int i = 0; i < m; ++i) tb.t.row(m) -= tb.t.row(i);

  if (tb.run(tb.ncols) != LpStatus::optimal)
    throw SolverError("simplex: phase 1 unbounded (cannot happen)");
  double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (tb.obj() > 1e-9 * scale) return {LpStatus::infeasible, Vec(), 0.0};

  // drive leftover artificials out of the basis; an all-zero row is a
  // redundant constraint and can stay (it never wins a ratio test)
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] >= n) {
      for (int j = 0; j < n; ++j) {
        if (std::abs(tb.t(i, j)) > kPivotTol) {
          tb.pivot(i, j);
          break;
        }
      }
    }
  }

  // phase 2 costs on the original columns
  tb.t.row(m).setZero();
  for (int j = 0; j < n; ++j) tb.t(m, j) = c[j];
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) tb.t.row(m) -= c[tb.basis[i]] * tb.t.row(i);
  }

  LpStatus st = tb.run(n);  // artificials never priced again
  LpResult res;
  res.status = st;
  if (st == LpStatus::unbounded) return res;
  res.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) res.x[tb.basis[i]] = tb.rhs(i);
  res.objective = c.dot(res.x);
  return res;
}

LpResult solve_lp_inequality(const Mat& G, const Vec& h, const Vec& c) {
  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  if (h.size() != m || c.size() != n)
    throw ContractError("solve_lp_inequality: inconsistent dimensions");

  // x = u - v, slack s:  G u - G v - s = h,  u, v, s >= 0
  Mat A(m, 2 * n + m);
  A << G, -G, -Mat::Identity(m, m);
  Vec cs = Vec::Zero(2 * n + m);
  cs.head(n) = c;
  cs.segment(n, n) = -c;
  LpResult std_res = solve_lp(A, h, cs);
  LpResult res;
  res.status = std_res.status;
  if (std_res.status == LpStatus::optimal) {
    res.x = std_res.x.head(n) - std_res.x.segment(n, n);
    res.objective = c.dot(res.x);
  }
  return res;
}

}  // namespace monokit
