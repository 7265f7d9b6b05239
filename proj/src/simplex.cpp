#include "offsim/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offsim {

namespace {

constexpr double kEps = 1e-9;

// Runs Bland-rule pivoting on tableau T (m constraint rows + 1 objective
// row, rhs in the last column). Entering columns are restricted to
// [0, limit). Returns false if the objective is unbounded below.
bool pivot_loop(std::vector<std::vector<double>>& T, std::vector<int>& basis,
                int limit, int rhs_col) {
  const int m = static_cast<int>(basis.size());
  for (;;) {
    int enter = -1;
    for (int j = 0; j < limit; ++j) {
      if (T[static_cast<size_t>(m)][static_cast<size_t>(j)] < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      double a = T[static_cast<size_t>(i)][static_cast<size_t>(enter)];
      if (a > kEps) {
        double ratio = T[static_cast<size_t>(i)][static_cast<size_t>(rhs_col)] / a;
        if (leave < 0 || ratio < best - kEps ||
            (ratio < best + kEps && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]))
        {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) return false;
    double p = T[static_cast<size_t>(leave)][static_cast<size_t>(enter)];
    for (double& v : T[static_cast<size_t>(leave)]) v /= p;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double f = T[static_cast<size_t>(i)][static_cast<size_t>(enter)];
      if (f == 0.0) continue;
      for (int j = 0; j <= rhs_col; ++j)
        T[static_cast<size_t>(i)][static_cast<size_t>(j)] -=
            f * T[static_cast<size_t>(leave)][static_cast<size_t>(j)];
    }
    basis[static_cast<size_t>(leave)] = enter;
  }
}

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b, const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  if (static_cast<int>(b.size()) != m)
    throw std::invalid_argument("solve_lp: A and b sizes disagree");

  // Row equilibration: scale each constraint to unit magnitude so the
  // absolute pivot tolerances behave the same regardless of input units.
  std::vector<std::vector<double>> As(A);
  std::vector<double> bs(b);
  for (int i = 0; i < m; ++i) {
    double scale = std::fabs(bs[static_cast<size_t>(i)]);
    for (double v : As[static_cast<size_t>(i)]) scale = std::max(scale, std::fabs(v));
    if (scale > 0.0) {
      for (double& v : As[static_cast<size_t>(i)]) v /= scale;
      bs[static_cast<size_t>(i)] /= scale;
    }
  }

  // Columns: n structural, m slacks, then one artificial per negative-rhs
  // row; the rhs column last.
  int n_art = 0;
  for (double v : b)
    if (v < 0) ++n_art;
  const int slack0 = n;
  const int art0 = n + m;
  const int ncols = n + m + n_art;
  const int rhs_col = ncols;

  std::vector<std::vector<double>> T(static_cast<size_t>(m + 1),
                                     std::vector<double>(static_cast<size_t>(ncols + 1), 0.0));
  std::vector<int> basis(static_cast<size_t>(m), -1);
  int art = art0;
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(As[static_cast<size_t>(i)].size()) != n)
      throw std::invalid_argument("solve_lp: row width disagrees with c");
    double sign = bs[static_cast<size_t>(i)] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j)
      T[static_cast<size_t>(i)][static_cast<size_t>(j)] = sign * As[static_cast<size_t>(i)][static_cast<size_t>(j)];
    T[static_cast<size_t>(i)][static_cast<size_t>(slack0 + i)] = sign;
    T[static_cast<size_t>(i)][static_cast<size_t>(rhs_col)] = sign * bs[static_cast<size_t>(i)];
    if (sign < 0) {
      T[static_cast<size_t>(i)][static_cast<size_t>(art)] = 1.0;
      basis[static_cast<size_t>(i)] = art;
      ++art;
    } else {
      basis[static_cast<size_t>(i)] = slack0 + i;
    }
  }

  LpResult result;
  if (n_art > 0) {
    // Phase 1: minimize the sum of artificials. Start from unit costs on
    // the artificial columns, then eliminate the basic ones.
    for (int j = art0; j < ncols; ++j)
      T[static_cast<size_t>(m)][static_cast<size_t>(j)] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<size_t>(i)] >= art0) {
        for (int j = 0; j <= rhs_col; ++j)
          T[static_cast<size_t>(m)][static_cast<size_t>(j)] -=
              T[static_cast<size_t>(i)][static_cast<size_t>(j)];
      }
    }
    pivot_loop(T, basis, ncols, rhs_col);
    double phase1 = -T[static_cast<size_t>(m)][static_cast<size_t>(rhs_col)];
    if (phase1 > 1e-7) {
      result.feasible = false;
      return result;
    }
  }

  // Phase 2 objective: structural costs, with basic columns eliminated.
  for (int j = 0; j <= ncols; ++j) T[static_cast<size_t>(m)][static_cast<size_t>(j)] = 0.0;
  for (int j = 0; j < n; ++j) T[static_cast<size_t>(m)][static_cast<size_t>(j)] = c[static_cast<size_t>(j)];
  for (int i = 0; i < m; ++i) {
    int bv = basis[static_cast<size_t>(i)];
    double cost = bv < n ? c[static_cast<size_t>(bv)] : 0.0;
    if (cost != 0.0) {
      for (int j = 0; j <= rhs_col; ++j)
        T[static_cast<size_t>(m)][static_cast<size_t>(j)] -=
            cost * T[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  // Artificial columns may not re-enter the basis.
  result.bounded = pivot_loop(T, basis, art0, rhs_col);

  result.feasible = true;
  result.x.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    int bv = basis[static_cast<size_t>(i)];
    if (bv < n) result.x[static_cast<size_t>(bv)] = T[static_cast<size_t>(i)][static_cast<size_t>(rhs_col)];
  }
  result.objective = 0.0;
  for (int j = 0; j < n; ++j) result.objective += c[static_cast<size_t>(j)] * result.x[static_cast<size_t>(j)];
  return result;
}

}  // namespace offsim
