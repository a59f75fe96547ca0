#pragma once

// Reference LP solvers used as independent oracles in tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

// min c.x subject to A x = b, x >= 0, b >= 0. Dense two-phase tableau
// simplex with Bland's rule. Returns the optimal objective.
inline double dense_lp_min(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                           const std::vector<double>& c, std::vector<double>* x_out = nullptr) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  const int cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) throw std::invalid_argument("dense_lp_min needs b >= 0");
    for (int j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  const double eps = 1e-12;

  auto pivot = [&](int r, int col) {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (int i = 0; i <= m; ++i) {
      if (i == r || T[i][col] == 0.0) continue;
      const double f = T[i][col];
      for (int j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };

  auto run = [&](int allowed) {
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j)
        if (T[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter < 0) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T[i][enter] > eps) {
          const double ratio = T[i][cols - 1] / T[i][enter];
          if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) throw std::runtime_error("dense LP unbounded");
      pivot(leave, enter);
    }
    throw std::runtime_error("dense LP iteration limit");
  };

  // phase 1: minimise the sum of artificials
  std::fill(T[m].begin(), T[m].end(), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < cols; ++j)
      if (j < n || j == cols - 1) T[m][j] -= T[i][j];
  run(n + m);
  if (-T[m][cols - 1] > 1e-9 * (1.0 + std::accumulate(b.begin(), b.end(), 0.0)))
    throw std::runtime_error("dense LP infeasible");
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::abs(T[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
  }

  // phase 2
  std::fill(T[m].begin(), T[m].end(), 0.0);
  for (int j = 0; j < n; ++j) T[m][j] = c[j];
  for (int i = 0; i < m; ++i) {
    const int bj = basis[i];
    if (bj >= n) continue;
    const double f = T[m][bj];
    if (f == 0.0) continue;
    for (int j = 0; j < cols; ++j) T[m][j] -= f * T[i][j];
  }
  run(n);
  if (x_out) {
    x_out->assign(n, 0.0);
    for (int i = 0; i < m; ++i)
      if (basis[i] < n) (*x_out)[basis[i]] = T[i][cols - 1];
  }
  return -T[m][cols - 1];
}

// Balanced transportation problem: supplies a, demands b, costs C[i][j].
inline double transport_lp(const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<std::vector<double>>& C) {
  const int S = static_cast<int>(a.size());
  const int T = static_cast<int>(b.size());
  std::vector<std::vector<double>> A(S + T, std::vector<double>(S * T, 0.0));
  std::vector<double> rhs(S + T), c(S * T);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j) {
      A[i][i * T + j] = 1.0;
      A[S + j][i * T + j] = 1.0;
      c[i * T + j] = C[i][j];
    }
  for (int i = 0; i < S; ++i) rhs[i] = a[i];
  for (int j = 0; j < T; ++j) rhs[S + j] = b[j];
  return dense_lp_min(A, rhs, c);
}

// Equal-mass assignment by exhaustive enumeration of permutations.
inline double assignment_brute_force(const std::vector<std::vector<double>>& C, double mass) {
  const int n = static_cast<int>(C.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += C[i][perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best * mass;
}

}  // namespace oracle
