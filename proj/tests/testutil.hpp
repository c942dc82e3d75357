// SPDX-License-Identifier: Apache-2.0
//
// Shared test helpers: polynomial least-squares fitting with R^2, used by the
// cost-scaling assertions (affine vs quadratic per-step work).

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sst::testutil {

struct PolyFit {
  std::vector<double> coeffs;  // coeffs[i] multiplies x^i
  double r2 = 0.0;
};

// Degree-d least squares via normal equations in long double.  The inputs
// here are tiny (tens of points, degree <= 2), so Gaussian elimination with
// partial pivoting is plenty.
inline PolyFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  if (degree < 0 || x.size() != y.size() || x.size() < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("invalid-argument: polyfit needs more points than coefficients");
  const int n = degree + 1;

  std::vector<std::vector<long double>> a(n, std::vector<long double>(n + 1, 0.0L));
  for (std::size_t s = 0; s < x.size(); ++s) {
    std::vector<long double> pw(static_cast<std::size_t>(2 * degree) + 1, 1.0L);
    for (std::size_t p = 1; p < pw.size(); ++p) pw[p] = pw[p - 1] * x[s];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] += pw[static_cast<std::size_t>(i + j)];
      a[i][n] += pw[static_cast<std::size_t>(i)] * y[s];
    }
  }

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[pivot][col])))
        pivot = r;
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0L)
      throw std::runtime_error("numeric-failure: singular polyfit system");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }

  PolyFit fit;
  fit.coeffs.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    fit.coeffs[static_cast<std::size_t>(i)] = static_cast<double>(a[i][n] / a[i][i]);

  long double mean = 0.0L;
  for (double v : y) mean += v;
  mean /= static_cast<long double>(y.size());
  long double ss_res = 0.0L, ss_tot = 0.0L;
  for (std::size_t s = 0; s < x.size(); ++s) {
    long double pred = 0.0L, pw = 1.0L;
    for (int i = 0; i < n; ++i) {
      pred += a[i][n] / a[i][i] * pw;
      pw *= x[s];
    }
    ss_res += (y[s] - pred) * (y[s] - pred);
    ss_tot += (y[s] - mean) * (y[s] - mean);
  }
  fit.r2 = ss_tot == 0.0L ? (ss_res == 0.0L ? 1.0 : 0.0)
                          : static_cast<double>(1.0L - ss_res / ss_tot);
  return fit;
}

}  // namespace sst::testutil
