// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "sst/matrix.hpp"

namespace sst {

// Central-difference gradient estimate of a scalar function, entry by entry:
// g_ij = (f(x + eps e_ij) - f(x - eps e_ij)) / (2 eps).
// This is the oracle the analytic loss gradients are checked against; it has
// no knowledge of any backprop path. Meaningful in double precision (default
// eps 1e-4).
template <typename T>
Mat<T> finite_diff_grad(const std::function<T(const Mat<T>&)>& f, const Mat<T>& x,
                        T eps = T(1e-4));

// Worst entry-wise relative deviation of a from reference b, floored so
// near-zero entries compare absolutely.
template <typename T>
T max_relative_error(const Mat<T>& a, const Mat<T>& b, T floor = T(1e-8)) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("invalid-argument: relative error shape mismatch");
  T worst = T(0);
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const T err = std::abs(a.data()[i] - b.data()[i]) / (std::abs(b.data()[i]) + floor);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace sst
