// SPDX-License-Identifier: Apache-2.0

#include "sst/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace sst {

template <typename T>
Mat<T> finite_diff_grad(const std::function<T(const Mat<T>&)>& f, const Mat<T>& x, T eps) {
  if (!(eps > T(0)))
    throw std::invalid_argument("invalid-argument: finite difference step must be positive");
  Mat<T> grad(x.rows(), x.cols());
  Mat<T> probe = x;
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      const T saved = probe(r, c);
      probe(r, c) = saved + eps;
      const T hi = f(probe);
      probe(r, c) = saved - eps;
      const T lo = f(probe);
      probe(r, c) = saved;
      if (!std::isfinite(hi) || !std::isfinite(lo))
        throw std::runtime_error("numeric-failure: non-finite value during finite differencing");
      grad(r, c) = (hi - lo) / (2 * eps);
    }
  }
  return grad;
}

template Mat<float> finite_diff_grad(const std::function<float(const Mat<float>&)>&,
                                     const Mat<float>&, float);
template Mat<double> finite_diff_grad(const std::function<double(const Mat<double>&)>&,
                                      const Mat<double>&, double);

}  // namespace sst
