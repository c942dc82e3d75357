// SPDX-License-Identifier: Apache-2.0

#include "sst/attention.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sst {

template <typename T>
Mat<T> masked_attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                        const Mask& mask, T scale) {
  if (q.cols() != k.cols())
    throw std::invalid_argument("invalid-argument: query/key width mismatch");
  if (k.rows() != v.rows())
    throw std::invalid_argument("invalid-argument: key/value row count mismatch");
  if (mask.rows() != q.rows() || mask.cols() != k.rows())
    throw std::invalid_argument("invalid-argument: mask shape mismatch");

  const int n = q.rows();
  const int m = k.rows();
  const int d = q.cols();
  Mat<T> out(n, v.cols());
  std::vector<T> logits(m);

  for (int i = 0; i < n; ++i) {
    bool any_allowed = false;
    for (int j = 0; j < m; ++j)
      if (mask.allowed(i, j)) { any_allowed = true; break; }
    if (!any_allowed)
      throw std::invalid_argument("invalid-mask: query row " + std::to_string(i) +
                                  " has no allowed key");

    const T* qrow = q.row(i).data();
    for (int j = 0; j < m; ++j) {
      const T* krow = k.row(j).data();
      T s = T(0);
      for (int t = 0; t < d; ++t) s += qrow[t] * krow[t];
      s *= scale;
      if (!mask.allowed(i, j)) s += static_cast<T>(kMaskSentinel);
      logits[j] = s;
    }
    macs::add(static_cast<std::uint64_t>(m) * d);

    T peak = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < m; ++j) peak = std::max(peak, logits[j]);
    T denom = T(0);
    for (int j = 0; j < m; ++j) {
      logits[j] = std::exp(logits[j] - peak);
      denom += logits[j];
    }
    for (int j = 0; j < m; ++j)
      logits[j] = mask.allowed(i, j) ? logits[j] / denom : T(0);

    T* orow = out.row(i).data();
    for (int j = 0; j < m; ++j) {
      const T w = logits[j];
      const T* vrow = v.row(j).data();
      for (int c = 0; c < v.cols(); ++c) orow[c] += w * vrow[c];
    }
    macs::add(static_cast<std::uint64_t>(m) * v.cols());
  }
  return out;
}

template <typename T>
Mat<T> multi_head_attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                            const Mask& mask, int heads) {
  if (heads <= 0 || q.cols() % heads != 0 || k.cols() != q.cols() || v.cols() != q.cols())
    throw std::invalid_argument("invalid-config: head count does not divide width");
  const int hd = q.cols() / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));
  Mat<T> out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    const int lo = h * hd;
    const int hi = lo + hd;
    Mat<T> oh = masked_attention(q.slice_cols(lo, hi), k.slice_cols(lo, hi),
                                 v.slice_cols(lo, hi), mask, scale);
    for (int r = 0; r < out.rows(); ++r)
      std::copy(oh.row(r).begin(), oh.row(r).end(), out.row(r).begin() + lo);
  }
  return out;
}

template Mat<float> masked_attention(const Mat<float>&, const Mat<float>&, const Mat<float>&,
                                     const Mask&, float);
template Mat<double> masked_attention(const Mat<double>&, const Mat<double>&, const Mat<double>&,
                                      const Mask&, double);
template Mat<float> multi_head_attention(const Mat<float>&, const Mat<float>&, const Mat<float>&,
                                         const Mask&, int);
template Mat<double> multi_head_attention(const Mat<double>&, const Mat<double>&, const Mat<double>&,
                                          const Mask&, int);

}  // namespace sst
