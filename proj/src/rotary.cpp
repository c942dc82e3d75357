// SPDX-License-Identifier: Apache-2.0

#include "sst/rotary.hpp"

#include <cmath>
#include <stdexcept>

namespace sst {

template <typename T>
RotaryTable<T>::RotaryTable(int max_position, int head_dim, double base)
    : max_pos_(max_position), head_dim_(head_dim) {
  if (head_dim <= 0 || head_dim % 2 != 0)
    throw std::invalid_argument("invalid-config: rotary head_dim must be positive and even");
  if (max_position <= 0)
    throw std::invalid_argument("invalid-config: rotary max_position must be positive");
  const int pairs = head_dim / 2;
  cos_.resize(static_cast<std::size_t>(max_position) * pairs);
  sin_.resize(static_cast<std::size_t>(max_position) * pairs);
  for (int p = 0; p < pairs; ++p) {
    const double freq = std::pow(base, -2.0 * p / head_dim);
    for (int t = 0; t < max_position; ++t) {
      const double angle = t * freq;
      cos_[idx(t, p)] = static_cast<T>(std::cos(angle));
      sin_[idx(t, p)] = static_cast<T>(std::sin(angle));
    }
  }
}

namespace {

template <typename T>
void rotate_row(T* row, int position, const RotaryTable<T>& table, int head_dim) {
  for (int p = 0; p < head_dim / 2; ++p) {
    const T c = table.cos_at(position, p);
    const T s = table.sin_at(position, p);
    const T a = row[2 * p];
    const T b = row[2 * p + 1];
    row[2 * p] = a * c - b * s;
    row[2 * p + 1] = a * s + b * c;
  }
}

}  // namespace

template <typename T>
Mat<T> apply_rope(const Mat<T>& x, int position, const RotaryTable<T>& table) {
  if (x.cols() != table.head_dim())
    throw std::invalid_argument("invalid-config: apply_rope width must equal head_dim");
  if (position < 0 || position >= table.max_position())
    throw std::out_of_range("out-of-range: rotary position exceeds table");
  Mat<T> out = x;
  for (int r = 0; r < out.rows(); ++r)
    rotate_row(out.row(r).data(), position, table, table.head_dim());
  return out;
}

template <typename T>
void rope_rows_inplace(Mat<T>& x, std::span<const int> positions, const RotaryTable<T>& table) {
  const int hd = table.head_dim();
  if (hd == 0 || x.cols() % hd != 0)
    throw std::invalid_argument("invalid-config: row width not a multiple of head_dim");
  if (static_cast<int>(positions.size()) != x.rows())
    throw std::invalid_argument("invalid-argument: one position per row required");
  for (int r = 0; r < x.rows(); ++r) {
    const int pos = positions[r];
    if (pos < 0 || pos >= table.max_position())
      throw std::out_of_range("out-of-range: rotary position exceeds table");
    for (int h = 0; h < x.cols() / hd; ++h)
      rotate_row(x.row(r).data() + h * hd, pos, table, hd);
  }
}

template class RotaryTable<float>;
template class RotaryTable<double>;
template Mat<float> apply_rope(const Mat<float>&, int, const RotaryTable<float>&);
template Mat<double> apply_rope(const Mat<double>&, int, const RotaryTable<double>&);
template void rope_rows_inplace(Mat<float>&, std::span<const int>, const RotaryTable<float>&);
template void rope_rows_inplace(Mat<double>&, std::span<const int>, const RotaryTable<double>&);

}  // namespace sst
