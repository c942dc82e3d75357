// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sst/macs.hpp"

namespace sst {

// Dense row-major matrix of reals. Everything numeric in the engine is
// templated on the scalar type: float is the default precision, double is
// the test mode used by the strictest equivalence and gradient suites.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) { resize(rows, cols); }

  static Mat from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    Mat m(static_cast<int>(rows.size()),
          rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
    int r = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != m.cols_)
        throw std::invalid_argument("invalid-argument: ragged row list");
      std::copy(row.begin(), row.end(), m.row(r).begin());
      ++r;
    }
    return m;
  }

  static Mat filled(int rows, int cols, T value) {
    Mat m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(int r, int c) { return data_[idx(r, c)]; }
  const T& operator()(int r, int c) const { return data_[idx(r, c)]; }

  std::span<T> row(int r) { return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)}; }
  std::span<const T> row(int r) const {
    return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void append_row(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != cols_)
      throw std::invalid_argument("invalid-argument: appended row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  void append_rows(const Mat& other) {
    if (other.empty()) return;
    if (rows_ == 0 && cols_ == 0) cols_ = other.cols_;
    if (other.cols_ != cols_)
      throw std::invalid_argument("invalid-argument: appended block width mismatch");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    rows_ += other.rows_;
  }

  // Drops trailing rows; used for cache rollback.
  void truncate_rows(int keep) {
    if (keep < 0 || keep > rows_)
      throw std::invalid_argument("invalid-argument: truncate_rows out of range");
    rows_ = keep;
    data_.resize(static_cast<std::size_t>(rows_) * cols_);
  }

  Mat slice_rows(int begin, int end) const {
    if (begin < 0 || end < begin || end > rows_)
      throw std::invalid_argument("invalid-argument: row slice out of range");
    Mat out(end - begin, cols_);
    std::copy(data_.begin() + idx(begin, 0), data_.begin() + idx(begin, 0) + static_cast<std::size_t>(end - begin) * cols_,
              out.data_.begin());
    return out;
  }

  Mat slice_cols(int begin, int end) const {
    if (begin < 0 || end < begin || end > cols_)
      throw std::invalid_argument("invalid-argument: column slice out of range");
    Mat out(rows_, end - begin);
    for (int r = 0; r < rows_; ++r)
      std::copy(row(r).begin() + begin, row(r).begin() + end, out.row(r).begin());
    return out;
  }

  void check_finite(const char* what) const {
    for (const T& v : data_)
      if (!std::isfinite(v))
        throw std::invalid_argument(std::string("invalid-argument: non-finite value in ") + what);
  }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  void resize(int rows, int cols) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("invalid-argument: negative matrix dimension");
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<std::size_t>(rows) * cols, T(0));
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Boolean attention mask: true = attend (additive 0), false = additive -inf.
class Mask {
 public:
  Mask() = default;
  Mask(int rows, int cols, bool allowed_default = false)
      : rows_(rows), cols_(cols),
        allowed_(static_cast<std::size_t>(rows) * cols, allowed_default ? 1 : 0) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("invalid-argument: negative mask dimension");
  }

  static Mask all_allowed(int rows, int cols) { return Mask(rows, cols, true); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool allowed(int r, int c) const {
    return allowed_[static_cast<std::size_t>(r) * cols_ + c] != 0;
  }
  void set(int r, int c, bool allowed) {
    allowed_[static_cast<std::size_t>(r) * cols_ + c] = allowed ? 1 : 0;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// out = a x b. ikj loop order: per-element accumulation runs over k in
// ascending order, so the result for a given row never depends on which
// other rows are present. Incremental paths rely on that.
template <typename T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("invalid-argument: matmul inner dimension mismatch");
  Mat<T> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      const T* brow = b.row(k).data();
      T* orow = out.row(i).data();
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  macs::add(static_cast<std::uint64_t>(a.rows()) * a.cols() * b.cols());
  return out;
}

template <typename T>
Mat<T> linear(const Mat<T>& x, const Mat<T>& w, std::span<const T> bias) {
  Mat<T> out = matmul(x, w);
  if (!bias.empty()) {
    if (static_cast<int>(bias.size()) != out.cols())
      throw std::invalid_argument("invalid-argument: bias width mismatch");
    for (int r = 0; r < out.rows(); ++r) {
      T* orow = out.row(r).data();
      for (int c = 0; c < out.cols(); ++c) orow[c] += bias[c];
    }
  }
  return out;
}

template <typename T>
T max_abs_diff(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("invalid-argument: max_abs_diff shape mismatch");
  T worst = T(0);
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

// Entry-wise equality (0.0 == -0.0 compares equal; NaN never does).
template <typename T>
bool exactly_equal(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    if (!(a.data()[i] == b.data()[i])) return false;
  return true;
}

}  // namespace sst
