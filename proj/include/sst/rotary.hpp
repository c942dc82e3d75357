// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "sst/matrix.hpp"

namespace sst {

// Precomputed cos/sin table for rotary position embedding. The angle of
// dimension pair p at position t is t * base^(-2p / head_dim); base 10000.
template <typename T>
class RotaryTable {
 public:
  RotaryTable() = default;
  RotaryTable(int max_position, int head_dim, double base = 10000.0);

  int max_position() const { return max_pos_; }
  int head_dim() const { return head_dim_; }

  T cos_at(int position, int pair) const { return cos_[idx(position, pair)]; }
  T sin_at(int position, int pair) const { return sin_[idx(position, pair)]; }

 private:
  std::size_t idx(int position, int pair) const {
    return static_cast<std::size_t>(position) * (head_dim_ / 2) + pair;
  }
  int max_pos_ = 0;
  int head_dim_ = 0;
  std::vector<T> cos_, sin_;
};

// Rotates every row of x (one head, cols == head_dim) by the angles of a
// single position. Position 0 is the identity.
template <typename T>
Mat<T> apply_rope(const Mat<T>& x, int position, const RotaryTable<T>& table);

// In-place rotation of rows with per-row positions. Columns may hold several
// heads back to back; each head_dim-wide group is rotated independently.
template <typename T>
void rope_rows_inplace(Mat<T>& x, std::span<const int> positions, const RotaryTable<T>& table);

}  // namespace sst
