// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sst/matrix.hpp"

namespace sst {

// Additive mask sentinel. Applied to disallowed logits before the
// max-subtraction; exp underflows to zero, and weights are pinned to an
// exact 0 after normalization so disallowed keys contribute nothing.
inline constexpr double kMaskSentinel = -1e30;

// Masked scaled-dot-product attention over explicit matrices.
// Output row i = softmax over allowed keys of (q_i . k_j * scale) weighting v_j.
template <typename T>
Mat<T> masked_attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                        const Mask& mask, T scale);

// Head-concatenated wrapper used by the encoder and decoder: q/k/v carry
// `heads` slices of equal width side by side, the mask is shared across
// heads and scale is 1/sqrt(head_dim).
template <typename T>
Mat<T> multi_head_attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                            const Mask& mask, int heads);

}  // namespace sst
