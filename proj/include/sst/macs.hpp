// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace sst::macs {

// Thread-local multiply-accumulate counter. Every matmul, convolution and
// attention kernel adds to it; element-wise work (norms, activations,
// softmax) is not counted. The counter is the ground truth for cost-scaling
// assertions and for simulated-clock charges, so it must be exact and
// independent of wall time.
inline thread_local std::uint64_t g_count = 0;

inline void add(std::uint64_t n) { g_count += n; }
inline std::uint64_t total() { return g_count; }
inline void reset() { g_count = 0; }

// Snapshot helper: Meter m; ...work...; m.elapsed()
struct Meter {
  std::uint64_t start = total();
  std::uint64_t elapsed() const { return total() - start; }
};

}  // namespace sst::macs
