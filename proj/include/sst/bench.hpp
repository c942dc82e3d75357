// SPDX-License-Identifier: Apache-2.0
//
// Scaling benchmark: the same wait-2-stride-n session run under three
// recomputation regimes, recording per-step wall time and counted
// multiply-accumulates.  Counters are the acceptance signal; wall time is
// informational.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sst/model.hpp"

namespace sst {

enum class BenchVariant {
  full_recompute,            // extractor, encoder, adapter, decoder all from scratch per step
  incremental_encoder_only,  // encoder side incremental, decoder rebuilt per step
  fasst,                     // fully incremental
};

const char* bench_variant_name(BenchVariant v);
BenchVariant bench_variant_from_name(const std::string& name);  // invalid-config on unknown

struct BenchRecord {
  BenchVariant variant;
  int step = 0;  // contiguous from 1
  double wall_ms = 0.0;
  std::uint64_t macs = 0;
};

// Runs wait-2-stride-n over num_segments of seeded synthetic audio.  The
// model copy is pinned to emit the word separator every step, so every write
// costs the same and the per-step work series is clean.  Step j covers one
// read/write pair; the k-1 prefill reads and the BOS row are session setup
// before step 1.  With parallel set, each variant runs on its own thread
// (the work counter is thread-local).
std::vector<BenchRecord> bench_scaling(const Model& model, int num_segments,
                                       const std::vector<BenchVariant>& variants,
                                       int n = 3, bool parallel = false,
                                       std::uint64_t audio_seed = 0);

}  // namespace sst
