// SPDX-License-Identifier: Apache-2.0
//
// Latency and quality metrics: length-adaptive average lagging from event
// logs (with and without computation time) and a small BLEU stand-in.

#pragma once

#include <span>
#include <vector>

#include "sst/config.hpp"
#include "sst/streaming.hpp"

namespace sst {

enum class LatencyMode { nca, ca };

// Per emitted word: audio read at emission (d_nca) and wall time at emission
// (d_ca, includes computation).  Words within one WRITE share its delays; a
// trailing unterminated word counts once with the last write's delays.
struct DelayProfile {
  std::vector<double> d_nca;
  std::vector<double> d_ca;
  double t_ms = 0.0;  // total source duration
  int ref_len = 0;    // reference word count; defaults to the hypothesis's

  int hyp_len() const { return static_cast<int>(d_nca.size()); }
};

// Derives delays from a validated log.  ref_len starts equal to hyp_len;
// callers with a reference override it before calling laal.
DelayProfile delays_from_log(const EventLog& log, const Vocabulary& vocab);

// r = T / max(hyp_len, ref_len); tau = first 1-based word index whose
// non-computation-aware delay reaches T (hyp_len if none); result is
// (1/tau) * sum_{i=1..tau} (d_i - (i-1) * r) with d per mode.  tau always
// comes from the non-CA delays so both modes average the same words.
double laal(const DelayProfile& profile, LatencyMode mode);

// Geometric mean of modified n-gram precisions (orders 1..max_order, add-1
// smoothing for orders with zero matches, orders longer than the hypothesis
// excluded) times the brevity penalty.  Empty hypothesis scores 0.
double bleu_lite(std::span<const int> hypothesis, std::span<const int> reference,
                 int max_order = 4);

}  // namespace sst
