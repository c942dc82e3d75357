// SPDX-License-Identifier: Apache-2.0
//
// Training objectives: the word-aligned contrastive loss over mean-pooled
// word embeddings, and policy-masked cross-entropy with the training mask
// that emulates inference-time interleaving.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "sst/decoder.hpp"
#include "sst/matrix.hpp"
#include "sst/model.hpp"

namespace sst {

// Half-open row range [begin, end) into an embedding matrix.
struct RowRange {
  int begin;
  int end;
};

// One aligned word: where it lives in the speech embeddings and in the
// transcription tokens.
struct AlignedWord {
  RowRange speech;
  RowRange text;
};

// Mean-pools each range's rows into one word embedding per range.
// Ranges must be nonempty, ordered, nonoverlapping, and in bounds.
template <typename T>
Mat<T> group_words(const Mat<T>& embeddings, const std::vector<RowRange>& ranges);

// Contrastive loss over word pairs: mean over i of
// -log( exp(cos(ws_i, wt_i)/tau) / sum_j exp(cos(ws_i, wt_j)/tau) ).
// The denominator ranges over the text words of the same utterance.
template <typename T>
T waco_loss(const Mat<T>& ws, const Mat<T>& wt, T tau);

template <typename T>
struct WacoGradients {
  T loss;
  Mat<T> d_ws;
  Mat<T> d_wt;
};

// Loss plus hand-derived gradients; checked against finite differences.
template <typename T>
WacoGradients<T> waco_loss_grad(const Mat<T>& ws, const Mat<T>& wt, T tau);

// Training mask geometry: per-segment speech embedding counts and the word
// group of each text row (group g = words g*n .. (g+1)*n - 1).
struct Stage2MaskSpec {
  std::vector<int> segment_sizes;
  std::vector<int> token_groups;  // one per text row, nondecreasing
  int k = 1;
  int n = 1;
};

// Over the layout [all speech ++ all text]: speech rows attend speech
// causally and never text; text rows attend text causally and the speech
// rows of segments with 0-based index < group + k.
Mask build_stage2_mask(const Stage2MaskSpec& spec);

// Word group per text row for BOS followed by the given tokens: a row's word
// index is the number of boundary tokens before it, its group that divided
// by n.
std::vector<int> token_groups_for(std::span<const int> tokens, const Vocabulary& vocab, int n);

// Core training/inference consistency check: teacher-forced logits under
// [speech ++ text] with the training mask, versus the same rows arranged in
// the streaming interleave under the consistency mask.  Returns the max-abs
// logit deviation over all matched rows.  The only numeric difference between
// the two arrangements is attention key order, so the deviation is pure
// summation rounding.
template <typename T>
T stage2_logit_equivalence(const ModelT<T>& model, const std::vector<Mat<T>>& segment_embeddings,
                           std::span<const int> tokens, int k, int n) {
  if (segment_embeddings.empty())
    throw std::invalid_argument("invalid-argument: need at least one segment");
  if (k < 1 || n < 1) throw std::invalid_argument("invalid-argument: k and n must be >= 1");

  const int num_segs = static_cast<int>(segment_embeddings.size());
  std::vector<int> seg_sizes(static_cast<std::size_t>(num_segs));
  Mat<T> speech(0, model.cfg.d_model);
  for (int s = 0; s < num_segs; ++s) {
    seg_sizes[static_cast<std::size_t>(s)] = segment_embeddings[static_cast<std::size_t>(s)].rows();
    speech.append_rows(segment_embeddings[static_cast<std::size_t>(s)]);
  }

  std::vector<int> text_rows{model.vocab.bos};
  text_rows.insert(text_rows.end(), tokens.begin(), tokens.end());
  const Mat<T> text_emb = embed_tokens(std::span<const int>(text_rows), model);
  const std::vector<int> groups = token_groups_for(tokens, model.vocab, n);

  // Training arrangement: all speech, then all text, training mask.
  Stage2MaskSpec spec{seg_sizes, groups, k, n};
  Mat<T> train_x = speech;
  train_x.append_rows(text_emb);
  InterleavedLayout train_layout;
  if (speech.rows() > 0) train_layout.spans.push_back({Modality::speech, speech.rows()});
  train_layout.spans.push_back({Modality::text, text_emb.rows()});
  const Mat<T> train_logits = decoder_forward_with_positions(
      train_x, assign_positions(train_layout), build_stage2_mask(spec), model);

  // Streaming arrangement: k segments, then text group g before segment k+g.
  // Text rows are contiguous per group because groups are nondecreasing.
  std::vector<std::pair<int, int>> group_span;  // [begin, end) into text rows
  for (int t = 0; t < static_cast<int>(groups.size()); ++t) {
    while (static_cast<int>(group_span.size()) <= groups[static_cast<std::size_t>(t)]) {
      const int begin = group_span.empty() ? 0 : group_span.back().second;
      group_span.push_back({begin, begin});
    }
    group_span[static_cast<std::size_t>(groups[static_cast<std::size_t>(t)])].second = t + 1;
  }

  InterleavedLayout layout;
  Mat<T> stream_x(0, model.cfg.d_model);
  std::vector<int> train_row_of;  // training-arrangement row per streaming row
  std::vector<int> seg_cum(static_cast<std::size_t>(num_segs) + 1, 0);
  for (int s = 0; s < num_segs; ++s)
    seg_cum[static_cast<std::size_t>(s) + 1] =
        seg_cum[static_cast<std::size_t>(s)] + seg_sizes[static_cast<std::size_t>(s)];

  auto push_segment = [&](int s) {
    layout.spans.push_back({Modality::speech, seg_sizes[static_cast<std::size_t>(s)]});
    stream_x.append_rows(segment_embeddings[static_cast<std::size_t>(s)]);
    for (int r = 0; r < seg_sizes[static_cast<std::size_t>(s)]; ++r)
      train_row_of.push_back(seg_cum[static_cast<std::size_t>(s)] + r);
  };
  auto push_group = [&](int g) {
    const auto [begin, end] = group_span[static_cast<std::size_t>(g)];
    if (begin == end) return;
    layout.spans.push_back({Modality::text, end - begin});
    stream_x.append_rows(text_emb.slice_rows(begin, end));
    for (int t = begin; t < end; ++t) train_row_of.push_back(speech.rows() + t);
  };

  int next_seg = 0;
  for (; next_seg < std::min(k, num_segs); ++next_seg) push_segment(next_seg);
  for (int g = 0; g < static_cast<int>(group_span.size()); ++g) {
    push_group(g);
    if (next_seg < num_segs) push_segment(next_seg++);
  }
  while (next_seg < num_segs) push_segment(next_seg++);

  const Mat<T> stream_logits =
      decoder_forward_full(stream_x, layout, build_consistency_mask(layout), model);

  T worst = T(0);
  for (int r = 0; r < stream_logits.rows(); ++r)
    for (int c = 0; c < stream_logits.cols(); ++c)
      worst = std::max(worst, std::abs(stream_logits(r, c) -
                                       train_logits(train_row_of[static_cast<std::size_t>(r)], c)));
  return worst;
}

// Mean negative log-softmax probability of each target.
template <typename T>
T masked_ce(const Mat<T>& logits, std::span<const int> targets);

template <typename T>
struct CeGradients {
  T loss;
  Mat<T> d_logits;
};

template <typename T>
CeGradients<T> masked_ce_grad(const Mat<T>& logits, std::span<const int> targets);

// Deterministic uniform draws from a candidate set of k values.
class KSampler {
 public:
  KSampler(std::vector<int> candidates, std::uint64_t seed);
  int next();

 private:
  std::vector<int> candidates_;
  std::mt19937_64 rng_;
};

// Single draw convenience: first value of KSampler(candidates, seed).
int sample_k(const std::vector<int>& candidates, std::uint64_t seed);

}  // namespace sst
