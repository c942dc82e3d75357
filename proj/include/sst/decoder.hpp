// SPDX-License-Identifier: Apache-2.0
//
// Text side of the pipeline: interleaved speech/text layouts, the
// consistency mask that keeps incremental decoding exact, the decoder
// forward pass in full and cached forms, and greedy generation.
//
// Positions come from two independent streams: speech rows count 0,1,2,...
// among speech rows and text rows count 0,1,2,... among text rows (BOS is
// text position 0).  A row's position therefore never changes when more
// rows of the other modality are interleaved later, which is one half of
// what makes cached decoding bitwise equal to recomputation; the mask below
// is the other half.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sst/matrix.hpp"
#include "sst/model.hpp"

namespace sst {

enum class Modality { speech, text };

struct LayoutSpan {
  Modality modality = Modality::speech;
  int length = 0;
};

// Ordered spans of an interleaved speech/text sequence.
struct InterleavedLayout {
  std::vector<LayoutSpan> spans;

  int total_length() const {
    int n = 0;
    for (const auto& s : spans) n += s.length;
    return n;
  }

  // 0 for speech rows, 1 for text rows, in row order.
  std::vector<int> flags() const {
    std::vector<int> f;
    f.reserve(static_cast<std::size_t>(total_length()));
    for (const auto& s : spans)
      for (int i = 0; i < s.length; ++i) f.push_back(s.modality == Modality::text ? 1 : 0);
    return f;
  }

  void validate() const {
    for (const auto& s : spans)
      if (s.length < 0) throw std::invalid_argument("invalid-argument: negative span length");
  }
};

// Row z_Q may attend row z_K iff z_K <= z_Q and delta(z_Q) >= delta(z_K)
// with delta = 1 for text, 0 for speech: text attends everything causally,
// speech attends speech causally and never attends text.  Under this rule a
// row's visible key set never changes as the sequence grows, so cached
// activations stay valid forever.
inline Mask consistency_mask_from_flags(const std::vector<int>& flags) {
  const int n = static_cast<int>(flags.size());
  Mask m(n, n);
  for (int q = 0; q < n; ++q)
    for (int k = 0; k <= q; ++k) m.set(q, k, flags[static_cast<std::size_t>(q)] >=
                                                  flags[static_cast<std::size_t>(k)]);
  return m;
}

inline Mask build_consistency_mask(const InterleavedLayout& layout) {
  layout.validate();
  return consistency_mask_from_flags(layout.flags());
}

// Positions from two independent streams, one per modality.
inline std::vector<int> assign_positions(const InterleavedLayout& layout) {
  layout.validate();
  std::vector<int> pos;
  pos.reserve(static_cast<std::size_t>(layout.total_length()));
  int speech = 0, text = 0;
  for (const auto& s : layout.spans)
    for (int i = 0; i < s.length; ++i)
      pos.push_back(s.modality == Modality::text ? text++ : speech++);
  return pos;
}

template <typename T>
Mat<T> embed_tokens(std::span<const int> tokens, const ModelT<T>& model) {
  Mat<T> out(static_cast<int>(tokens.size()), model.cfg.d_model);
  for (int i = 0; i < out.rows(); ++i) {
    const int id = tokens[static_cast<std::size_t>(i)];
    if (id < 0 || id >= model.cfg.vocab_size)
      throw std::out_of_range("out-of-range: token id outside vocabulary");
    for (int j = 0; j < out.cols(); ++j) out(i, j) = model.embedding(id, j);
  }
  return out;
}

// Full decoder forward pass over explicit positions and mask: pre-norm
// layers, final norm, output projection to logits.
template <typename T>
Mat<T> decoder_forward_with_positions(const Mat<T>& embeddings, const std::vector<int>& positions,
                                      const Mask& mask, const ModelT<T>& model) {
  Mat<T> x = embeddings;
  for (const auto& layer : model.decoder)
    x = transformer_block(x, layer, mask, model.cfg.dec_heads, positions, model.dec_rope);
  x = layer_norm(x, model.dec_final);
  return dense(x, model.out_proj);
}

template <typename T>
Mat<T> decoder_forward_full(const Mat<T>& embeddings, const InterleavedLayout& layout,
                            const Mask& mask, const ModelT<T>& model) {
  if (layout.total_length() != embeddings.rows())
    throw std::invalid_argument("invalid-argument: layout length does not match embedding rows");
  return decoder_forward_with_positions(embeddings, assign_positions(layout), mask, model);
}

// Incremental decoder state.  Holds per-layer key/value rows, the modality
// flag and rotary position of every cached row, and the logits row each
// cached row produced.  Keeping all logits makes rollback (truncate) cheap
// and lets generation read "the last row's logits" without recomputing.
template <typename T>
struct DecoderCacheT {
  std::vector<Mat<T>> k, v;  // one entry per decoder layer
  std::vector<int> flags;
  std::vector<int> positions;
  Mat<T> logits{0, 0};
  int speech_count = 0;
  int text_count = 0;

  int rows() const { return static_cast<int>(flags.size()); }

  // Drops every cached row at index >= keep.  Valid because no surviving
  // row ever attended a dropped row (the mask is causal), so their cached
  // activations are unaffected.
  void truncate(int keep) {
    if (keep < 0 || keep > rows())
      throw std::out_of_range("out-of-range: cache truncation point");
    for (auto& m : k) m.truncate_rows(keep);
    for (auto& m : v) m.truncate_rows(keep);
    flags.resize(static_cast<std::size_t>(keep));
    positions.resize(static_cast<std::size_t>(keep));
    logits.truncate_rows(keep);
    speech_count = 0;
    text_count = 0;
    for (int f : flags) (f == 1 ? text_count : speech_count)++;
  }
};

using DecoderCache = DecoderCacheT<float>;

// Appends rows of one modality to the cache and returns their logits.  Each
// new row attends every cached row its modality is allowed to see plus the
// causally-earlier new rows, which is the consistency rule restricted to the
// new query rows; the cached rows' outputs are unaffected, so the result
// matches a full recomputation bitwise.
template <typename T>
Mat<T> decoder_append(DecoderCacheT<T>& cache, const Mat<T>& new_embeddings, Modality modality,
                      const ModelT<T>& model) {
  if (cache.k.empty()) {
    cache.k.resize(model.decoder.size());
    cache.v.resize(model.decoder.size());
  }

  const int history = cache.rows();
  const int n = new_embeddings.rows();
  const int delta_new = modality == Modality::text ? 1 : 0;

  Mask mask(n, history + n);
  for (int r = 0; r < n; ++r) {
    for (int z = 0; z < history; ++z)
      mask.set(r, z, delta_new >= cache.flags[static_cast<std::size_t>(z)]);
    for (int z = 0; z <= r; ++z) mask.set(r, history + z, true);
  }

  std::vector<int> pos(static_cast<std::size_t>(n));
  int counter = modality == Modality::text ? cache.text_count : cache.speech_count;
  for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = counter++;

  Mat<T> x = new_embeddings;
  for (std::size_t li = 0; li < model.decoder.size(); ++li) {
    BlockKvT<T> kv;
    if (cache.k[li].rows() > 0) {
      kv.k = &cache.k[li];
      kv.v = &cache.v[li];
    }
    Mat<T> k_new, v_new;
    x = transformer_block(x, model.decoder[li], mask, model.cfg.dec_heads, pos, model.dec_rope,
                          kv, &k_new, &v_new);
    if (cache.k[li].rows() == 0) {
      cache.k[li] = std::move(k_new);
      cache.v[li] = std::move(v_new);
    } else {
      cache.k[li].append_rows(k_new);
      cache.v[li].append_rows(v_new);
    }
  }
  x = layer_norm(x, model.dec_final);
  Mat<T> logits = dense(x, model.out_proj);

  cache.flags.insert(cache.flags.end(), static_cast<std::size_t>(n), delta_new);
  cache.positions.insert(cache.positions.end(), pos.begin(), pos.end());
  if (cache.logits.rows() == 0)
    cache.logits = logits;
  else
    cache.logits.append_rows(logits);
  (modality == Modality::text ? cache.text_count : cache.speech_count) += n;
  return logits;
}

// Greedy pick; ties break toward the lowest index so results do not depend
// on float comparison quirks across platforms.
template <typename T>
int argmax_lowest(std::span<const T> row) {
  if (row.empty()) throw std::invalid_argument("invalid-argument: argmax over empty row");
  int best = 0;
  for (int i = 1; i < static_cast<int>(row.size()); ++i)
    if (row[static_cast<std::size_t>(i)] > row[static_cast<std::size_t>(best)]) best = i;
  return best;
}

struct GenerationResult {
  std::vector<int> tokens;
  int words = 0;
  bool ended_eos = false;
  bool truncated = false;  // hit max_tokens before n_words full words
};

// Greedy autoregressive generation: each step takes the argmax of the last
// cached row's logits, feeds it back as a text row, and stops after n_words
// complete words, at EOS, or at max_tokens.
template <typename T>
GenerationResult greedy_generate(DecoderCacheT<T>& cache, int n_words, int max_tokens,
                                 const ModelT<T>& model) {
  if (n_words < 1 || max_tokens < 1)
    throw std::invalid_argument("invalid-argument: generation needs n_words, max_tokens >= 1");
  if (cache.rows() < 1)
    throw std::invalid_argument("invalid-argument: generation needs a non-empty cache");

  GenerationResult res;
  while (static_cast<int>(res.tokens.size()) < max_tokens) {
    const int id = argmax_lowest(std::span<const T>(cache.logits.row(cache.rows() - 1)));
    std::vector<int> one{id};
    decoder_append(cache, embed_tokens(std::span<const int>(one), model), Modality::text, model);
    res.tokens.push_back(id);
    if (model.vocab.is_word_boundary(id)) ++res.words;
    if (id == model.vocab.eos) {
      res.ended_eos = true;
      return res;
    }
    if (res.words >= n_words) return res;
  }
  res.truncated = res.words < n_words;
  return res;
}

}  // namespace sst
