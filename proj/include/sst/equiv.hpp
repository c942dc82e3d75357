// SPDX-License-Identifier: Apache-2.0
//
// Randomized incremental-vs-full equivalence suites.  Each suite runs many
// seeded cases and reports the worst absolute deviation it saw; the CLI and
// the acceptance checks assert on that number.  The incremental paths are
// designed to be exact, so the expected deviation is 0.0, far inside the
// asserted tolerances.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sst/decoder.hpp"
#include "sst/encoder.hpp"
#include "sst/losses.hpp"
#include "sst/matrix.hpp"
#include "sst/model.hpp"

namespace sst {

struct EquivSummary {
  int cases = 0;
  double worst = 0.0;

  void fold(double deviation) {
    worst = std::max(worst, deviation);
    ++cases;
  }
};

namespace detail {

// 53-bit uniform in [-1, 1); same construction as the weight initializer so
// streams are identical across standard library implementations.
template <typename T>
std::vector<T> uniform_signal(std::mt19937_64& rng, int n) {
  std::vector<T> s(static_cast<std::size_t>(n));
  for (auto& v : s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = static_cast<T>(2.0 * u - 1.0);
  }
  return s;
}

template <typename T>
Mat<T> uniform_matrix(std::mt19937_64& rng, int rows, int cols) {
  Mat<T> m(rows, cols);
  const std::vector<T> s = uniform_signal<T>(rng, rows * cols);
  std::copy(s.begin(), s.end(), m.data().begin());
  return m;
}

}  // namespace detail

// Streams 1..8 segments through the incremental extractor, encoder and
// adapter and compares every produced row against the one-shot full
// computation over the concatenated input.
template <typename T>
EquivSummary encoder_equivalence_suite(std::uint64_t seed, int num_cases = 50) {
  static const int kBlocks[] = {4, 8, 12};
  EquivSummary sum;
  for (int c = 0; c < num_cases; ++c) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(c) * 0x9e3779b97f4a7c15ull);
    ModelConfig cfg;
    cfg.block_size = kBlocks[rng() % 3];
    const int segments = 1 + static_cast<int>(rng() % 8);
    const ModelT<T> model = ModelT<T>::random(rng(), cfg);

    const int sps = cfg.samples_per_segment();
    const std::vector<T> all = detail::uniform_signal<T>(rng, sps * segments);

    const Mat<T> frames_full = extract_all(std::span<const T>(all), model);
    const Mat<T> states_full = encode_full(frames_full, model);
    const Mat<T> emb_full = adapt(states_full, 0, model);

    ExtractorStreamT<T> extractor(model);
    EncoderCacheT<T> cache;
    Mat<T> frames_inc(0, cfg.d_feat);
    Mat<T> states_inc(0, cfg.d_enc);
    Mat<T> emb_inc(0, cfg.d_model);
    for (int s = 0; s < segments; ++s) {
      const std::span<const T> seg(all.data() + static_cast<std::size_t>(s) * sps,
                                   static_cast<std::size_t>(sps));
      const Mat<T> frames = extractor.push_segment(seg);
      frames_inc.append_rows(frames);
      states_inc.append_rows(encode_segment(cache, frames, model));
      emb_inc.append_rows(adapt(states_inc, emb_inc.rows(), model));
    }

    double worst = static_cast<double>(max_abs_diff(frames_full, frames_inc));
    worst = std::max(worst, static_cast<double>(max_abs_diff(states_full, states_inc)));
    worst = std::max(worst, static_cast<double>(max_abs_diff(emb_full, emb_inc)));
    sum.fold(worst);
  }
  return sum;
}

// Appends random interleaved speech/text spans to a decoder cache one span
// at a time and compares the logits against a single forward pass over the
// whole arrangement under the consistency mask.
template <typename T>
EquivSummary decoder_equivalence_suite(std::uint64_t seed, int num_cases = 50) {
  EquivSummary sum;
  for (int c = 0; c < num_cases; ++c) {
    std::mt19937_64 rng(seed + 0x51ed2701ull + static_cast<std::uint64_t>(c) * 0x9e3779b97f4a7c15ull);
    ModelConfig cfg;
    const ModelT<T> model = ModelT<T>::random(rng(), cfg);

    InterleavedLayout layout;
    const int num_spans = 1 + static_cast<int>(rng() % 6);
    for (int s = 0; s < num_spans; ++s)
      layout.spans.push_back({rng() % 2 == 0 ? Modality::speech : Modality::text,
                              1 + static_cast<int>(rng() % 5)});

    const Mat<T> embeddings = detail::uniform_matrix<T>(rng, layout.total_length(), cfg.d_model);
    const Mat<T> full =
        decoder_forward_full(embeddings, layout, build_consistency_mask(layout), model);

    DecoderCacheT<T> cache;
    int row = 0;
    for (const auto& span : layout.spans) {
      decoder_append(cache, embeddings.slice_rows(row, row + span.length), span.modality, model);
      row += span.length;
    }
    sum.fold(static_cast<double>(max_abs_diff(full, cache.logits)));
  }
  return sum;
}

// Teacher-forced training arrangement versus streaming interleave across the
// full policy grid: k in {1,2,3,100}, n in {1,2,3}, 2..5 segments.
template <typename T>
EquivSummary stage2_equivalence_suite(std::uint64_t seed) {
  static const int kValues[] = {1, 2, 3, 100};
  static const int nValues[] = {1, 2, 3};
  EquivSummary sum;
  std::uint64_t case_index = 0;
  for (int k : kValues)
    for (int n : nValues)
      for (int segments = 2; segments <= 5; ++segments) {
        std::mt19937_64 rng(seed + 0xa11ce5ull + (case_index++) * 0x9e3779b97f4a7c15ull);
        ModelConfig cfg;
        const ModelT<T> model = ModelT<T>::random(rng(), cfg);

        std::vector<Mat<T>> segment_embeddings;
        for (int s = 0; s < segments; ++s)
          segment_embeddings.push_back(
              detail::uniform_matrix<T>(rng, 1 + static_cast<int>(rng() % 3), cfg.d_model));

        // 3..7 words of 1..2 content tokens each, terminated by the
        // separator, so word groups actually advance.
        std::vector<int> tokens;
        const int words = 3 + static_cast<int>(rng() % 5);
        for (int w = 0; w < words; ++w) {
          const int len = 1 + static_cast<int>(rng() % 2);
          for (int t = 0; t < len; ++t)
            tokens.push_back(3 + static_cast<int>(rng() % (cfg.vocab_size - 3)));
          tokens.push_back(model.vocab.word_sep);
        }

        sum.fold(static_cast<double>(stage2_logit_equivalence(
            model, segment_embeddings, std::span<const int>(tokens), k, n)));
      }
  return sum;
}

// Bitwise causality probe.  Perturbing a later speech segment must leave
// every earlier feature frame, encoder state, adapter embedding and
// speech-row logit untouched; perturbing text embeddings must leave all
// speech-row logits untouched.  Expected deviation: exactly 0.
template <typename T>
EquivSummary causality_suite(std::uint64_t seed) {
  EquivSummary sum;
  std::mt19937_64 rng(seed + 0xca05eull);
  ModelConfig cfg;
  const ModelT<T> model = ModelT<T>::random(rng(), cfg);
  const int segments = 4;
  const int sps = cfg.samples_per_segment();
  const std::vector<T> base = detail::uniform_signal<T>(rng, sps * segments);

  struct Pipeline {
    Mat<T> frames, states, emb, speech_logits;
  };
  auto run = [&](const std::vector<T>& samples) {
    Pipeline p;
    p.frames = extract_all(std::span<const T>(samples), model);
    p.states = encode_full(p.frames, model);
    p.emb = adapt(p.states, 0, model);
    InterleavedLayout layout{{{Modality::speech, p.emb.rows()}}};
    p.speech_logits =
        decoder_forward_full(p.emb, layout, build_consistency_mask(layout), model);
    return p;
  };
  const Pipeline clean = run(base);

  for (int p = 1; p < segments; ++p) {
    std::vector<T> perturbed = base;
    for (int i = p * sps; i < (p + 1) * sps; ++i)
      perturbed[static_cast<std::size_t>(i)] += T(1);
    const Pipeline dirty = run(perturbed);

    const int frames_before = p * cfg.block_size;
    const int emb_before = adapter_output_len(frames_before);
    double worst = static_cast<double>(max_abs_diff(
        clean.frames.slice_rows(0, frames_before), dirty.frames.slice_rows(0, frames_before)));
    worst = std::max(worst, static_cast<double>(max_abs_diff(
                                clean.states.slice_rows(0, frames_before),
                                dirty.states.slice_rows(0, frames_before))));
    worst = std::max(worst, static_cast<double>(max_abs_diff(
                                clean.emb.slice_rows(0, emb_before),
                                dirty.emb.slice_rows(0, emb_before))));
    worst = std::max(worst, static_cast<double>(max_abs_diff(
                                clean.speech_logits.slice_rows(0, emb_before),
                                dirty.speech_logits.slice_rows(0, emb_before))));
    sum.fold(worst);
  }

  // Speech rows never attend text: flipping text embeddings may not move any
  // speech-row logit.
  {
    const int text_rows = 4;
    InterleavedLayout layout{{{Modality::speech, clean.emb.rows()}, {Modality::text, text_rows}}};
    Mat<T> x = clean.emb;
    x.append_rows(detail::uniform_matrix<T>(rng, text_rows, cfg.d_model));
    const Mask mask = build_consistency_mask(layout);
    const Mat<T> before = decoder_forward_full(x, layout, mask, model);
    for (int r = clean.emb.rows(); r < x.rows(); ++r)
      for (int j = 0; j < x.cols(); ++j) x(r, j) += T(2);
    const Mat<T> after = decoder_forward_full(x, layout, mask, model);
    sum.fold(static_cast<double>(
        max_abs_diff(before.slice_rows(0, clean.emb.rows()),
                     after.slice_rows(0, clean.emb.rows()))));
  }
  return sum;
}

}  // namespace sst
