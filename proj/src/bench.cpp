// SPDX-License-Identifier: Apache-2.0

#include "sst/bench.hpp"

#include <chrono>
#include <random>
#include <stdexcept>
#include <thread>

#include "sst/decoder.hpp"
#include "sst/encoder.hpp"
#include "sst/macs.hpp"

namespace sst {

const char* bench_variant_name(BenchVariant v) {
  switch (v) {
    case BenchVariant::full_recompute: return "full_recompute";
    case BenchVariant::incremental_encoder_only: return "incremental_encoder_only";
    case BenchVariant::fasst: return "fasst";
  }
  throw std::invalid_argument("invalid-config: unknown bench variant");
}

BenchVariant bench_variant_from_name(const std::string& name) {
  if (name == "full_recompute") return BenchVariant::full_recompute;
  if (name == "incremental_encoder_only") return BenchVariant::incremental_encoder_only;
  if (name == "fasst") return BenchVariant::fasst;
  throw std::invalid_argument("invalid-config: unknown bench variant " + name);
}

namespace {

constexpr int kWaitK = 2;

std::vector<std::vector<float>> synthetic_segments(const Model& model, int num_segments,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<float>> segs(num_segments);
  for (auto& seg : segs) {
    seg.resize(model.cfg.samples_per_segment());
    for (float& s : seg) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      s = static_cast<float>(2.0 * u - 1.0);
    }
  }
  return segs;
}

// One modality span of the session history, replayed verbatim by the
// recompute variants.
struct HistorySpan {
  Modality modality;
  Mat<float> embeddings;
};

// Runs one variant's session, pushing a record per write-bearing step.
void run_variant(const Model& model, BenchVariant variant,
                 const std::vector<std::vector<float>>& segments, int n,
                 std::vector<BenchRecord>& out) {
  const int total = static_cast<int>(segments.size());

  // fasst state (persistent caches)
  ExtractorStream extractor(model);
  EncoderCache enc_cache;
  Mat<float> enc_states(0, model.cfg.d_enc);
  int emb_count = 0;
  DecoderCache dec_cache;

  // recompute state (history replayed per step)
  std::vector<float> all_samples;
  std::vector<HistorySpan> history;

  const Mat<float> bos_emb = embed_tokens(std::vector<int>{model.vocab.bos}, model);

  auto read_incremental = [&](int seg) {
    Mat<float> frames = extractor.push_segment(segments[seg]);
    Mat<float> states = encode_segment(enc_cache, frames, model);
    enc_states.append_rows(states);
    Mat<float> new_embs = adapt(enc_states, emb_count, model);
    emb_count += new_embs.rows();
    if (variant == BenchVariant::fasst) {
      if (new_embs.rows() > 0) decoder_append(dec_cache, new_embs, Modality::speech, model);
    } else {
      if (new_embs.rows() > 0) history.push_back({Modality::speech, std::move(new_embs)});
    }
  };

  auto read_full_recompute = [&](int seg) {
    all_samples.insert(all_samples.end(), segments[seg].begin(), segments[seg].end());
    Mat<float> frames = extract_all(std::span<const float>(all_samples), model);
    Mat<float> states = encode_full(frames, model);
    Mat<float> embs = adapt(states, 0, model);
    // Replace the whole speech history with the freshly recomputed rows,
    // preserving the interleaving shape (per-segment span sizes).
    std::size_t row = 0;
    for (auto& span : history) {
      if (span.modality != Modality::speech) continue;
      span.embeddings = embs.slice_rows(static_cast<int>(row),
                                        static_cast<int>(row) + span.embeddings.rows());
      row += static_cast<std::size_t>(span.embeddings.rows());
    }
    if (static_cast<int>(row) < embs.rows())
      history.push_back({Modality::speech, embs.slice_rows(static_cast<int>(row), embs.rows())});
  };

  auto read_segment = [&](int seg) {
    if (variant == BenchVariant::full_recompute)
      read_full_recompute(seg);
    else
      read_incremental(seg);
  };

  auto generate = [&]() {
    if (variant == BenchVariant::fasst) {
      greedy_generate(dec_cache, n, n, model);
      return;
    }
    // Recompute variants rebuild the decoder cache by replaying the span
    // history, then generate on top of it.
    DecoderCache fresh;
    for (const auto& span : history) decoder_append(fresh, span.embeddings, span.modality, model);
    const GenerationResult gen = greedy_generate(fresh, n, n, model);
    history.push_back({Modality::text, embed_tokens(gen.tokens, model)});
  };

  // Session setup: the k-1 prefill reads and the BOS row precede the first
  // write and are not part of the per-step series, so every step has the
  // same composition (one read, one write).
  int next_seg = 0;
  for (; next_seg < kWaitK - 1 && next_seg < total - 1; ++next_seg) read_segment(next_seg);
  if (variant == BenchVariant::fasst)
    decoder_append(dec_cache, bos_emb, Modality::text, model);
  else
    history.push_back({Modality::text, bos_emb});

  int step = 0;
  while (next_seg < total) {
    ++step;
    const auto t0 = std::chrono::steady_clock::now();
    macs::Meter meter;

    read_segment(next_seg);
    ++next_seg;
    generate();

    BenchRecord rec;
    rec.variant = variant;
    rec.step = step;
    rec.macs = meter.elapsed();
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rec);
  }
}

}  // namespace

std::vector<BenchRecord> bench_scaling(const Model& model, int num_segments,
                                       const std::vector<BenchVariant>& variants,
                                       int n, bool parallel, std::uint64_t audio_seed) {
  if (num_segments < 4)
    throw std::invalid_argument("invalid-argument: bench needs at least 4 segments");
  if (n < 1) throw std::invalid_argument("invalid-argument: n must be >= 1");
  if (variants.empty()) throw std::invalid_argument("invalid-config: no bench variants");

  // Pinning generation to the separator makes every write emit exactly n
  // tokens, so step-to-step work differences come from history length alone.
  Model rigged = model;
  rigged.rig_constant_output(rigged.vocab.word_sep);
  const auto segments = synthetic_segments(rigged, num_segments, audio_seed);

  std::vector<std::vector<BenchRecord>> per_variant(variants.size());
  if (parallel) {
    std::vector<std::thread> workers;
    workers.reserve(variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i)
      workers.emplace_back([&, i] { run_variant(rigged, variants[i], segments, n, per_variant[i]); });
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t i = 0; i < variants.size(); ++i)
      run_variant(rigged, variants[i], segments, n, per_variant[i]);
  }

  std::vector<BenchRecord> all;
  for (auto& records : per_variant)
    all.insert(all.end(), records.begin(), records.end());
  return all;
}

}  // namespace sst
