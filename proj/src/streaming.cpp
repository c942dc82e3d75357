// SPDX-License-Identifier: Apache-2.0

#include "sst/streaming.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "sst/macs.hpp"

namespace sst {

CostTable uniform_cost_table(double ms_per_mega_mac) {
  CostTable t;
  for (const char* kind : {"extract", "encode", "adapt", "decode"})
    t.ms_per_mega_mac[kind] = ms_per_mega_mac;
  return t;
}

Clock Clock::simulated(CostTable table) {
  Clock c;
  c.mode_ = ClockMode::simulated;
  c.table_ = std::move(table);
  return c;
}

Clock Clock::real() {
  Clock c;
  c.mode_ = ClockMode::real;
  c.start_ = std::chrono::steady_clock::now();
  return c;
}

double Clock::now_ms() const {
  if (mode_ == ClockMode::simulated) return sim_now_ms_;
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  return std::max(elapsed, floor_ms_);
}

void Clock::advance_to(double audio_ms) {
  if (mode_ == ClockMode::simulated)
    sim_now_ms_ = std::max(sim_now_ms_, audio_ms);
  else
    floor_ms_ = std::max(floor_ms_, audio_ms);
}

void Clock::charge(const std::string& kind, double mega_macs) {
  if (mode_ == ClockMode::real) return;
  auto it = table_.ms_per_mega_mac.find(kind);
  if (it == table_.ms_per_mega_mac.end())
    throw std::invalid_argument("invalid-config: no cost-table rate for operation " + kind);
  sim_now_ms_ += it->second * mega_macs;
}

void validate_log(const EventLog& log) {
  if (log.events.empty()) throw std::invalid_argument("invalid-log: empty event log");
  if (log.events.front().type != Event::Type::read)
    throw std::invalid_argument("invalid-log: first event must be a READ");
  double wall = -std::numeric_limits<double>::infinity();
  double audio = -std::numeric_limits<double>::infinity();
  for (const auto& e : log.events) {
    if (e.t_wall_ms < wall) throw std::invalid_argument("invalid-log: wall time decreased");
    wall = e.t_wall_ms;
    if (e.type == Event::Type::read) {
      if (e.audio_ms <= audio)
        throw std::invalid_argument("invalid-log: READ audio_ms must strictly increase");
      audio = e.audio_ms;
    }
  }
}

void PolicyConfig::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("invalid-config: ") + msg); };
  if (kind == PolicyKind::wait_k_stride_n && k < 1) fail("k must be >= 1");
  if (n < 1) fail("n must be >= 1");
  if (!(segment_ms > 0)) fail("segment_ms must be positive");
  if (max_tokens_per_write < 1) fail("max_tokens_per_write must be >= 1");
}

namespace {

// Shared per-session incremental state: extractor, encoder cache, stored
// encoder states, adapter progress, decoder cache.
struct SessionState {
  const Model& model;
  Clock& clock;
  EventLog log;
  ExtractorStream extractor;
  EncoderCache enc_cache;
  Mat<float> enc_states;
  int emb_count = 0;
  DecoderCache dec_cache;
  double audio_ms = 0.0;

  SessionState(const Model& m, Clock& c)
      : model(m), clock(c), extractor(m), enc_states(0, m.cfg.d_enc) {}

  template <typename Fn>
  void charged(const char* kind, Fn&& fn) {
    macs::Meter meter;
    fn();
    clock.charge(kind, static_cast<double>(meter.elapsed()) / 1e6);
  }

  // Zero-pads a final short segment; rejects anything else off-size.
  std::vector<float> normalize_segment(const std::vector<float>& seg, bool is_final) {
    const std::size_t expect = static_cast<std::size_t>(model.cfg.samples_per_segment());
    if (seg.size() == expect) return seg;
    if (!is_final || seg.size() > expect)
      throw std::invalid_argument("invalid-input: segment sample count mismatch");
    std::vector<float> padded = seg;
    padded.resize(expect, 0.0f);
    return padded;
  }

  void read_segment(const std::vector<float>& raw, int index_1based, double segment_ms,
                    bool is_final) {
    const std::vector<float> samples = normalize_segment(raw, is_final);
    const bool padded = samples.size() != raw.size();
    audio_ms = segment_ms * index_1based;
    clock.advance_to(audio_ms);
    Event e;
    e.type = Event::Type::read;
    e.t_wall_ms = clock.now_ms();
    e.audio_ms = audio_ms;
    e.segment_index = index_1based;
    e.padded = padded;
    log.events.push_back(e);

    Mat<float> frames;
    charged("extract", [&] { frames = extractor.push_segment(samples); });
    Mat<float> states;
    charged("encode", [&] { states = encode_segment(enc_cache, frames, model); });
    enc_states.append_rows(states);
    Mat<float> new_embs;
    charged("adapt", [&] { new_embs = adapt(enc_states, emb_count, model); });
    emb_count += new_embs.rows();
    if (new_embs.rows() > 0)
      charged("decode", [&] { decoder_append(dec_cache, new_embs, Modality::speech, model); });
  }

  void append_bos() {
    charged("decode", [&] {
      decoder_append(dec_cache, embed_tokens(std::vector<int>{model.vocab.bos}, model),
                     Modality::text, model);
    });
  }

  GenerationResult generate(int n_words, int max_tokens) {
    GenerationResult gen;
    charged("decode", [&] { gen = greedy_generate(dec_cache, n_words, max_tokens, model); });
    return gen;
  }

  void log_write(const GenerationResult& gen) {
    Event e;
    e.type = Event::Type::write;
    e.t_wall_ms = clock.now_ms();
    e.audio_ms = audio_ms;
    e.tokens = gen.tokens;
    e.words = gen.words;
    log.events.push_back(e);
  }
};

}  // namespace

SessionResult run_wait_k_stride_n(const Model& model,
                                  const std::vector<std::vector<float>>& segments,
                                  const PolicyConfig& cfg, Clock& clock) {
  cfg.validate();
  if (cfg.kind != PolicyKind::wait_k_stride_n)
    throw std::invalid_argument("invalid-config: policy kind mismatch");
  if (segments.empty()) throw std::invalid_argument("invalid-input: empty segment stream");

  const int total = static_cast<int>(segments.size());
  SessionState s(model, clock);
  SessionResult result;

  int next_seg = 0;
  for (; next_seg < std::min(cfg.k, total); ++next_seg)
    s.read_segment(segments[next_seg], next_seg + 1, cfg.segment_ms, next_seg + 1 == total);
  s.append_bos();

  while (true) {
    const bool final_write = next_seg >= total;
    // The final write runs to EOS or the cap; earlier writes stop at n words.
    const int words_target = final_write ? std::numeric_limits<int>::max() : cfg.n;
    const GenerationResult gen = s.generate(words_target, cfg.max_tokens_per_write);
    result.tokens.insert(result.tokens.end(), gen.tokens.begin(), gen.tokens.end());
    s.log_write(gen);
    if (gen.ended_eos || final_write) break;
    s.read_segment(segments[next_seg], next_seg + 1, cfg.segment_ms, next_seg + 1 == total);
    ++next_seg;
  }

  result.log = std::move(s.log);
  return result;
}

SessionResult run_hold_n(const Model& model, const std::vector<std::vector<float>>& segments,
                         const PolicyConfig& cfg, Clock& clock,
                         std::vector<HoldStep>* trace) {
  cfg.validate();
  if (cfg.kind != PolicyKind::hold_n)
    throw std::invalid_argument("invalid-config: policy kind mismatch");
  if (segments.empty()) throw std::invalid_argument("invalid-input: empty segment stream");

  const int total = static_cast<int>(segments.size());
  SessionState s(model, clock);
  SessionResult result;
  std::vector<int> committed;

  for (int i = 0; i < total; ++i) {
    const bool final_seg = (i + 1 == total);
    s.read_segment(segments[i], i + 1, cfg.segment_ms, final_seg);
    if (i == 0) s.append_bos();

    const int snapshot = s.dec_cache.rows();
    // No word target: the hypothesis runs until EOS or the token cap.
    const GenerationResult gen =
        s.generate(std::numeric_limits<int>::max(), cfg.max_tokens_per_write);

    const int cont_len = static_cast<int>(gen.tokens.size());
    const int emit_len = final_seg ? cont_len : std::max(0, cont_len - cfg.n);
    std::vector<int> emitted(gen.tokens.begin(), gen.tokens.begin() + emit_len);

    if (trace != nullptr) {
      HoldStep step;
      step.hypothesis = committed;
      step.hypothesis.insert(step.hypothesis.end(), gen.tokens.begin(), gen.tokens.end());
      step.emitted = emitted;
      step.committed_before = static_cast<int>(committed.size());
      trace->push_back(std::move(step));
    }

    // Keep only the emitted continuation rows; the rest roll back.
    s.dec_cache.truncate(snapshot + emit_len);
    committed.insert(committed.end(), emitted.begin(), emitted.end());

    if (emit_len > 0 || final_seg) {
      GenerationResult logged;
      logged.tokens = emitted;
      for (int id : emitted)
        if (model.vocab.is_word_boundary(id)) logged.words += 1;
      s.log_write(logged);
    }
    if (emit_len > 0 && emitted.back() == model.vocab.eos) break;
  }

  result.tokens = std::move(committed);
  result.log = std::move(s.log);
  return result;
}

}  // namespace sst
