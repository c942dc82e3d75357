// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sst/bench.hpp"
#include "sst/config.hpp"
#include "sst/io.hpp"
#include "sst/metrics.hpp"
#include "sst/streaming.hpp"
#include "testutil.hpp"

namespace {

using sst::Event;
using sst::EventLog;

struct TempDir {
  std::filesystem::path dir;
  explicit TempDir(const std::string& tag)
      : dir(std::filesystem::temp_directory_path() / ("streamst_test_" + tag)) {
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

Event read_event(double wall, double audio, int index) {
  Event e;
  e.type = Event::Type::read;
  e.t_wall_ms = wall;
  e.audio_ms = audio;
  e.segment_index = index;
  return e;
}

Event write_event(double wall, double audio, std::vector<int> tokens, int words) {
  Event e;
  e.type = Event::Type::write;
  e.t_wall_ms = wall;
  e.audio_ms = audio;
  e.tokens = std::move(tokens);
  e.words = words;
  return e;
}

}  // namespace

TEST_CASE("delays attach each emitted word to its write") {
  const sst::Vocabulary vocab;
  EventLog log;
  log.events.push_back(read_event(1000, 1000, 1));
  log.events.push_back(write_event(1050, 1000, {5, 2, 6, 2}, 2));

  const sst::DelayProfile p = sst::delays_from_log(log, vocab);
  CHECK(p.d_nca == std::vector<double>{1000, 1000});
  CHECK(p.d_ca == std::vector<double>{1050, 1050});
  CHECK(p.t_ms == 1000.0);
  CHECK(p.ref_len == 2);
}

TEST_CASE("a trailing unterminated word still counts") {
  const sst::Vocabulary vocab;
  EventLog log;
  log.events.push_back(read_event(1000, 1000, 1));
  log.events.push_back(write_event(1200, 1000, {5, 2, 6}, 1));

  const sst::DelayProfile p = sst::delays_from_log(log, vocab);
  CHECK(p.hyp_len() == 2);
  CHECK(p.d_nca == std::vector<double>{1000, 1000});
  CHECK(p.d_ca == std::vector<double>{1200, 1200});
}

TEST_CASE("delay extraction validates the log first") {
  const sst::Vocabulary vocab;
  EventLog log;
  log.events.push_back(write_event(0, 0, {2}, 1));
  CHECK_THROWS_AS(sst::delays_from_log(log, vocab), std::invalid_argument);
}

TEST_CASE("lagging metric oracle values") {
  sst::DelayProfile p;
  p.d_nca = {1000, 2000, 3000};
  p.d_ca = p.d_nca;
  p.t_ms = 3000;
  p.ref_len = 3;
  CHECK(sst::laal(p, sst::LatencyMode::nca) == 1000.0);
  CHECK(sst::laal(p, sst::LatencyMode::ca) == 1000.0);

  // One word, emitted at the very end: the lag is the whole utterance.
  sst::DelayProfile one;
  one.d_nca = {5000};
  one.d_ca = {5000};
  one.t_ms = 5000;
  one.ref_len = 1;
  CHECK(sst::laal(one, sst::LatencyMode::nca) == 5000.0);

  // A longer reference shrinks the per-word allowance r.
  sst::DelayProfile under;
  under.d_nca = {1000, 2000, 3000};
  under.d_ca = under.d_nca;
  under.t_ms = 3000;
  under.ref_len = 6;
  CHECK(sst::laal(under, sst::LatencyMode::nca) == 1500.0);
}

TEST_CASE("lagging metric input validation") {
  sst::DelayProfile p;
  p.d_nca = {100};
  p.d_ca = {100};
  p.t_ms = 0;
  p.ref_len = 1;
  CHECK_THROWS_WITH_AS(sst::laal(p, sst::LatencyMode::nca),
                       "invalid-profile: nonpositive duration", std::invalid_argument);
  p.t_ms = 1000;
  p.d_nca.clear();
  p.d_ca.clear();
  CHECK_THROWS_WITH_AS(sst::laal(p, sst::LatencyMode::nca), "invalid-profile: empty hypothesis",
                       std::invalid_argument);
  p.d_nca = {100, 200};
  p.d_ca = {100};
  CHECK_THROWS_WITH_AS(sst::laal(p, sst::LatencyMode::nca),
                       "invalid-profile: delay vectors differ in length", std::invalid_argument);
}

TEST_CASE("computation can only add lag") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    sst::DelayProfile p;
    const int words = 1 + static_cast<int>(rng() % 8);
    double d = 0.0;
    for (int w = 0; w < words; ++w) {
      d += 100.0 + static_cast<double>(rng() % 900);
      p.d_nca.push_back(d);
      p.d_ca.push_back(d + static_cast<double>(rng() % 500));
    }
    p.t_ms = d + static_cast<double>(rng() % 1000);
    p.ref_len = 1 + static_cast<int>(rng() % 10);
    CHECK(sst::laal(p, sst::LatencyMode::ca) >= sst::laal(p, sst::LatencyMode::nca));

    sst::DelayProfile ideal = p;
    ideal.d_ca = ideal.d_nca;
    CHECK(sst::laal(ideal, sst::LatencyMode::ca) == sst::laal(ideal, sst::LatencyMode::nca));
  }
}

TEST_CASE("translation quality score oracle values") {
  const std::vector<int> ref{4, 9, 2, 9, 5, 2, 7, 2};
  CHECK(sst::bleu_lite(std::span<const int>(ref), std::span<const int>(ref)) == 1.0);

  std::vector<int> hyp10, ref10;
  for (int i = 0; i < 10; ++i) {
    hyp10.push_back(3 + i);
    ref10.push_back(13 + i);
  }
  CHECK(sst::bleu_lite(std::span<const int>(hyp10), std::span<const int>(ref10)) ==
        doctest::Approx(0.10600313379512592).epsilon(1e-12));

  const std::vector<int> empty;
  CHECK(sst::bleu_lite(std::span<const int>(empty), std::span<const int>(ref)) == 0.0);

  // Order 1 ignores word order entirely.
  const std::vector<int> abc{1, 2, 3};
  const std::vector<int> cba{3, 2, 1};
  CHECK(sst::bleu_lite(std::span<const int>(abc), std::span<const int>(cba), 1) == 1.0);

  // Orders longer than the hypothesis are skipped; only brevity penalizes.
  const std::vector<int> hyp2{1, 2};
  const std::vector<int> ref4{1, 2, 3, 4};
  CHECK(sst::bleu_lite(std::span<const int>(hyp2), std::span<const int>(ref4)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("translation quality score stays within the unit interval") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> hyp, ref;
    const int hl = 1 + static_cast<int>(rng() % 12);
    const int rl = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < hl; ++i) hyp.push_back(static_cast<int>(rng() % 6));
    for (int i = 0; i < rl; ++i) ref.push_back(static_cast<int>(rng() % 6));
    const double score = sst::bleu_lite(std::span<const int>(hyp), std::span<const int>(ref));
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
  }
}

TEST_CASE("translation quality score input validation") {
  const std::vector<int> hyp{1, 2};
  const std::vector<int> empty;
  CHECK_THROWS_WITH_AS(sst::bleu_lite(std::span<const int>(hyp), std::span<const int>(empty)),
                       "invalid-reference: empty reference", std::invalid_argument);
  CHECK_THROWS_AS(sst::bleu_lite(std::span<const int>(hyp), std::span<const int>(hyp), 0),
                  std::invalid_argument);
}

TEST_CASE("stream manifests round-trip inline and raw segments") {
  TempDir tmp("stream");
  sst::StreamData stream;
  stream.segment_samples = 4;
  stream.segments = {{1.0f, -2.0f, 3.0f, -4.0f}, {0.5f, 0.25f}};
  sst::save_stream(tmp.path("stream.json"), stream);
  const sst::StreamData back = sst::load_stream(tmp.path("stream.json"));
  CHECK(back.segment_samples == 4);
  CHECK(back.segments == stream.segments);

  // A segment may live in a raw little-endian sample file next to the manifest.
  const std::vector<float> raw{9.0f, 8.0f, 7.0f, 6.0f};
  std::ofstream bin(tmp.path("seg.bin"), std::ios::binary);
  bin.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  bin.close();
  std::ofstream manifest(tmp.path("mixed.json"));
  manifest << R"({"format_version":1,"segment_samples":4,"segments":["seg.bin",[1.0,2.0]]})";
  manifest.close();
  const sst::StreamData mixed = sst::load_stream(tmp.path("mixed.json"));
  REQUIRE(mixed.segments.size() == 2);
  CHECK(mixed.segments[0] == raw);
  CHECK(mixed.segments[1] == std::vector<float>{1.0f, 2.0f});

  std::ofstream bad(tmp.path("bad.json"));
  bad << R"({"format_version":1,"segment_samples":4,"segments":[[1.0,2.0],[1.0,2.0,3.0,4.0]]})";
  bad.close();
  CHECK_THROWS_WITH_AS(sst::load_stream(tmp.path("bad.json")),
                       "invalid-input: only the final segment may be short",
                       std::invalid_argument);

  std::ofstream torn(tmp.path("torn.bin"), std::ios::binary);
  torn.write("abcde", 5);
  torn.close();
  std::ofstream tm(tmp.path("torn.json"));
  tm << R"({"format_version":1,"segment_samples":4,"segments":["torn.bin"]})";
  tm.close();
  CHECK_THROWS_AS(sst::load_stream(tmp.path("torn.json")), std::invalid_argument);
}

TEST_CASE("vocabulary and cost table files round-trip") {
  TempDir tmp("vocab");
  sst::Vocabulary vocab;
  vocab.size = 16;
  vocab.single_token_words = true;
  sst::save_vocabulary(tmp.path("vocab.json"), vocab);
  const sst::Vocabulary back = sst::load_vocabulary(tmp.path("vocab.json"));
  CHECK(back.size == 16);
  CHECK(back.bos == vocab.bos);
  CHECK(back.eos == vocab.eos);
  CHECK(back.word_sep == vocab.word_sep);
  CHECK(back.single_token_words);

  sst::CostTable table = sst::uniform_cost_table(0.25);
  table.ms_per_mega_mac["decode"] = 0.5;
  sst::save_cost_table(tmp.path("costs.json"), table);
  const sst::CostTable tback = sst::load_cost_table(tmp.path("costs.json"));
  CHECK(tback.ms_per_mega_mac == table.ms_per_mega_mac);
}

TEST_CASE("model config files keep defaults for absent fields") {
  TempDir tmp("config");
  std::ofstream out(tmp.path("config.json"));
  out << R"({"format_version":1,"d_model":48,"dec_heads":3})";
  out.close();
  const sst::ModelConfig cfg = sst::load_model_config(tmp.path("config.json"));
  CHECK(cfg.d_model == 48);
  CHECK(cfg.dec_heads == 3);
  const sst::ModelConfig defaults;
  CHECK(cfg.d_enc == defaults.d_enc);
  CHECK(cfg.block_size == defaults.block_size);
  CHECK(cfg.vocab_size == defaults.vocab_size);
}

TEST_CASE("event logs round-trip through the line format") {
  TempDir tmp("log");
  EventLog log;
  log.events.push_back(read_event(1000, 1000, 1));
  log.events.push_back(write_event(1004.5, 1000, {5, 2}, 1));
  log.events.push_back(read_event(2000, 2000, 2));
  log.events.back().padded = true;
  log.events.push_back(write_event(2010.25, 2000, {6, 2, 1}, 2));
  sst::save_event_log(tmp.path("log.jsonl"), log);

  const EventLog back = sst::load_event_log(tmp.path("log.jsonl"));
  REQUIRE(back.events.size() == log.events.size());
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    CHECK(back.events[i].type == log.events[i].type);
    CHECK(back.events[i].t_wall_ms == log.events[i].t_wall_ms);
    CHECK(back.events[i].audio_ms == log.events[i].audio_ms);
    CHECK(back.events[i].segment_index == log.events[i].segment_index);
    CHECK(back.events[i].padded == log.events[i].padded);
    CHECK(back.events[i].tokens == log.events[i].tokens);
    CHECK(back.events[i].words == log.events[i].words);
  }

  std::ofstream empty(tmp.path("empty.jsonl"));
  empty.close();
  CHECK_THROWS_WITH_AS(sst::load_event_log(tmp.path("empty.jsonl")),
                       "invalid-log: missing header line", std::invalid_argument);

  std::ofstream bad(tmp.path("bad.jsonl"));
  bad << R"({"type":"header","format_version":1})" << "\n" << "not json" << "\n";
  bad.close();
  CHECK_THROWS_WITH_AS(sst::load_event_log(tmp.path("bad.jsonl")),
                       "invalid-log: unparseable event line", std::invalid_argument);

  std::ofstream noheader(tmp.path("noheader.jsonl"));
  noheader << R"({"type":"read","t_wall_ms":0,"audio_ms":0})" << "\n";
  noheader.close();
  CHECK_THROWS_WITH_AS(sst::load_event_log(tmp.path("noheader.jsonl")),
                       "invalid-log: bad header line", std::invalid_argument);
}

TEST_CASE("token lists and alignments load from versioned documents") {
  TempDir tmp("tok");
  sst::save_tokens(tmp.path("tokens.json"), {4, 2, 7, 1});
  CHECK(sst::load_tokens(tmp.path("tokens.json")) == std::vector<int>{4, 2, 7, 1});

  std::ofstream out(tmp.path("align.json"));
  out << R"({"format_version":1,"words":[)"
      << R"({"speech_start":0,"speech_end":3,"text_start":0,"text_end":2,"word":"hi"},)"
      << R"({"speech_start":3,"speech_end":5,"text_start":2,"text_end":3}]})";
  out.close();
  const std::vector<sst::AlignedWord> words = sst::load_alignment(tmp.path("align.json"));
  REQUIRE(words.size() == 2);
  CHECK(words[0].speech.begin == 0);
  CHECK(words[0].speech.end == 3);
  CHECK(words[0].text.begin == 0);
  CHECK(words[0].text.end == 2);
  CHECK(words[1].speech.begin == 3);

  std::ofstream bad(tmp.path("none.json"));
  bad << R"({"format_version":1,"words":[]})";
  bad.close();
  CHECK_THROWS_WITH_AS(sst::load_alignment(tmp.path("none.json")),
                       "invalid-alignment: no aligned words", std::invalid_argument);

  std::ofstream unversioned(tmp.path("v0.json"));
  unversioned << R"({"tokens":[1]})";
  unversioned.close();
  CHECK_THROWS_AS(sst::load_tokens(tmp.path("v0.json")), std::invalid_argument);
}

TEST_CASE("metrics files carry all summary fields") {
  TempDir tmp("metrics");
  sst::MetricsSummary m;
  m.bleu_lite = 0.5;
  m.laal_ms = 1200.0;
  m.laal_ca_ms = 1300.0;
  m.words = 7;
  m.segments = 4;
  m.t_ms = 4000.0;
  sst::save_metrics(tmp.path("metrics.json"), m);

  std::ifstream in(tmp.path("metrics.json"));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"format_version\"") != std::string::npos);
  CHECK(text.find("\"bleu_lite\"") != std::string::npos);
  CHECK(text.find("\"laal_ms\"") != std::string::npos);
  CHECK(text.find("\"laal_ca_ms\"") != std::string::npos);
  CHECK(text.find("\"words\"") != std::string::npos);
  CHECK(text.find("\"segments\"") != std::string::npos);
  CHECK(text.find("\"T_ms\"") != std::string::npos);
}

TEST_CASE("bench records write the fixed CSV header") {
  TempDir tmp("csv");
  std::vector<sst::BenchRecord> records;
  records.push_back({sst::BenchVariant::fasst, 1, 1.5, 1000});
  sst::save_bench_csv(tmp.path("bench.csv"), records);
  std::ifstream in(tmp.path("bench.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "variant,step,wall_ms,macs");
  std::string row;
  std::getline(in, row);
  CHECK(row == "fasst,1,1.5,1000");
}

TEST_CASE("variant names round-trip") {
  for (sst::BenchVariant v : {sst::BenchVariant::full_recompute,
                              sst::BenchVariant::incremental_encoder_only,
                              sst::BenchVariant::fasst})
    CHECK(sst::bench_variant_from_name(sst::bench_variant_name(v)) == v);
  CHECK_THROWS_AS(sst::bench_variant_from_name("warp"), std::invalid_argument);
}

TEST_CASE("scaling benchmark produces clean per-step work series") {
  const sst::Model model = sst::Model::random(73);
  const std::vector<sst::BenchVariant> variants{sst::BenchVariant::full_recompute,
                                                sst::BenchVariant::fasst};
  const std::vector<sst::BenchRecord> records = sst::bench_scaling(model, 8, variants);

  std::vector<double> fasst_steps, fasst_macs, full_steps, full_macs;
  for (const auto& r : records) {
    if (r.variant == sst::BenchVariant::fasst) {
      fasst_steps.push_back(r.step);
      fasst_macs.push_back(static_cast<double>(r.macs));
    } else {
      full_steps.push_back(r.step);
      full_macs.push_back(static_cast<double>(r.macs));
    }
  }
  REQUIRE(fasst_steps.size() == 7);  // wait-2 over 8 segments
  REQUIRE(full_steps.size() == 7);
  for (std::size_t i = 0; i < fasst_steps.size(); ++i)
    CHECK(fasst_steps[i] == static_cast<double>(i + 1));

  // Constant work per step for the incremental pipeline, growing work for
  // recomputation.
  const sst::testutil::PolyFit affine = sst::testutil::polyfit(fasst_steps, fasst_macs, 1);
  CHECK(affine.r2 >= 0.99);
  const sst::testutil::PolyFit quad = sst::testutil::polyfit(full_steps, full_macs, 2);
  CHECK(quad.r2 >= 0.99);
  CHECK(quad.coeffs[2] > 0.0);
  CHECK(full_macs.back() > fasst_macs.back());

  // The counter series is a pure function of the inputs.
  const std::vector<sst::BenchRecord> again = sst::bench_scaling(model, 8, variants);
  REQUIRE(again.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(again[i].macs == records[i].macs);

  CHECK_THROWS_AS(sst::bench_scaling(model, 3, variants), std::invalid_argument);
}
