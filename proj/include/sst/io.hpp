// SPDX-License-Identifier: Apache-2.0
//
// File formats: stream manifests, vocabularies, cost tables, event logs,
// token lists, alignments, metrics, and the bench CSV.  Every JSON document
// carries "format_version": 1; the event log is JSON-lines with a header
// record; the bench CSV header is fixed.

#pragma once

#include <string>
#include <vector>

#include "sst/bench.hpp"
#include "sst/config.hpp"
#include "sst/losses.hpp"
#include "sst/streaming.hpp"

namespace sst {

struct StreamData {
  double sample_rate = 16000.0;  // descriptive; session timing uses segment_ms
  int segment_samples = 0;
  std::vector<std::vector<float>> segments;
};

// Manifest: {format_version, sample_rate, segment_samples, segments: [...]}.
// Each segment is an inline array of reals or a path (relative to the
// manifest) to raw little-endian 32-bit reals.  Only the final segment may
// be short.
StreamData load_stream(const std::string& path);
void save_stream(const std::string& path, const StreamData& stream);

// {format_version, size, bos, eos, word_sep, single_token_words?, tokens?}
Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const std::string& path, const Vocabulary& vocab);

// {format_version, ms_per_mega_mac: {kind: rate, ...}}
CostTable load_cost_table(const std::string& path);
void save_cost_table(const std::string& path, const CostTable& table);

// Model dimensions; absent fields keep their defaults.
ModelConfig load_model_config(const std::string& path);

// JSONL: {"type":"header","format_version":1} then one object per event.
void save_event_log(const std::string& path, const EventLog& log);
EventLog load_event_log(const std::string& path);

// {format_version, tokens: [...]}
std::vector<int> load_tokens(const std::string& path);
void save_tokens(const std::string& path, const std::vector<int>& tokens);

// {format_version, words: [{speech_start, speech_end, text_start, text_end}]}
std::vector<AlignedWord> load_alignment(const std::string& path);

struct MetricsSummary {
  double bleu_lite = 0.0;
  double laal_ms = 0.0;
  double laal_ca_ms = 0.0;
  int words = 0;
  int segments = 0;
  double t_ms = 0.0;
};

// {format_version, bleu_lite, laal_ms, laal_ca_ms, words, segments, T_ms}
void save_metrics(const std::string& path, const MetricsSummary& metrics);

// Header exactly "variant,step,wall_ms,macs".
void save_bench_csv(const std::string& path, const std::vector<BenchRecord>& records);

}  // namespace sst
