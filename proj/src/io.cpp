// SPDX-License-Identifier: Apache-2.0

#include "sst/io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sst {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("invalid-argument: cannot open " + path);
  return json::parse(in);
}

void require_version(const json& doc, const std::string& path) {
  if (doc.value("format_version", 0) != 1)
    throw std::invalid_argument("invalid-config: unsupported format_version in " + path);
}

void write_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("invalid-argument: cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

std::vector<float> load_raw_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("invalid-argument: cannot open " + path);
  const std::streamsize bytes = in.tellg();
  if (bytes % sizeof(float) != 0)
    throw std::invalid_argument("invalid-input: sample file size not a multiple of 4: " + path);
  std::vector<float> samples(static_cast<std::size_t>(bytes) / sizeof(float));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(samples.data()), bytes);
  if (!in) throw std::runtime_error("numeric-failure: short read from " + path);
  return samples;
}

}  // namespace

StreamData load_stream(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  StreamData stream;
  stream.sample_rate = doc.value("sample_rate", 16000.0);
  stream.segment_samples = doc.at("segment_samples").get<int>();
  if (stream.segment_samples < 1)
    throw std::invalid_argument("invalid-input: segment_samples must be >= 1");
  const auto& segs = doc.at("segments");
  if (!segs.is_array() || segs.empty())
    throw std::invalid_argument("invalid-input: stream needs at least one segment");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::vector<float> samples;
    if (segs[i].is_string())
      samples = load_raw_samples((base / segs[i].get<std::string>()).string());
    else
      samples = segs[i].get<std::vector<float>>();
    const bool is_final = (i + 1 == segs.size());
    if (static_cast<int>(samples.size()) != stream.segment_samples &&
        (!is_final || static_cast<int>(samples.size()) > stream.segment_samples))
      throw std::invalid_argument("invalid-input: only the final segment may be short");
    stream.segments.push_back(std::move(samples));
  }
  return stream;
}

void save_stream(const std::string& path, const StreamData& stream) {
  json doc;
  doc["format_version"] = 1;
  doc["sample_rate"] = stream.sample_rate;
  doc["segment_samples"] = stream.segment_samples;
  doc["segments"] = stream.segments;
  write_file(path, doc);
}

Vocabulary load_vocabulary(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  Vocabulary v;
  v.size = doc.at("size").get<int>();
  v.bos = doc.value("bos", 0);
  v.eos = doc.value("eos", 1);
  v.word_sep = doc.value("word_sep", 2);
  v.single_token_words = doc.value("single_token_words", false);
  if (doc.contains("tokens")) v.tokens = doc.at("tokens").get<std::vector<std::string>>();
  v.validate();
  return v;
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  json doc;
  doc["format_version"] = 1;
  doc["size"] = vocab.size;
  doc["bos"] = vocab.bos;
  doc["eos"] = vocab.eos;
  doc["word_sep"] = vocab.word_sep;
  doc["single_token_words"] = vocab.single_token_words;
  if (!vocab.tokens.empty()) doc["tokens"] = vocab.tokens;
  write_file(path, doc);
}

CostTable load_cost_table(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  CostTable table;
  for (const auto& [kind, rate] : doc.at("ms_per_mega_mac").items())
    table.ms_per_mega_mac[kind] = rate.get<double>();
  return table;
}

void save_cost_table(const std::string& path, const CostTable& table) {
  json doc;
  doc["format_version"] = 1;
  doc["ms_per_mega_mac"] = table.ms_per_mega_mac;
  write_file(path, doc);
}

ModelConfig load_model_config(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  ModelConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("extractor_kernel1", cfg.extractor_kernel1);
  get("extractor_stride1", cfg.extractor_stride1);
  get("extractor_kernel2", cfg.extractor_kernel2);
  get("extractor_stride2", cfg.extractor_stride2);
  get("d_feat", cfg.d_feat);
  get("d_enc", cfg.d_enc);
  get("enc_layers", cfg.enc_layers);
  get("enc_heads", cfg.enc_heads);
  get("enc_ffn", cfg.enc_ffn);
  get("block_size", cfg.block_size);
  get("adapter_kernel", cfg.adapter_kernel);
  get("d_model", cfg.d_model);
  get("dec_layers", cfg.dec_layers);
  get("dec_heads", cfg.dec_heads);
  get("dec_ffn", cfg.dec_ffn);
  get("vocab_size", cfg.vocab_size);
  get("rope_base", cfg.rope_base);
  get("max_positions", cfg.max_positions);
  cfg.validate();
  return cfg;
}

void save_event_log(const std::string& path, const EventLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("invalid-argument: cannot open " + path + " for writing");
  out << json{{"type", "header"}, {"format_version", 1}}.dump() << "\n";
  for (const auto& e : log.events) {
    json rec;
    rec["t_wall_ms"] = e.t_wall_ms;
    rec["audio_ms"] = e.audio_ms;
    if (e.type == Event::Type::read) {
      rec["type"] = "read";
      rec["segment_index"] = e.segment_index;
      rec["padded"] = e.padded;
    } else {
      rec["type"] = "write";
      rec["tokens"] = e.tokens;
      rec["words"] = e.words;
    }
    out << rec.dump() << "\n";
  }
}

EventLog load_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("invalid-argument: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("invalid-log: missing header line");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("type", "") != "header" ||
      header.value("format_version", 0) != 1)
    throw std::invalid_argument("invalid-log: bad header line");

  EventLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw std::invalid_argument("invalid-log: unparseable event line");
    Event e;
    e.t_wall_ms = rec.at("t_wall_ms").get<double>();
    e.audio_ms = rec.at("audio_ms").get<double>();
    const std::string type = rec.at("type").get<std::string>();
    if (type == "read") {
      e.type = Event::Type::read;
      e.segment_index = rec.value("segment_index", 0);
      e.padded = rec.value("padded", false);
    } else if (type == "write") {
      e.type = Event::Type::write;
      e.tokens = rec.value("tokens", std::vector<int>{});
      e.words = rec.value("words", 0);
    } else {
      throw std::invalid_argument("invalid-log: unknown event type " + type);
    }
    log.events.push_back(std::move(e));
  }
  validate_log(log);
  return log;
}

std::vector<int> load_tokens(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  return doc.at("tokens").get<std::vector<int>>();
}

void save_tokens(const std::string& path, const std::vector<int>& tokens) {
  write_file(path, json{{"format_version", 1}, {"tokens", tokens}});
}

std::vector<AlignedWord> load_alignment(const std::string& path) {
  const json doc = parse_file(path);
  require_version(doc, path);
  std::vector<AlignedWord> words;
  for (const auto& w : doc.at("words")) {
    AlignedWord a;
    a.speech = {w.at("speech_start").get<int>(), w.at("speech_end").get<int>()};
    a.text = {w.at("text_start").get<int>(), w.at("text_end").get<int>()};
    words.push_back(a);
  }
  if (words.empty()) throw std::invalid_argument("invalid-alignment: no aligned words");
  return words;
}

void save_metrics(const std::string& path, const MetricsSummary& metrics) {
  json doc;
  doc["format_version"] = 1;
  doc["bleu_lite"] = metrics.bleu_lite;
  doc["laal_ms"] = metrics.laal_ms;
  doc["laal_ca_ms"] = metrics.laal_ca_ms;
  doc["words"] = metrics.words;
  doc["segments"] = metrics.segments;
  doc["T_ms"] = metrics.t_ms;
  write_file(path, doc);
}

void save_bench_csv(const std::string& path, const std::vector<BenchRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("invalid-argument: cannot open " + path + " for writing");
  out << "variant,step,wall_ms,macs\n";
  for (const auto& r : records)
    out << bench_variant_name(r.variant) << "," << r.step << "," << r.wall_ms << "," << r.macs
        << "\n";
}

}  // namespace sst
