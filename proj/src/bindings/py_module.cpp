// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the main operations: model construction, incremental
// encoding/decoding, masks, policies, losses, metrics and the scaling bench.
// Matrices cross the boundary as numpy arrays (float32 for model-path data,
// float64 for the loss/gradient oracles).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sst/bench.hpp"
#include "sst/config.hpp"
#include "sst/decoder.hpp"
#include "sst/encoder.hpp"
#include "sst/equiv.hpp"
#include "sst/io.hpp"
#include "sst/losses.hpp"
#include "sst/metrics.hpp"
#include "sst/model.hpp"
#include "sst/streaming.hpp"

namespace py = pybind11;

namespace {

template <typename T>
sst::Mat<T> mat_from_numpy(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("invalid-argument: expected a 2-D array");
  sst::Mat<T> m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

template <typename T>
py::array_t<T> numpy_from_mat(const sst::Mat<T>& m) {
  py::array_t<T> a(std::vector<py::ssize_t>{m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

py::array_t<bool> numpy_from_mask(const sst::Mask& m) {
  py::array_t<bool> a(std::vector<py::ssize_t>{m.rows(), m.cols()});
  auto* out = a.mutable_data();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      out[static_cast<std::size_t>(r) * m.cols() + c] = m.allowed(r, c);
  return a;
}

sst::Modality modality_from_name(const std::string& name) {
  if (name == "speech") return sst::Modality::speech;
  if (name == "text") return sst::Modality::text;
  throw std::invalid_argument("invalid-argument: modality must be 'speech' or 'text'");
}

sst::InterleavedLayout layout_from_pairs(const std::vector<std::pair<std::string, int>>& spans) {
  sst::InterleavedLayout layout;
  for (const auto& [name, len] : spans) layout.spans.push_back({modality_from_name(name), len});
  return layout;
}

using ArrayF = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ArrayD = py::array_t<double, py::array::c_style | py::array::forcecast>;

}  // namespace

PYBIND11_MODULE(_core, mod) {
  using namespace sst;
  mod.doc() = "Recomputation-free simultaneous speech translation engine";

  py::class_<ModelConfig>(mod, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("extractor_kernel1", &ModelConfig::extractor_kernel1)
      .def_readwrite("extractor_stride1", &ModelConfig::extractor_stride1)
      .def_readwrite("extractor_kernel2", &ModelConfig::extractor_kernel2)
      .def_readwrite("extractor_stride2", &ModelConfig::extractor_stride2)
      .def_readwrite("d_feat", &ModelConfig::d_feat)
      .def_readwrite("d_enc", &ModelConfig::d_enc)
      .def_readwrite("enc_layers", &ModelConfig::enc_layers)
      .def_readwrite("enc_heads", &ModelConfig::enc_heads)
      .def_readwrite("enc_ffn", &ModelConfig::enc_ffn)
      .def_readwrite("block_size", &ModelConfig::block_size)
      .def_readwrite("adapter_kernel", &ModelConfig::adapter_kernel)
      .def_readwrite("d_model", &ModelConfig::d_model)
      .def_readwrite("dec_layers", &ModelConfig::dec_layers)
      .def_readwrite("dec_heads", &ModelConfig::dec_heads)
      .def_readwrite("dec_ffn", &ModelConfig::dec_ffn)
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("rope_base", &ModelConfig::rope_base)
      .def_readwrite("max_positions", &ModelConfig::max_positions)
      .def("samples_per_segment", &ModelConfig::samples_per_segment)
      .def("extractor_stride", &ModelConfig::extractor_stride)
      .def("validate", &ModelConfig::validate);

  py::class_<Vocabulary>(mod, "Vocabulary")
      .def(py::init<>())
      .def_readwrite("size", &Vocabulary::size)
      .def_readwrite("bos", &Vocabulary::bos)
      .def_readwrite("eos", &Vocabulary::eos)
      .def_readwrite("word_sep", &Vocabulary::word_sep)
      .def_readwrite("single_token_words", &Vocabulary::single_token_words)
      .def_readwrite("tokens", &Vocabulary::tokens)
      .def("is_word_boundary", &Vocabulary::is_word_boundary)
      .def("validate", &Vocabulary::validate);

  mod.def("count_word_boundaries", [](const std::vector<int>& tokens, const Vocabulary& v) {
    return count_word_boundaries(tokens, v);
  });
  mod.def("count_words_total", [](const std::vector<int>& tokens, const Vocabulary& v) {
    return count_words_total(tokens, v);
  });

  py::class_<Model>(mod, "Model")
      .def(py::init<const ModelConfig&, const Vocabulary&>(), py::arg("config") = ModelConfig{},
           py::arg("vocab") = Vocabulary{})
      .def_static("random", &Model::random, py::arg("seed"), py::arg("config") = ModelConfig{},
                  py::arg("vocab") = Vocabulary{})
      .def_readonly("cfg", &Model::cfg)
      .def_readonly("vocab", &Model::vocab)
      .def("save", &Model::save, py::arg("path_prefix"))
      .def("load", &Model::load, py::arg("path_prefix"))
      .def("rig_constant_output", &Model::rig_constant_output, py::arg("token_id"));

  // --- speech side -------------------------------------------------------
  mod.def("extract_all", [](const std::vector<float>& samples, const Model& m) {
    return numpy_from_mat(extract_all(std::span<const float>(samples), m));
  });
  mod.def("encode_full", [](const ArrayF& frames, const Model& m) {
    return numpy_from_mat(encode_full(mat_from_numpy<float>(frames), m));
  });
  mod.def("adapt", [](const ArrayF& all_states, int prev, const Model& m) {
    return numpy_from_mat(adapt(mat_from_numpy<float>(all_states), prev, m));
  }, py::arg("all_states"), py::arg("prev_emb_count"), py::arg("model"));
  mod.def("adapter_output_len", &adapter_output_len);

  py::class_<ExtractorStream>(mod, "ExtractorStream")
      .def(py::init<const Model&>(), py::keep_alive<1, 2>())
      .def("push_segment",
           [](ExtractorStream& s, const std::vector<float>& samples) {
             return numpy_from_mat(s.push_segment(samples));
           })
      .def("frames_produced", &ExtractorStream::frames_produced);

  py::class_<EncoderCache>(mod, "EncoderCache")
      .def(py::init<>())
      .def_readonly("blocks_processed", &EncoderCache::blocks_processed);
  mod.def("encode_segment", [](EncoderCache& cache, const ArrayF& frames, const Model& m) {
    return numpy_from_mat(encode_segment(cache, mat_from_numpy<float>(frames), m));
  });

  // --- masks and layouts -------------------------------------------------
  mod.def("build_blockwise_mask", [](int len, int block) {
    return numpy_from_mask(build_blockwise_mask(len, block));
  }, py::arg("len"), py::arg("block"));
  mod.def("build_consistency_mask", [](const std::vector<std::pair<std::string, int>>& spans) {
    return numpy_from_mask(build_consistency_mask(layout_from_pairs(spans)));
  });
  mod.def("assign_positions", [](const std::vector<std::pair<std::string, int>>& spans) {
    return assign_positions(layout_from_pairs(spans));
  });
  mod.def("build_stage2_mask",
          [](const std::vector<int>& segment_sizes, const std::vector<int>& token_groups, int k,
             int n) {
            return numpy_from_mask(build_stage2_mask({segment_sizes, token_groups, k, n}));
          },
          py::arg("segment_sizes"), py::arg("token_groups"), py::arg("k"), py::arg("n"));
  mod.def("token_groups_for", [](const std::vector<int>& tokens, const Vocabulary& v, int n) {
    return token_groups_for(tokens, v, n);
  });

  // --- text side ---------------------------------------------------------
  py::class_<DecoderCache>(mod, "DecoderCache")
      .def(py::init<>())
      .def_readonly("speech_count", &DecoderCache::speech_count)
      .def_readonly("text_count", &DecoderCache::text_count)
      .def_property_readonly("flags", [](const DecoderCache& c) { return c.flags; })
      .def_property_readonly("positions", [](const DecoderCache& c) { return c.positions; })
      .def_property_readonly("logits", [](const DecoderCache& c) { return numpy_from_mat(c.logits); })
      .def("rows", &DecoderCache::rows)
      .def("truncate", &DecoderCache::truncate, py::arg("keep"));

  mod.def("embed_tokens", [](const std::vector<int>& tokens, const Model& m) {
    return numpy_from_mat(embed_tokens(std::span<const int>(tokens), m));
  });
  mod.def("decoder_append",
          [](DecoderCache& cache, const ArrayF& embeddings, const std::string& modality,
             const Model& m) {
            return numpy_from_mat(
                decoder_append(cache, mat_from_numpy<float>(embeddings),
                               modality_from_name(modality), m));
          },
          py::arg("cache"), py::arg("embeddings"), py::arg("modality"), py::arg("model"));
  mod.def("decoder_forward_full",
          [](const ArrayF& embeddings, const std::vector<std::pair<std::string, int>>& spans,
             const Model& m) {
            const InterleavedLayout layout = layout_from_pairs(spans);
            return numpy_from_mat(decoder_forward_full(mat_from_numpy<float>(embeddings), layout,
                                                       build_consistency_mask(layout), m));
          },
          py::arg("embeddings"), py::arg("layout"), py::arg("model"));

  py::class_<GenerationResult>(mod, "GenerationResult")
      .def_readonly("tokens", &GenerationResult::tokens)
      .def_readonly("words", &GenerationResult::words)
      .def_readonly("ended_eos", &GenerationResult::ended_eos)
      .def_readonly("truncated", &GenerationResult::truncated);
  mod.def("greedy_generate",
          [](DecoderCache& cache, int n_words, int max_tokens, const Model& m) {
            return greedy_generate(cache, n_words, max_tokens, m);
          },
          py::arg("cache"), py::arg("n_words"), py::arg("max_tokens"), py::arg("model"));

  // --- losses ------------------------------------------------------------
  mod.def("group_words", [](const ArrayD& emb, const std::vector<std::pair<int, int>>& ranges) {
    std::vector<RowRange> rr;
    for (const auto& [b, e] : ranges) rr.push_back({b, e});
    return numpy_from_mat(group_words(mat_from_numpy<double>(emb), rr));
  });
  mod.def("waco_loss", [](const ArrayD& ws, const ArrayD& wt, double tau) {
    return waco_loss(mat_from_numpy<double>(ws), mat_from_numpy<double>(wt), tau);
  }, py::arg("ws"), py::arg("wt"), py::arg("tau") = 0.2);
  mod.def("waco_loss_grad", [](const ArrayD& ws, const ArrayD& wt, double tau) {
    const auto g = waco_loss_grad(mat_from_numpy<double>(ws), mat_from_numpy<double>(wt), tau);
    return py::make_tuple(g.loss, numpy_from_mat(g.d_ws), numpy_from_mat(g.d_wt));
  }, py::arg("ws"), py::arg("wt"), py::arg("tau") = 0.2);
  mod.def("masked_ce", [](const ArrayD& logits, const std::vector<int>& targets) {
    return masked_ce(mat_from_numpy<double>(logits), std::span<const int>(targets));
  });
  mod.def("masked_ce_grad", [](const ArrayD& logits, const std::vector<int>& targets) {
    const auto g = masked_ce_grad(mat_from_numpy<double>(logits), std::span<const int>(targets));
    return py::make_tuple(g.loss, numpy_from_mat(g.d_logits));
  });
  mod.def("stage2_logit_equivalence",
          [](const Model& m, const std::vector<ArrayF>& segments, const std::vector<int>& tokens,
             int k, int n) {
            std::vector<Mat<float>> segs;
            for (const auto& s : segments) segs.push_back(mat_from_numpy<float>(s));
            return stage2_logit_equivalence(m, segs, std::span<const int>(tokens), k, n);
          },
          py::arg("model"), py::arg("segment_embeddings"), py::arg("tokens"), py::arg("k"),
          py::arg("n"));
  mod.def("sample_k", &sample_k, py::arg("candidates"), py::arg("seed"));

  // --- streaming sessions -------------------------------------------------
  py::class_<Clock>(mod, "Clock")
      .def_static("simulated",
                  [](const std::map<std::string, double>& rates) {
                    CostTable t;
                    t.ms_per_mega_mac = rates;
                    return Clock::simulated(std::move(t));
                  },
                  py::arg("ms_per_mega_mac"))
      .def_static("simulated_uniform",
                  [](double rate) { return Clock::simulated(uniform_cost_table(rate)); },
                  py::arg("rate"))
      .def_static("real", &Clock::real)
      .def("now_ms", &Clock::now_ms)
      .def("advance_to", &Clock::advance_to)
      .def("charge", &Clock::charge);

  py::class_<Event>(mod, "Event")
      .def_property_readonly("type",
                             [](const Event& e) {
                               return std::string(e.type == Event::Type::read ? "read" : "write");
                             })
      .def_readonly("t_wall_ms", &Event::t_wall_ms)
      .def_readonly("audio_ms", &Event::audio_ms)
      .def_readonly("segment_index", &Event::segment_index)
      .def_readonly("padded", &Event::padded)
      .def_readonly("tokens", &Event::tokens)
      .def_readonly("words", &Event::words);

  py::class_<EventLog>(mod, "EventLog")
      .def(py::init<>())
      .def_readonly("events", &EventLog::events);
  mod.def("validate_log", &validate_log);
  mod.def("save_event_log", &save_event_log, py::arg("path"), py::arg("log"));
  mod.def("load_event_log", &load_event_log, py::arg("path"));

  py::class_<PolicyConfig>(mod, "PolicyConfig")
      .def(py::init([](const std::string& kind, int k, int n, double segment_ms, int max_tokens) {
             PolicyConfig c;
             c.kind = kind == "hold_n" ? PolicyKind::hold_n : PolicyKind::wait_k_stride_n;
             if (kind != "hold_n" && kind != "wait_k")
               throw std::invalid_argument("invalid-config: policy must be 'wait_k' or 'hold_n'");
             c.k = k;
             c.n = n;
             c.segment_ms = segment_ms;
             c.max_tokens_per_write = max_tokens;
             return c;
           }),
           py::arg("kind") = "wait_k", py::arg("k") = 1, py::arg("n") = 1,
           py::arg("segment_ms") = 1000.0, py::arg("max_tokens_per_write") = 64)
      .def_readwrite("k", &PolicyConfig::k)
      .def_readwrite("n", &PolicyConfig::n)
      .def_readwrite("segment_ms", &PolicyConfig::segment_ms)
      .def_readwrite("max_tokens_per_write", &PolicyConfig::max_tokens_per_write);

  py::class_<SessionResult>(mod, "SessionResult")
      .def_readonly("tokens", &SessionResult::tokens)
      .def_readonly("log", &SessionResult::log);

  mod.def("run_wait_k_stride_n",
          [](const Model& m, const std::vector<std::vector<float>>& segments,
             const PolicyConfig& cfg, Clock& clock) {
            return run_wait_k_stride_n(m, segments, cfg, clock);
          },
          py::arg("model"), py::arg("segments"), py::arg("policy"), py::arg("clock"));
  mod.def("run_hold_n",
          [](const Model& m, const std::vector<std::vector<float>>& segments,
             const PolicyConfig& cfg, Clock& clock) {
            return run_hold_n(m, segments, cfg, clock);
          },
          py::arg("model"), py::arg("segments"), py::arg("policy"), py::arg("clock"));

  // --- metrics -------------------------------------------------------------
  py::class_<DelayProfile>(mod, "DelayProfile")
      .def_readonly("d_nca", &DelayProfile::d_nca)
      .def_readonly("d_ca", &DelayProfile::d_ca)
      .def_readonly("t_ms", &DelayProfile::t_ms)
      .def_readwrite("ref_len", &DelayProfile::ref_len)
      .def("hyp_len", &DelayProfile::hyp_len);
  mod.def("delays_from_log", &delays_from_log, py::arg("log"), py::arg("vocab"));
  mod.def("laal",
          [](const DelayProfile& p, const std::string& mode) {
            if (mode != "nca" && mode != "ca")
              throw std::invalid_argument("invalid-argument: mode must be 'nca' or 'ca'");
            return laal(p, mode == "ca" ? LatencyMode::ca : LatencyMode::nca);
          },
          py::arg("profile"), py::arg("mode") = "nca");
  mod.def("bleu_lite",
          [](const std::vector<int>& hyp, const std::vector<int>& ref, int max_order) {
            return bleu_lite(hyp, ref, max_order);
          },
          py::arg("hypothesis"), py::arg("reference"), py::arg("max_order") = 4);

  // --- bench and equivalence suites ---------------------------------------
  py::class_<BenchRecord>(mod, "BenchRecord")
      .def_property_readonly("variant",
                             [](const BenchRecord& r) {
                               return std::string(bench_variant_name(r.variant));
                             })
      .def_readonly("step", &BenchRecord::step)
      .def_readonly("wall_ms", &BenchRecord::wall_ms)
      .def_readonly("macs", &BenchRecord::macs);
  mod.def("bench_scaling",
          [](const Model& m, int num_segments, const std::vector<std::string>& variants, int n,
             bool parallel, std::uint64_t audio_seed) {
            std::vector<BenchVariant> vs;
            for (const auto& v : variants) vs.push_back(bench_variant_from_name(v));
            return bench_scaling(m, num_segments, vs, n, parallel, audio_seed);
          },
          py::arg("model"), py::arg("num_segments"),
          py::arg("variants") =
              std::vector<std::string>{"full_recompute", "incremental_encoder_only", "fasst"},
          py::arg("n") = 3, py::arg("parallel") = false, py::arg("audio_seed") = 0);
  mod.def("save_bench_csv", &save_bench_csv, py::arg("path"), py::arg("records"));

  py::class_<EquivSummary>(mod, "EquivSummary")
      .def_readonly("cases", &EquivSummary::cases)
      .def_readonly("worst", &EquivSummary::worst);
  mod.def("encoder_equivalence_suite",
          [](std::uint64_t seed, int cases) { return encoder_equivalence_suite<float>(seed, cases); },
          py::arg("seed") = 7, py::arg("cases") = 50);
  mod.def("decoder_equivalence_suite",
          [](std::uint64_t seed, int cases) { return decoder_equivalence_suite<float>(seed, cases); },
          py::arg("seed") = 7, py::arg("cases") = 50);
  mod.def("stage2_equivalence_suite",
          [](std::uint64_t seed) { return stage2_equivalence_suite<float>(seed); },
          py::arg("seed") = 7);
  mod.def("causality_suite", [](std::uint64_t seed) { return causality_suite<float>(seed); },
          py::arg("seed") = 7);
}
