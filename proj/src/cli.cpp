// SPDX-License-Identifier: Apache-2.0

#include "sst/cli.hpp"

#include <cstdint>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sst/bench.hpp"
#include "sst/decoder.hpp"
#include "sst/encoder.hpp"
#include "sst/equiv.hpp"
#include "sst/gradcheck.hpp"
#include "sst/io.hpp"
#include "sst/losses.hpp"
#include "sst/metrics.hpp"
#include "sst/model.hpp"
#include "sst/streaming.hpp"

namespace sst {

namespace {

void print_mask(const Mask& m) {
  for (int r = 0; r < m.rows(); ++r) {
    std::string line(static_cast<std::size_t>(m.cols()), '0');
    for (int c = 0; c < m.cols(); ++c)
      if (m.allowed(r, c)) line[static_cast<std::size_t>(c)] = '1';
    std::cout << line << "\n";
  }
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("invalid-argument: bad ") + what + " entry " + item);
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string("invalid-argument: empty ") + what);
  return out;
}

// "S:2,T:1,S:3" -> interleaved layout.
InterleavedLayout parse_layout(const std::string& text) {
  InterleavedLayout layout;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= item.size())
      throw std::invalid_argument("invalid-argument: layout spans look like S:2 or T:1");
    const char mark = item[0];
    Modality mod;
    if (mark == 'S' || mark == 's')
      mod = Modality::speech;
    else if (mark == 'T' || mark == 't')
      mod = Modality::text;
    else
      throw std::invalid_argument("invalid-argument: layout modality must be S or T");
    layout.spans.push_back({mod, std::stoi(item.substr(colon + 1))});
  }
  if (layout.spans.empty()) throw std::invalid_argument("invalid-argument: empty layout");
  return layout;
}

struct SimulateOptions {
  std::string stream_path;
  std::string policy = "wait_k";
  int k = 1;
  int n = 1;
  double segment_ms = 1000.0;
  int max_tokens = 64;
  std::string clock = "simulated";
  std::string costs_path;
  double cost_rate = 0.001;
  std::string config_path;
  std::string vocab_path;
  std::string weights_prefix;
  std::uint64_t seed = 0;
  int rig_token = -1;
  std::string log_path;
  std::string out_path;
};

Model build_model(const std::string& config_path, const std::string& vocab_path,
                  const std::string& weights_prefix, std::uint64_t seed, int rig_token) {
  ModelConfig cfg = config_path.empty() ? ModelConfig{} : load_model_config(config_path);
  Vocabulary vocab = vocab_path.empty() ? Vocabulary{} : load_vocabulary(vocab_path);
  if (vocab_path.empty()) vocab.size = cfg.vocab_size;
  Model model = Model::random(seed, cfg, vocab);
  if (!weights_prefix.empty()) model.load(weights_prefix);
  if (rig_token >= 0) model.rig_constant_output(rig_token);
  return model;
}

int do_simulate(const SimulateOptions& opt) {
  const StreamData stream = load_stream(opt.stream_path);
  Model model = build_model(opt.config_path, opt.vocab_path, opt.weights_prefix, opt.seed,
                            opt.rig_token);

  PolicyConfig pc;
  pc.kind = opt.policy == "hold_n" ? PolicyKind::hold_n : PolicyKind::wait_k_stride_n;
  pc.k = opt.k;
  pc.n = opt.n;
  pc.segment_ms = opt.segment_ms;
  pc.max_tokens_per_write = opt.max_tokens;

  Clock clock = opt.clock == "real"
                    ? Clock::real()
                    : Clock::simulated(opt.costs_path.empty() ? uniform_cost_table(opt.cost_rate)
                                                              : load_cost_table(opt.costs_path));

  const SessionResult result = pc.kind == PolicyKind::hold_n
                                   ? run_hold_n(model, stream.segments, pc, clock)
                                   : run_wait_k_stride_n(model, stream.segments, pc, clock);

  save_event_log(opt.log_path, result.log);
  if (!opt.out_path.empty()) save_tokens(opt.out_path, result.tokens);

  int words = 0, reads = 0, writes = 0;
  for (const auto& e : result.log.events) {
    if (e.type == Event::Type::read) ++reads;
    else {
      ++writes;
      words += e.words;
    }
  }
  std::cout << "simulate: " << reads << " reads, " << writes << " writes, "
            << result.tokens.size() << " tokens, " << words << " words\n";
  return 0;
}

struct EvalOptions {
  std::string log_path;
  std::string vocab_path;
  std::string reference_path;
  std::string out_path;
};

int do_eval(const EvalOptions& opt) {
  const EventLog log = load_event_log(opt.log_path);
  Vocabulary vocab = opt.vocab_path.empty() ? Vocabulary{} : load_vocabulary(opt.vocab_path);
  DelayProfile profile = delays_from_log(log, vocab);

  std::vector<int> hypothesis;
  int segments = 0;
  for (const auto& e : log.events) {
    if (e.type == Event::Type::read) ++segments;
    else hypothesis.insert(hypothesis.end(), e.tokens.begin(), e.tokens.end());
  }

  double bleu = 0.0;
  if (!opt.reference_path.empty()) {
    const std::vector<int> reference = load_tokens(opt.reference_path);
    profile.ref_len = count_words_total(reference, vocab);
    bleu = bleu_lite(hypothesis, reference);
  }

  MetricsSummary summary;
  summary.bleu_lite = bleu;
  summary.laal_ms = laal(profile, LatencyMode::nca);
  summary.laal_ca_ms = laal(profile, LatencyMode::ca);
  summary.words = profile.hyp_len();
  summary.segments = segments;
  summary.t_ms = profile.t_ms;
  save_metrics(opt.out_path, summary);

  std::cout << "eval: laal_ms=" << summary.laal_ms << " laal_ca_ms=" << summary.laal_ca_ms
            << " bleu_lite=" << summary.bleu_lite << " words=" << summary.words << "\n";
  return 0;
}

struct BenchOptions {
  int segments = 32;
  int n = 3;
  std::string variants = "full_recompute,incremental_encoder_only,fasst";
  bool parallel = false;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;
};

int do_bench(const BenchOptions& opt) {
  const ModelConfig cfg =
      opt.config_path.empty() ? ModelConfig{} : load_model_config(opt.config_path);
  const Model model = Model::random(opt.seed, cfg);

  std::vector<BenchVariant> variants;
  std::stringstream ss(opt.variants);
  std::string item;
  while (std::getline(ss, item, ',')) variants.push_back(bench_variant_from_name(item));

  const auto records = bench_scaling(model, opt.segments, variants, opt.n, opt.parallel, opt.seed);
  save_bench_csv(opt.out_path, records);
  std::cout << "bench: " << records.size() << " records -> " << opt.out_path << "\n";
  return 0;
}

struct MaskOptions {
  bool blockwise = false;
  bool consistency = false;
  bool stage2 = false;
  int len = 0;
  int block = 1;
  std::string layout;
  std::string segments;
  std::string groups;
  int k = 1;
  int n = 1;
};

int do_masks(const MaskOptions& opt) {
  const int chosen = (opt.blockwise ? 1 : 0) + (opt.consistency ? 1 : 0) + (opt.stage2 ? 1 : 0);
  if (chosen != 1)
    throw std::invalid_argument(
        "invalid-argument: choose exactly one of --blockwise, --consistency, --stage2");
  if (opt.blockwise) {
    print_mask(build_blockwise_mask(opt.len, opt.block));
  } else if (opt.consistency) {
    print_mask(build_consistency_mask(parse_layout(opt.layout)));
  } else {
    Stage2MaskSpec spec;
    spec.segment_sizes = parse_int_list(opt.segments, "segment size");
    spec.token_groups = parse_int_list(opt.groups, "token group");
    spec.k = opt.k;
    spec.n = opt.n;
    print_mask(build_stage2_mask(spec));
  }
  return 0;
}

int do_gradcheck(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double tol = 1e-3;

  const Mat<double> ws = detail::uniform_matrix<double>(rng, 4, 8);
  const Mat<double> wt = detail::uniform_matrix<double>(rng, 4, 8);
  const double tau = 0.2;
  const WacoGradients<double> wg = waco_loss_grad(ws, wt, tau);
  const Mat<double> fd_ws = finite_diff_grad<double>(
      [&](const Mat<double>& x) { return waco_loss(x, wt, tau); }, ws);
  const Mat<double> fd_wt = finite_diff_grad<double>(
      [&](const Mat<double>& x) { return waco_loss(ws, x, tau); }, wt);
  const double waco_err =
      std::max(max_relative_error(wg.d_ws, fd_ws), max_relative_error(wg.d_wt, fd_wt));

  Mat<double> logits = detail::uniform_matrix<double>(rng, 5, 7);
  for (auto& v : logits.data()) v *= 3.0;  // spread the softmax a little
  std::vector<int> targets(5);
  for (auto& t : targets) t = static_cast<int>(rng() % 7);
  const CeGradients<double> cg = masked_ce_grad(logits, std::span<const int>(targets));
  const Mat<double> fd_ce = finite_diff_grad<double>(
      [&](const Mat<double>& x) { return masked_ce(x, std::span<const int>(targets)); }, logits);
  const double ce_err = max_relative_error(cg.d_logits, fd_ce);

  std::cout << "gradcheck waco: loss=" << wg.loss << " max_rel_err=" << waco_err << "\n";
  std::cout << "gradcheck masked_ce: loss=" << cg.loss << " max_rel_err=" << ce_err << "\n";
  const bool ok = waco_err <= tol && ce_err <= tol;
  std::cout << (ok ? "gradcheck PASS" : "gradcheck FAIL") << " (tolerance " << tol << ")\n";
  return ok ? 0 : 1;
}

int do_equiv(std::uint64_t seed, int cases) {
  const double tol = 1e-5;
  double worst = 0.0;
  auto report = [&](const char* name, const EquivSummary& s) {
    std::cout << "equiv " << name << ": cases=" << s.cases << " worst=" << s.worst << "\n";
    worst = std::max(worst, s.worst);
  };
  report("encoder float32", encoder_equivalence_suite<float>(seed, cases));
  report("encoder float64", encoder_equivalence_suite<double>(seed, cases));
  report("decoder float32", decoder_equivalence_suite<float>(seed, cases));
  report("decoder float64", decoder_equivalence_suite<double>(seed, cases));
  report("interleave float32", stage2_equivalence_suite<float>(seed));
  report("causality float32", causality_suite<float>(seed));
  const bool ok = worst <= tol;
  std::cout << (ok ? "equiv PASS" : "equiv FAIL") << " (worst " << worst << ", tolerance " << tol
            << ")\n";
  return ok ? 0 : 1;
}

struct LossOptions {
  std::string alignment_path;
  int dim = 16;
  double tau = 0.2;
  std::uint64_t seed = 0;
};

int do_loss(const LossOptions& opt) {
  const std::vector<AlignedWord> words = load_alignment(opt.alignment_path);
  int speech_rows = 0, text_rows = 0;
  std::vector<RowRange> speech_ranges, text_ranges;
  for (const auto& w : words) {
    speech_rows = std::max(speech_rows, w.speech.end);
    text_rows = std::max(text_rows, w.text.end);
    speech_ranges.push_back(w.speech);
    text_ranges.push_back(w.text);
  }

  std::mt19937_64 rng(opt.seed);
  const Mat<double> speech = detail::uniform_matrix<double>(rng, speech_rows, opt.dim);
  const Mat<double> text = detail::uniform_matrix<double>(rng, text_rows, opt.dim);
  const Mat<double> ws = group_words(speech, speech_ranges);
  const Mat<double> wt = group_words(text, text_ranges);
  const double loss = waco_loss(ws, wt, opt.tau);
  std::cout << "waco_loss=" << loss << " words=" << words.size() << " tau=" << opt.tau << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"streamst: recomputation-free simultaneous speech translation engine"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a read/write policy session over a stream");
  c_sim->add_option("--stream", sim.stream_path, "Stream manifest JSON")->required();
  c_sim->add_option("--policy", sim.policy, "Policy: wait_k or hold_n")
      ->check(CLI::IsMember({"wait_k", "hold_n"}));
  c_sim->add_option("--k", sim.k, "Segments read before the first write (wait_k)");
  c_sim->add_option("--n", sim.n, "Words per write (wait_k) / held suffix (hold_n)");
  c_sim->add_option("--segment-ms", sim.segment_ms, "Audio duration charged per segment");
  c_sim->add_option("--max-tokens", sim.max_tokens, "Token cap per write");
  c_sim->add_option("--clock", sim.clock, "Clock mode")
      ->check(CLI::IsMember({"simulated", "real"}));
  c_sim->add_option("--costs", sim.costs_path, "Cost table JSON (simulated clock)");
  c_sim->add_option("--cost-rate", sim.cost_rate,
                    "Uniform ms per mega-MAC when no cost table is given");
  c_sim->add_option("--config", sim.config_path, "Model config JSON");
  c_sim->add_option("--vocab", sim.vocab_path, "Vocabulary JSON");
  c_sim->add_option("--weights", sim.weights_prefix, "Weights path prefix to load");
  c_sim->add_option("--seed", sim.seed, "Weight init seed");
  c_sim->add_option("--rig-token", sim.rig_token, "Pin every decode step to this token id");
  c_sim->add_option("--log", sim.log_path, "Event log output (JSONL)")->required();
  c_sim->add_option("--out", sim.out_path, "Emitted tokens output JSON");

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "Compute latency/quality metrics from an event log");
  c_eval->add_option("--log", ev.log_path, "Event log JSONL")->required();
  c_eval->add_option("--vocab", ev.vocab_path, "Vocabulary JSON");
  c_eval->add_option("--reference", ev.reference_path, "Reference tokens JSON");
  c_eval->add_option("--out", ev.out_path, "Metrics JSON output")->required();

  BenchOptions bench;
  auto* c_bench = app.add_subcommand("bench", "Per-step cost scaling across recompute variants");
  c_bench->add_option("--segments", bench.segments, "Stream length in segments");
  c_bench->add_option("--n", bench.n, "Words per write");
  c_bench->add_option("--variants", bench.variants, "Comma-separated variant names");
  c_bench->add_flag("--parallel", bench.parallel, "One thread per variant");
  c_bench->add_option("--seed", bench.seed, "Model/audio seed");
  c_bench->add_option("--config", bench.config_path, "Model config JSON");
  c_bench->add_option("--out", bench.out_path, "CSV output")->required();

  MaskOptions masks;
  auto* c_masks = app.add_subcommand("masks", "Dump attention masks as 0/1 grids");
  c_masks->add_flag("--blockwise", masks.blockwise, "Blockwise-causal self-attention mask");
  c_masks->add_flag("--consistency", masks.consistency, "Interleaved consistency mask");
  c_masks->add_flag("--stage2", masks.stage2, "Training mask over [speech ++ text]");
  c_masks->add_option("--len", masks.len, "Sequence length (blockwise)");
  c_masks->add_option("--block", masks.block, "Block size (blockwise)");
  c_masks->add_option("--layout", masks.layout, "Spans like S:2,T:1,S:2 (consistency)");
  c_masks->add_option("--segments", masks.segments, "Speech rows per segment, CSV (stage2)");
  c_masks->add_option("--groups", masks.groups, "Word group per text row, CSV (stage2)");
  c_masks->add_option("--k", masks.k, "Wait-k (stage2)");
  c_masks->add_option("--n", masks.n, "Stride-n (stage2)");

  std::uint64_t grad_seed = 0;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference loss gradient oracles");
  c_grad->add_option("--seed", grad_seed, "Probe seed");

  std::uint64_t equiv_seed = 7;
  int equiv_cases = 50;
  auto* c_equiv = app.add_subcommand("equiv", "Incremental-vs-full equivalence suites");
  c_equiv->add_option("--seed", equiv_seed, "Suite seed");
  c_equiv->add_option("--cases", equiv_cases, "Cases per randomized suite");

  LossOptions loss;
  auto* c_loss = app.add_subcommand("loss", "Word-aligned contrastive loss from an alignment");
  c_loss->add_option("--alignment", loss.alignment_path, "Word alignment JSON")->required();
  c_loss->add_option("--dim", loss.dim, "Embedding width for the seeded probe");
  c_loss->add_option("--tau", loss.tau, "Contrastive temperature");
  c_loss->add_option("--seed", loss.seed, "Probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_sim->parsed()) return do_simulate(sim);
    if (c_eval->parsed()) return do_eval(ev);
    if (c_bench->parsed()) return do_bench(bench);
    if (c_masks->parsed()) return do_masks(masks);
    if (c_grad->parsed()) return do_gradcheck(grad_seed);
    if (c_equiv->parsed()) return do_equiv(equiv_seed, equiv_cases);
    if (c_loss->parsed()) return do_loss(loss);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sst
