// SPDX-License-Identifier: Apache-2.0

#include "sst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sst {

DelayProfile delays_from_log(const EventLog& log, const Vocabulary& vocab) {
  validate_log(log);
  DelayProfile p;
  std::vector<int> all_tokens;
  double last_write_nca = 0.0, last_write_ca = 0.0;
  bool any_write = false;

  for (const auto& e : log.events) {
    if (e.type == Event::Type::read) {
      p.t_ms = e.audio_ms;
      continue;
    }
    any_write = true;
    last_write_nca = e.audio_ms;
    last_write_ca = e.t_wall_ms;
    all_tokens.insert(all_tokens.end(), e.tokens.begin(), e.tokens.end());
    const int words = count_word_boundaries(e.tokens, vocab);
    for (int w = 0; w < words; ++w) {
      p.d_nca.push_back(e.audio_ms);
      p.d_ca.push_back(e.t_wall_ms);
    }
  }

  // A trailing unterminated word is still a word; it carries the delays of
  // the write that produced its tokens.
  if (any_write && count_words_total(all_tokens, vocab) > count_word_boundaries(all_tokens, vocab)) {
    p.d_nca.push_back(last_write_nca);
    p.d_ca.push_back(last_write_ca);
  }
  p.ref_len = p.hyp_len();
  return p;
}

double laal(const DelayProfile& profile, LatencyMode mode) {
  if (!(profile.t_ms > 0)) throw std::invalid_argument("invalid-profile: nonpositive duration");
  const int hyp = profile.hyp_len();
  if (hyp < 1) throw std::invalid_argument("invalid-profile: empty hypothesis");
  if (static_cast<int>(profile.d_ca.size()) != hyp)
    throw std::invalid_argument("invalid-profile: delay vectors differ in length");

  const double r = profile.t_ms / static_cast<double>(std::max(hyp, profile.ref_len));
  int tau = hyp;
  for (int i = 0; i < hyp; ++i)
    if (profile.d_nca[i] >= profile.t_ms) {
      tau = i + 1;
      break;
    }
  const std::vector<double>& d = (mode == LatencyMode::ca) ? profile.d_ca : profile.d_nca;
  double sum = 0.0;
  for (int i = 1; i <= tau; ++i) sum += d[i - 1] - static_cast<double>(i - 1) * r;
  return sum / static_cast<double>(tau);
}

namespace {

using Ngram = std::vector<int>;

std::map<Ngram, int> ngram_counts(std::span<const int> tokens, int order) {
  std::map<Ngram, int> counts;
  if (static_cast<int>(tokens.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i)
    counts[Ngram(tokens.begin() + i, tokens.begin() + i + order)] += 1;
  return counts;
}

}  // namespace

double bleu_lite(std::span<const int> hypothesis, std::span<const int> reference, int max_order) {
  if (reference.empty()) throw std::invalid_argument("invalid-reference: empty reference");
  if (max_order < 1) throw std::invalid_argument("invalid-argument: max_order must be >= 1");
  if (hypothesis.empty()) return 0.0;

  double log_sum = 0.0;
  int orders_used = 0;
  for (int order = 1; order <= max_order; ++order) {
    const auto hyp_counts = ngram_counts(hypothesis, order);
    if (hyp_counts.empty()) continue;  // hypothesis shorter than this order
    const auto ref_counts = ngram_counts(reference, order);
    int total = 0, matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    const double p = (matched == 0)
                         ? (matched + 1.0) / (total + 1.0)  // add-1 smoothing
                         : static_cast<double>(matched) / total;
    log_sum += std::log(p);
    ++orders_used;
  }
  if (orders_used == 0) return 0.0;
  const double geo_mean = std::exp(log_sum / orders_used);
  const double bp =
      hypothesis.size() >= reference.size()
          ? 1.0
          : std::exp(1.0 - static_cast<double>(reference.size()) / hypothesis.size());
  return geo_mean * bp;
}

}  // namespace sst
