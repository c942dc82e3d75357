// SPDX-License-Identifier: Apache-2.0

#include "sst/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sst {

template <typename T>
Mat<T> group_words(const Mat<T>& embeddings, const std::vector<RowRange>& ranges) {
  if (ranges.empty()) throw std::invalid_argument("invalid-alignment: no word ranges");
  int prev_end = 0;
  for (const auto& r : ranges) {
    if (r.begin >= r.end) throw std::invalid_argument("invalid-alignment: empty word range");
    if (r.begin < prev_end) throw std::invalid_argument("invalid-alignment: overlapping or unordered ranges");
    if (r.end > embeddings.rows()) throw std::invalid_argument("invalid-alignment: range out of bounds");
    prev_end = r.end;
  }
  Mat<T> out(static_cast<int>(ranges.size()), embeddings.cols());
  for (std::size_t w = 0; w < ranges.size(); ++w) {
    const auto& r = ranges[w];
    for (int j = 0; j < embeddings.cols(); ++j) {
      T acc = T(0);
      for (int i = r.begin; i < r.end; ++i) acc += embeddings(i, j);
      out(static_cast<int>(w), j) = acc / static_cast<T>(r.end - r.begin);
    }
  }
  return out;
}

namespace {

template <typename T>
T row_norm(const Mat<T>& m, int r) {
  T acc = T(0);
  for (int j = 0; j < m.cols(); ++j) acc += m(r, j) * m(r, j);
  return std::sqrt(acc);
}

// Cosine similarity matrix C[i][j] = cos(ws_i, wt_j); norms returned for the
// gradient path.
template <typename T>
Mat<T> cosine_matrix(const Mat<T>& ws, const Mat<T>& wt, std::vector<T>& ns, std::vector<T>& nt) {
  if (ws.rows() != wt.rows() || ws.cols() != wt.cols())
    throw std::invalid_argument("invalid-argument: word embedding shape mismatch");
  if (ws.rows() < 1) throw std::invalid_argument("invalid-argument: need at least one word");
  const int n = ws.rows();
  ns.resize(n);
  nt.resize(n);
  for (int i = 0; i < n; ++i) {
    ns[i] = row_norm(ws, i);
    nt[i] = row_norm(wt, i);
    if (!(ns[i] > T(0)) || !(nt[i] > T(0)))
      throw std::invalid_argument("invalid-input: zero-norm word embedding");
  }
  Mat<T> c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T dot = T(0);
      for (int d = 0; d < ws.cols(); ++d) dot += ws(i, d) * wt(j, d);
      c(i, j) = dot / (ns[i] * nt[j]);
    }
  return c;
}

// Softmax over each row of C/tau, max-subtracted.
template <typename T>
Mat<T> row_softmax_scaled(const Mat<T>& c, T tau) {
  Mat<T> p(c.rows(), c.cols());
  for (int i = 0; i < c.rows(); ++i) {
    T mx = c(i, 0);
    for (int j = 1; j < c.cols(); ++j) mx = std::max(mx, c(i, j));
    T z = T(0);
    for (int j = 0; j < c.cols(); ++j) {
      p(i, j) = std::exp((c(i, j) - mx) / tau);
      z += p(i, j);
    }
    for (int j = 0; j < c.cols(); ++j) p(i, j) /= z;
  }
  return p;
}

}  // namespace

template <typename T>
T waco_loss(const Mat<T>& ws, const Mat<T>& wt, T tau) {
  if (!(tau > T(0))) throw std::invalid_argument("invalid-argument: tau must be positive");
  std::vector<T> ns, nt;
  const Mat<T> c = cosine_matrix(ws, wt, ns, nt);
  const int n = c.rows();
  T loss = T(0);
  for (int i = 0; i < n; ++i) {
    T mx = c(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, c(i, j));
    T z = T(0);
    for (int j = 0; j < n; ++j) z += std::exp((c(i, j) - mx) / tau);
    loss += std::log(z) - (c(i, i) - mx) / tau;
  }
  return loss / static_cast<T>(n);
}

template <typename T>
WacoGradients<T> waco_loss_grad(const Mat<T>& ws, const Mat<T>& wt, T tau) {
  if (!(tau > T(0))) throw std::invalid_argument("invalid-argument: tau must be positive");
  std::vector<T> ns, nt;
  const Mat<T> c = cosine_matrix(ws, wt, ns, nt);
  const int n = c.rows();
  const int d = ws.cols();
  const Mat<T> p = row_softmax_scaled(c, tau);

  WacoGradients<T> out;
  out.loss = waco_loss(ws, wt, tau);
  out.d_ws = Mat<T>::filled(n, d, T(0));
  out.d_wt = Mat<T>::filled(n, d, T(0));

  // dL/dC_ij = (p_ij - [i==j]) / (n * tau); chain through the cosine:
  // d cos(u,v)/du = (v/|v| - cos * u/|u|) / |u|.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const T g = (p(i, j) - (i == j ? T(1) : T(0))) / (static_cast<T>(n) * tau);
      if (g == T(0)) continue;
      for (int e = 0; e < d; ++e) {
        out.d_ws(i, e) += g * (wt(j, e) / nt[j] - c(i, j) * ws(i, e) / ns[i]) / ns[i];
        out.d_wt(j, e) += g * (ws(i, e) / ns[i] - c(i, j) * wt(j, e) / nt[j]) / nt[j];
      }
    }
  }
  return out;
}

Mask build_stage2_mask(const Stage2MaskSpec& spec) {
  if (spec.k < 1) throw std::invalid_argument("invalid-argument: k must be >= 1");
  if (spec.n < 1) throw std::invalid_argument("invalid-argument: n must be >= 1");
  for (std::size_t i = 1; i < spec.token_groups.size(); ++i)
    if (spec.token_groups[i] < spec.token_groups[i - 1])
      throw std::invalid_argument("invalid-argument: token groups must be nondecreasing");

  const int num_segs = static_cast<int>(spec.segment_sizes.size());
  std::vector<int> cum(num_segs + 1, 0);
  for (int s = 0; s < num_segs; ++s) {
    if (spec.segment_sizes[s] < 0)
      throw std::invalid_argument("invalid-argument: negative segment size");
    cum[s + 1] = cum[s] + spec.segment_sizes[s];
  }
  const int s_total = cum[num_segs];
  const int t_total = static_cast<int>(spec.token_groups.size());
  const int total = s_total + t_total;

  Mask m(total, total);
  for (int q = 0; q < s_total; ++q)
    for (int z = 0; z <= q; ++z) m.set(q, z, true);  // speech: causal, speech only
  for (int t = 0; t < t_total; ++t) {
    const int q = s_total + t;
    const int seg_limit = std::min(spec.token_groups[t] + spec.k, num_segs);
    for (int z = 0; z < cum[seg_limit]; ++z) m.set(q, z, true);
    for (int z = 0; z <= t; ++z) m.set(q, s_total + z, true);  // text: causal over text
  }
  return m;
}

std::vector<int> token_groups_for(std::span<const int> tokens, const Vocabulary& vocab, int n) {
  if (n < 1) throw std::invalid_argument("invalid-argument: n must be >= 1");
  std::vector<int> groups;
  groups.reserve(tokens.size() + 1);
  groups.push_back(0);  // BOS row, word 0
  int words_before = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    groups.push_back(words_before / n);
    if (vocab.is_word_boundary(tokens[t])) ++words_before;
  }
  return groups;
}

template <typename T>
T masked_ce(const Mat<T>& logits, std::span<const int> targets) {
  if (static_cast<int>(targets.size()) != logits.rows())
    throw std::invalid_argument("invalid-argument: one target per logit row required");
  if (logits.rows() < 1) throw std::invalid_argument("invalid-argument: empty logits");
  T loss = T(0);
  for (int i = 0; i < logits.rows(); ++i) {
    const int t = targets[i];
    if (t < 0 || t >= logits.cols())
      throw std::invalid_argument("invalid-target: target id outside vocabulary");
    T mx = logits(i, 0);
    for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    T z = T(0);
    for (int j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j) - mx);
    loss += std::log(z) - (logits(i, t) - mx);
  }
  return loss / static_cast<T>(logits.rows());
}

template <typename T>
CeGradients<T> masked_ce_grad(const Mat<T>& logits, std::span<const int> targets) {
  CeGradients<T> out;
  out.loss = masked_ce(logits, targets);
  out.d_logits = Mat<T>(logits.rows(), logits.cols());
  const T inv_n = T(1) / static_cast<T>(logits.rows());
  for (int i = 0; i < logits.rows(); ++i) {
    T mx = logits(i, 0);
    for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    T z = T(0);
    for (int j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j) - mx);
    for (int j = 0; j < logits.cols(); ++j) {
      const T p = std::exp(logits(i, j) - mx) / z;
      out.d_logits(i, j) = (p - (j == targets[i] ? T(1) : T(0))) * inv_n;
    }
  }
  return out;
}

KSampler::KSampler(std::vector<int> candidates, std::uint64_t seed)
    : candidates_(std::move(candidates)), rng_(seed) {
  if (candidates_.empty()) throw std::invalid_argument("invalid-config: empty candidate set");
}

int KSampler::next() {
  // Explicit modulo keeps draws identical across standard library
  // implementations; the bias at 2^64 scale is far below test resolution.
  return candidates_[static_cast<std::size_t>(rng_() % candidates_.size())];
}

int sample_k(const std::vector<int>& candidates, std::uint64_t seed) {
  KSampler s(candidates, seed);
  return s.next();
}

template float waco_loss<float>(const Mat<float>&, const Mat<float>&, float);
template double waco_loss<double>(const Mat<double>&, const Mat<double>&, double);
template WacoGradients<float> waco_loss_grad<float>(const Mat<float>&, const Mat<float>&, float);
template WacoGradients<double> waco_loss_grad<double>(const Mat<double>&, const Mat<double>&, double);
template Mat<float> group_words<float>(const Mat<float>&, const std::vector<RowRange>&);
template Mat<double> group_words<double>(const Mat<double>&, const std::vector<RowRange>&);
template float masked_ce<float>(const Mat<float>&, std::span<const int>);
template double masked_ce<double>(const Mat<double>&, std::span<const int>);
template CeGradients<float> masked_ce_grad<float>(const Mat<float>&, std::span<const int>);
template CeGradients<double> masked_ce_grad<double>(const Mat<double>&, std::span<const int>);

}  // namespace sst
