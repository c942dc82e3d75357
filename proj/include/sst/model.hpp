// SPDX-License-Identifier: Apache-2.0
//
// Toy speech-translation model: weight containers plus the shared forward
// primitives (dense, layer norm, GELU, pre-norm transformer block).
//
// Everything is templated on the scalar type: float is the working
// precision, double is the test mode the strictest equivalence and gradient
// suites run in.  The same block code serves full-sequence and incremental
// paths; incremental callers differ only in which query rows they compute
// and which cached key/value rows they attend over.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sst/attention.hpp"
#include "sst/config.hpp"
#include "sst/matrix.hpp"
#include "sst/rotary.hpp"
#include "sst/weights.hpp"

namespace sst {

template <typename T>
struct DenseT {
  Mat<T> w;  // (in, out)
  Mat<T> b;  // (1, out)
};

template <typename T>
struct NormT {
  Mat<T> gamma;  // (1, d)
  Mat<T> beta;   // (1, d)
};

// Kernel layout (width * in_ch, out_ch); row m * in_ch + c holds tap m for
// input channel c.  Tap width-1 is the newest input column.
template <typename T>
struct ConvT {
  Mat<T> kernel;
  Mat<T> bias;  // (1, out_ch)
  int width = 1;
  int stride = 1;
  int in_ch = 1;
  int out_ch = 1;
};

template <typename T>
struct TransformerLayerT {
  NormT<T> ln1;
  DenseT<T> wq, wk, wv, wo;
  NormT<T> ln2;
  DenseT<T> ffn1, ffn2;
};

namespace detail {

template <typename T>
DenseT<T> make_dense(int in, int out) {
  return DenseT<T>{Mat<T>::filled(in, out, T(0)), Mat<T>::filled(1, out, T(0))};
}

template <typename T>
NormT<T> make_norm(int d) {
  return NormT<T>{Mat<T>::filled(1, d, T(1)), Mat<T>::filled(1, d, T(0))};
}

template <typename T>
ConvT<T> make_conv(int width, int stride, int in_ch, int out_ch) {
  ConvT<T> c;
  c.kernel = Mat<T>::filled(width * in_ch, out_ch, T(0));
  c.bias = Mat<T>::filled(1, out_ch, T(0));
  c.width = width;
  c.stride = stride;
  c.in_ch = in_ch;
  c.out_ch = out_ch;
  return c;
}

template <typename T>
TransformerLayerT<T> make_layer(int d, int ffn) {
  TransformerLayerT<T> l;
  l.ln1 = make_norm<T>(d);
  l.wq = make_dense<T>(d, d);
  l.wk = make_dense<T>(d, d);
  l.wv = make_dense<T>(d, d);
  l.wo = make_dense<T>(d, d);
  l.ln2 = make_norm<T>(d);
  l.ffn1 = make_dense<T>(d, ffn);
  l.ffn2 = make_dense<T>(ffn, d);
  return l;
}

}  // namespace detail

template <typename T>
using TensorListT = std::vector<std::pair<std::string, Mat<T>*>>;
template <typename T>
using ConstTensorListT = std::vector<std::pair<std::string, const Mat<T>*>>;

template <typename T>
struct ModelT {
  ModelConfig cfg;
  Vocabulary vocab;

  ConvT<T> ex_conv1, ex_conv2;                // raw samples -> features
  DenseT<T> enc_in;                           // d_feat -> d_enc
  std::vector<TransformerLayerT<T>> encoder;  // pre-norm, blockwise-causal
  NormT<T> enc_final;
  ConvT<T> ad_conv1, ad_conv2;                // causal stride-2 downsampling
  DenseT<T> ad_proj;                          // d_enc -> d_model
  Mat<T> embedding;                           // (vocab, d_model)
  std::vector<TransformerLayerT<T>> decoder;  // pre-norm, consistency-masked
  NormT<T> dec_final;
  DenseT<T> out_proj;                         // d_model -> vocab, biased

  RotaryTable<T> enc_rope;
  RotaryTable<T> dec_rope;

  explicit ModelT(const ModelConfig& config = ModelConfig{},
                  const Vocabulary& vocabulary = Vocabulary{})
      : cfg(config),
        vocab(vocabulary),
        enc_rope(config.max_positions, config.enc_head_dim(), config.rope_base),
        dec_rope(config.max_positions, config.dec_head_dim(), config.rope_base) {
    cfg.validate();
    vocab.validate();
    if (vocab.size != cfg.vocab_size)
      throw std::invalid_argument("invalid-config: vocabulary size does not match model config");

    ex_conv1 = detail::make_conv<T>(cfg.extractor_kernel1, cfg.extractor_stride1, 1, cfg.d_feat);
    ex_conv2 =
        detail::make_conv<T>(cfg.extractor_kernel2, cfg.extractor_stride2, cfg.d_feat, cfg.d_feat);
    enc_in = detail::make_dense<T>(cfg.d_feat, cfg.d_enc);
    for (int i = 0; i < cfg.enc_layers; ++i)
      encoder.push_back(detail::make_layer<T>(cfg.d_enc, cfg.enc_ffn));
    enc_final = detail::make_norm<T>(cfg.d_enc);
    ad_conv1 = detail::make_conv<T>(cfg.adapter_kernel, 2, cfg.d_enc, cfg.d_enc);
    ad_conv2 = detail::make_conv<T>(cfg.adapter_kernel, 2, cfg.d_enc, cfg.d_enc);
    ad_proj = detail::make_dense<T>(cfg.d_enc, cfg.d_model);
    embedding = Mat<T>::filled(cfg.vocab_size, cfg.d_model, T(0));
    for (int i = 0; i < cfg.dec_layers; ++i)
      decoder.push_back(detail::make_layer<T>(cfg.d_model, cfg.dec_ffn));
    dec_final = detail::make_norm<T>(cfg.d_model);
    out_proj = detail::make_dense<T>(cfg.d_model, cfg.vocab_size);
  }

  // Deterministic initialization: weights uniform at Xavier scale from a
  // per-tensor seeded stream, biases and norm shifts zero, norm gains one.
  static ModelT random(std::uint64_t seed, const ModelConfig& config = ModelConfig{},
                       const Vocabulary& vocabulary = Vocabulary{}) {
    ModelT m(config, vocabulary);
    for (auto& [name, tensor] : m.tensor_list()) {
      const bool is_weight =
          name.ends_with(".w") || name.ends_with(".kernel") || name.ends_with(".embedding");
      if (!is_weight) continue;  // biases stay 0, norm gains stay 1 / shifts 0
      fill_uniform_deterministic(*tensor, name, seed,
                                 xavier_scale(tensor->rows(), tensor->cols()));
    }
    return m;
  }

  // Forces every decoding step to emit token_id: output projection weights
  // go to zero and the bias becomes a one-hot on token_id.
  void rig_constant_output(int token_id) {
    if (token_id < 0 || token_id >= cfg.vocab_size)
      throw std::out_of_range("out-of-range: rig token id outside vocabulary");
    for (int i = 0; i < out_proj.w.rows(); ++i)
      for (int j = 0; j < out_proj.w.cols(); ++j) out_proj.w(i, j) = T(0);
    for (int j = 0; j < out_proj.b.cols(); ++j) out_proj.b(0, j) = T(0);
    out_proj.b(0, token_id) = T(1);
  }

  TensorListT<T> tensor_list() { return enumerate_tensors<TensorListT<T>>(*this); }
  ConstTensorListT<T> tensor_list() const {
    return enumerate_tensors<ConstTensorListT<T>>(*this);
  }

  // Flat-file weight IO is defined for the float working precision only.
  void save(const std::string& path_prefix) const {
    save_tensor_list(path_prefix, tensor_list());
  }
  void load(const std::string& path_prefix) { load_tensor_list(path_prefix, tensor_list()); }

 private:
  // Enumerates every tensor with a stable name; shared by both const
  // overloads.
  template <typename List, typename ModelRef>
  static List enumerate_tensors(ModelRef& m) {
    List list;
    auto add_dense = [&](const std::string& p, auto& d) {
      list.emplace_back(p + ".w", &d.w);
      list.emplace_back(p + ".b", &d.b);
    };
    auto add_norm = [&](const std::string& p, auto& n) {
      list.emplace_back(p + ".gamma", &n.gamma);
      list.emplace_back(p + ".beta", &n.beta);
    };
    auto add_conv = [&](const std::string& p, auto& c) {
      list.emplace_back(p + ".kernel", &c.kernel);
      list.emplace_back(p + ".bias", &c.bias);
    };
    auto add_layer = [&](const std::string& p, auto& l) {
      add_norm(p + ".ln1", l.ln1);
      add_dense(p + ".wq", l.wq);
      add_dense(p + ".wk", l.wk);
      add_dense(p + ".wv", l.wv);
      add_dense(p + ".wo", l.wo);
      add_norm(p + ".ln2", l.ln2);
      add_dense(p + ".ffn1", l.ffn1);
      add_dense(p + ".ffn2", l.ffn2);
    };

    add_conv("extractor.conv1", m.ex_conv1);
    add_conv("extractor.conv2", m.ex_conv2);
    add_dense("encoder.input", m.enc_in);
    for (std::size_t i = 0; i < m.encoder.size(); ++i)
      add_layer("encoder.layer" + std::to_string(i), m.encoder[i]);
    add_norm("encoder.final", m.enc_final);
    add_conv("adapter.conv1", m.ad_conv1);
    add_conv("adapter.conv2", m.ad_conv2);
    add_dense("adapter.proj", m.ad_proj);
    list.emplace_back("decoder.embedding", &m.embedding);
    for (std::size_t i = 0; i < m.decoder.size(); ++i)
      add_layer("decoder.layer" + std::to_string(i), m.decoder[i]);
    add_norm("decoder.final", m.dec_final);
    add_dense("decoder.out", m.out_proj);
    return list;
  }
};

using Model = ModelT<float>;

// y = x W + b, one bias row broadcast over all rows.
template <typename T>
Mat<T> dense(const Mat<T>& x, const DenseT<T>& d) {
  return linear(x, d.w, std::span<const T>(d.b.row(0)));
}

// Row-wise layer norm with epsilon 1e-5, then gain/shift.
template <typename T>
Mat<T> layer_norm(const Mat<T>& x, const NormT<T>& n) {
  if (x.cols() != n.gamma.cols())
    throw std::invalid_argument("invalid-argument: layer norm width mismatch");
  const T eps = static_cast<T>(1e-5);
  Mat<T> out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    T mean = T(0);
    for (int j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= static_cast<T>(x.cols());
    T var = T(0);
    for (int j = 0; j < x.cols(); ++j) {
      const T d = x(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<T>(x.cols());
    const T inv = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < x.cols(); ++j)
      out(i, j) = (x(i, j) - mean) * inv * n.gamma(0, j) + n.beta(0, j);
  }
  return out;
}

// Exact GELU: 0.5 x (1 + erf(x / sqrt 2)).
template <typename T>
void gelu_inplace(Mat<T>& x) {
  const T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      const T v = x(i, j);
      x(i, j) = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
    }
}

// Cached post-rope key/value rows for the positions before x.
template <typename T>
struct BlockKvT {
  const Mat<T>* k = nullptr;
  const Mat<T>* v = nullptr;
};

// Pre-norm self-attention + FFN over query rows x at rotary positions pos_q.
// Keys/values are kv's cached rows followed by x's own projected rows, so the
// mask must have kv.rows + x.rows columns (x.rows when kv is empty).  Because
// every step is row-independent, computing a row here or as part of a larger
// batch gives bitwise-identical results; that is what makes the incremental
// paths exact.  k_out/v_out, when non-null, receive x's post-rope K and V
// rows for the caller's cache.
template <typename T>
Mat<T> transformer_block(const Mat<T>& x, const TransformerLayerT<T>& layer, const Mask& mask,
                         int heads, const std::vector<int>& pos_q, const RotaryTable<T>& rope,
                         const BlockKvT<T>& kv = BlockKvT<T>{}, Mat<T>* k_out = nullptr,
                         Mat<T>* v_out = nullptr) {
  if (static_cast<int>(pos_q.size()) != x.rows())
    throw std::invalid_argument("invalid-argument: one rotary position per query row required");

  Mat<T> h = layer_norm(x, layer.ln1);
  Mat<T> q = dense(h, layer.wq);
  Mat<T> k_new = dense(h, layer.wk);
  Mat<T> v_new = dense(h, layer.wv);
  rope_rows_inplace(q, pos_q, rope);
  rope_rows_inplace(k_new, pos_q, rope);

  Mat<T> attn;
  if (kv.k != nullptr && kv.k->rows() > 0) {
    Mat<T> k_all = *kv.k;
    Mat<T> v_all = *kv.v;
    k_all.append_rows(k_new);
    v_all.append_rows(v_new);
    attn = multi_head_attention(q, k_all, v_all, mask, heads);
  } else {
    attn = multi_head_attention(q, k_new, v_new, mask, heads);
  }

  Mat<T> y = x;
  Mat<T> proj = dense(attn, layer.wo);
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j) y(i, j) += proj(i, j);

  Mat<T> h2 = layer_norm(y, layer.ln2);
  Mat<T> f = dense(h2, layer.ffn1);
  gelu_inplace(f);
  Mat<T> f2 = dense(f, layer.ffn2);
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j) y(i, j) += f2(i, j);

  if (k_out != nullptr) *k_out = std::move(k_new);
  if (v_out != nullptr) *v_out = std::move(v_new);
  return y;
}

}  // namespace sst
