// SPDX-License-Identifier: Apache-2.0
//
// Speech side of the pipeline: causal feature extraction from raw samples,
// the blockwise-causal encoder in full and incremental forms, and the
// length-compressing adapter that maps encoder states into the decoder
// embedding space.
//
// The incremental forms are exact, not approximate.  A frame inside block g
// attends the same key rows whether the sequence arrived at once or one
// block at a time, and both paths evaluate the same row-independent
// arithmetic, so full and streamed runs agree bitwise.

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sst/macs.hpp"
#include "sst/matrix.hpp"
#include "sst/model.hpp"

namespace sst {

// Causal 1-D convolution over rows [row_begin, row_end) of the output.
// Output row j reads input rows  s*j + s-1 - (w-1-m)  for tap m; rows before
// the start of the stream are zero, so tap w-1 always lands on the newest
// input row a stride step covers.  Output length is floor(input_rows / s).
template <typename T>
Mat<T> causal_conv1d_rows(const Mat<T>& x, const ConvT<T>& conv, int row_begin, int row_end) {
  if (x.rows() < 1)
    throw std::invalid_argument("invalid-argument: convolution needs a nonempty input");
  if (x.cols() != conv.in_ch)
    throw std::invalid_argument("invalid-argument: convolution input channel mismatch");
  const int out_rows_total = x.rows() / conv.stride;
  if (row_begin < 0 || row_end < row_begin || row_end > out_rows_total)
    throw std::out_of_range("out-of-range: convolution output row range");

  Mat<T> out(row_end - row_begin, conv.out_ch);
  for (int j = row_begin; j < row_end; ++j) {
    const int rightmost = j * conv.stride + conv.stride - 1;
    T* dst = out.row(j - row_begin).data();
    for (int o = 0; o < conv.out_ch; ++o) dst[o] = conv.bias(0, o);
    for (int m = 0; m < conv.width; ++m) {
      const int src = rightmost - (conv.width - 1 - m);
      if (src < 0) continue;  // zero history before the stream start
      for (int c = 0; c < conv.in_ch; ++c) {
        const T xv = x(src, c);
        const T* krow = conv.kernel.row(m * conv.in_ch + c).data();
        for (int o = 0; o < conv.out_ch; ++o) dst[o] += xv * krow[o];
      }
    }
  }
  macs::add(static_cast<std::uint64_t>(row_end - row_begin) * conv.width * conv.in_ch *
            conv.out_ch);
  return out;
}

template <typename T>
Mat<T> causal_conv1d(const Mat<T>& x, const ConvT<T>& conv) {
  return causal_conv1d_rows(x, conv, 0, x.rows() / conv.stride);
}

// Full feature extraction: two causal convolutions with GELU, total stride 16.
template <typename T>
Mat<T> extract_all(std::span<const T> samples, const ModelT<T>& model) {
  Mat<T> x(static_cast<int>(samples.size()), 1);
  for (int i = 0; i < x.rows(); ++i) x(i, 0) = samples[static_cast<std::size_t>(i)];
  Mat<T> h = causal_conv1d(x, model.ex_conv1);
  gelu_inplace(h);
  Mat<T> f = causal_conv1d(h, model.ex_conv2);
  gelu_inplace(f);
  return f;
}

// Incremental feature extraction.  Keeps the raw-sample and first-stage
// histories so each push computes only the output rows that became available,
// reproducing extract_all on the concatenated stream bitwise.
template <typename T>
class ExtractorStreamT {
 public:
  explicit ExtractorStreamT(const ModelT<T>& model)
      : model_(&model), conv1_frames_(0, model.cfg.d_feat) {}

  // Pushes exactly one segment of raw samples and returns the newly
  // available feature frames (block_size rows per segment).
  Mat<T> push_segment(std::span<const T> samples) {
    const int expected = model_->cfg.samples_per_segment();
    if (static_cast<int>(samples.size()) != expected)
      throw std::invalid_argument("invalid-segment: expected " + std::to_string(expected) +
                                  " samples per segment, got " +
                                  std::to_string(samples.size()));
    samples_.insert(samples_.end(), samples.begin(), samples.end());

    Mat<T> x(static_cast<int>(samples_.size()), 1);
    for (int i = 0; i < x.rows(); ++i) x(i, 0) = samples_[static_cast<std::size_t>(i)];
    const int conv1_total = x.rows() / model_->cfg.extractor_stride1;
    Mat<T> h = causal_conv1d_rows(x, model_->ex_conv1, conv1_frames_.rows(), conv1_total);
    gelu_inplace(h);
    conv1_frames_.append_rows(h);

    const int frames_total = conv1_frames_.rows() / model_->cfg.extractor_stride2;
    Mat<T> f = causal_conv1d_rows(conv1_frames_, model_->ex_conv2, frames_done_, frames_total);
    gelu_inplace(f);
    frames_done_ = frames_total;
    return f;
  }

  int frames_produced() const { return frames_done_; }

 private:
  const ModelT<T>* model_;
  std::vector<T> samples_;
  Mat<T> conv1_frames_;  // first-stage outputs after GELU
  int frames_done_ = 0;
};

using ExtractorStream = ExtractorStreamT<float>;

// Frame j_Q may attend frame j_K iff floor(j_Q / block) >= floor(j_K / block):
// causal at block granularity, bidirectional inside a block.
inline Mask build_blockwise_mask(int len, int block) {
  if (len < 0 || block < 1)
    throw std::invalid_argument("invalid-argument: mask needs len >= 0 and block >= 1");
  Mask m(len, len);
  for (int q = 0; q < len; ++q)
    for (int k = 0; k < len; ++k) m.set(q, k, q / block >= k / block);
  return m;
}

// Per-layer key/value rows accumulated block by block.
template <typename T>
struct EncoderCacheT {
  std::vector<Mat<T>> k, v;  // one entry per encoder layer
  int blocks_processed = 0;
  int block_size = 0;
};

using EncoderCache = EncoderCacheT<float>;

// Full-sequence encoder: input projection, rotary positions at absolute frame
// indices, pre-norm layers under the blockwise-causal mask, final norm.
template <typename T>
Mat<T> encode_full(const Mat<T>& frames, const ModelT<T>& model) {
  if (frames.rows() % model.cfg.block_size != 0)
    throw std::invalid_argument(
        "invalid-length: encoder input must be a whole number of blocks");
  Mat<T> x = dense(frames, model.enc_in);
  std::vector<int> pos(static_cast<std::size_t>(x.rows()));
  for (int i = 0; i < x.rows(); ++i) pos[static_cast<std::size_t>(i)] = i;
  const Mask mask = build_blockwise_mask(x.rows(), model.cfg.block_size);
  for (const auto& layer : model.encoder)
    x = transformer_block(x, layer, mask, model.cfg.enc_heads, pos, model.enc_rope);
  return layer_norm(x, model.enc_final);
}

// Incremental encoder step: processes exactly one block of feature frames
// against the cached key/value history.  Inside a step the new block's rows
// may attend every cached row plus each other, which is exactly the
// blockwise-causal rule restricted to the new query rows.
template <typename T>
Mat<T> encode_segment(EncoderCacheT<T>& cache, const Mat<T>& frames_block,
                      const ModelT<T>& model) {
  const int b = model.cfg.block_size;
  if (frames_block.rows() != b)
    throw std::invalid_argument("invalid-block: encoder step needs exactly one block of frames");
  if (cache.k.empty()) {
    cache.k.resize(model.encoder.size());
    cache.v.resize(model.encoder.size());
    cache.block_size = b;
  }

  const int history = cache.blocks_processed * b;
  Mat<T> x = dense(frames_block, model.enc_in);
  std::vector<int> pos(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) pos[static_cast<std::size_t>(i)] = history + i;
  const Mask mask(b, history + b, true);  // all cached rows are visible

  for (std::size_t li = 0; li < model.encoder.size(); ++li) {
    BlockKvT<T> kv;
    if (cache.k[li].rows() > 0) {
      kv.k = &cache.k[li];
      kv.v = &cache.v[li];
    }
    Mat<T> k_new, v_new;
    x = transformer_block(x, model.encoder[li], mask, model.cfg.enc_heads, pos, model.enc_rope,
                          kv, &k_new, &v_new);
    if (cache.k[li].rows() == 0) {
      cache.k[li] = std::move(k_new);
      cache.v[li] = std::move(v_new);
    } else {
      cache.k[li].append_rows(k_new);
      cache.v[li].append_rows(v_new);
    }
  }
  ++cache.blocks_processed;
  return layer_norm(x, model.enc_final);
}

// Two causal stride-2 convolutions halve the length twice.
inline int adapter_output_len(int encoder_len) { return encoder_len / 2 / 2; }

// Adapter: two causal stride-2 convolutions with GELU, then a linear map into
// the decoder embedding space.  Convolutions run over the full encoder state
// history (they are causal, so old outputs never change) and only the rows
// past prev_emb_count are returned.
template <typename T>
Mat<T> adapt(const Mat<T>& all_states, int prev_emb_count, const ModelT<T>& model) {
  const int total = adapter_output_len(all_states.rows());
  if (prev_emb_count < 0 || prev_emb_count > total)
    throw std::out_of_range("out-of-range: adapter embedding count");
  if (total == prev_emb_count) return Mat<T>(0, model.cfg.d_model);

  Mat<T> h = causal_conv1d(all_states, model.ad_conv1);
  gelu_inplace(h);
  Mat<T> h2 = causal_conv1d(h, model.ad_conv2);
  gelu_inplace(h2);
  Mat<T> tail = h2.slice_rows(prev_emb_count, total);
  return dense(tail, model.ad_proj);
}

// Speech embeddings with the segment boundaries that produced them;
// segment_boundaries[i] is the embedding count after segment i.
template <typename T>
struct SpeechEmbeddingsT {
  Mat<T> matrix;
  std::vector<int> segment_boundaries;
};

using SpeechEmbeddings = SpeechEmbeddingsT<float>;

}  // namespace sst
