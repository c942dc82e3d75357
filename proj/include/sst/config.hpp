// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

namespace sst {

// All model dimensions and hyperparameters. Defaults are the toy scale the
// test suites run at: two-layer encoder/decoder, four heads, block size 8.
struct ModelConfig {
  // causal convolutional feature extractor (waveform -> frames)
  int extractor_kernel1 = 8;
  int extractor_stride1 = 4;
  int extractor_kernel2 = 4;
  int extractor_stride2 = 4;
  int d_feat = 32;

  // blockwise-causal transformer encoder
  int d_enc = 64;
  int enc_layers = 2;
  int enc_heads = 4;
  int enc_ffn = 256;
  int block_size = 8;  // encoder states per speech segment

  // adapter: two causal stride-2 convs (kernel 3) + projection to d_model
  int adapter_kernel = 3;

  // decoder
  int d_model = 64;
  int dec_layers = 2;
  int dec_heads = 4;
  int dec_ffn = 256;
  int vocab_size = 32;

  double rope_base = 10000.0;
  int max_positions = 4096;

  int extractor_stride() const { return extractor_stride1 * extractor_stride2; }
  int samples_per_segment() const { return block_size * extractor_stride(); }
  int enc_head_dim() const { return d_enc / enc_heads; }
  int dec_head_dim() const { return d_model / dec_heads; }

  void validate() const;  // throws invalid-config
};

// Token inventory with the reserved ids the policies depend on. A word is
// terminated by WORD_SEP or EOS; every boundary token completes a word.
// single_token_words turns every token into its own word (the test
// vocabulary that makes stride counting exact).
struct Vocabulary {
  int size = 32;
  int bos = 0;
  int eos = 1;
  int word_sep = 2;
  bool single_token_words = false;
  std::vector<std::string> tokens;  // optional display strings

  bool is_word_boundary(int id) const {
    return single_token_words || id == eos || id == word_sep;
  }
  void validate() const;  // throws invalid-config
};

// Completed words in a token stream: one per boundary token.
int count_word_boundaries(std::span<const int> tokens, const Vocabulary& vocab);

// Word count of a reference: boundaries plus a trailing unterminated word.
int count_words_total(std::span<const int> tokens, const Vocabulary& vocab);

}  // namespace sst
