// SPDX-License-Identifier: Apache-2.0

#include "sst/config.hpp"

#include <stdexcept>

namespace sst {

void ModelConfig::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("invalid-config: ") + msg); };
  if (extractor_kernel1 < 1 || extractor_kernel2 < 1) fail("extractor kernels must be >= 1");
  if (extractor_stride1 < 1 || extractor_stride2 < 1) fail("extractor strides must be >= 1");
  if (d_feat < 1 || d_enc < 1 || d_model < 1) fail("feature widths must be >= 1");
  if (enc_layers < 1 || dec_layers < 1) fail("layer counts must be >= 1");
  if (enc_heads < 1 || d_enc % enc_heads != 0) fail("enc_heads must divide d_enc");
  if (dec_heads < 1 || d_model % dec_heads != 0) fail("dec_heads must divide d_model");
  if (enc_head_dim() % 2 != 0 || dec_head_dim() % 2 != 0) fail("head dims must be even for rotary");
  if (block_size < 1) fail("block_size must be >= 1");
  if (adapter_kernel < 1) fail("adapter_kernel must be >= 1");
  if (enc_ffn < 1 || dec_ffn < 1) fail("ffn widths must be >= 1");
  if (vocab_size < 4) fail("vocab_size must be >= 4");
  if (max_positions < 1) fail("max_positions must be >= 1");
  if (!(rope_base > 0)) fail("rope_base must be positive");
}

void Vocabulary::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("invalid-config: ") + msg); };
  if (size < 4) fail("vocabulary needs at least 4 tokens");
  if (bos < 0 || bos >= size || eos < 0 || eos >= size || word_sep < 0 || word_sep >= size)
    fail("reserved token id out of range");
  if (bos == eos || bos == word_sep || eos == word_sep) fail("reserved token ids must be distinct");
  if (!tokens.empty() && static_cast<int>(tokens.size()) != size)
    fail("token string list must match vocabulary size");
}

int count_word_boundaries(std::span<const int> tokens, const Vocabulary& vocab) {
  int words = 0;
  for (int id : tokens)
    if (vocab.is_word_boundary(id)) ++words;
  return words;
}

int count_words_total(std::span<const int> tokens, const Vocabulary& vocab) {
  int words = 0;
  bool pending = false;
  for (int id : tokens) {
    if (vocab.is_word_boundary(id)) {
      ++words;
      pending = false;
    } else {
      pending = true;
    }
  }
  return words + (pending ? 1 : 0);
}

}  // namespace sst
