// SPDX-License-Identifier: Apache-2.0
//
// Named tensor storage with deterministic initialization and flat-file IO.
//
// Weights live in a single little-endian float32 binary blob ordered by the
// manifest's tensor list.  The JSON manifest records, per tensor, its name,
// shape, and byte offset, so a reader can map names to slices without parsing
// the blob itself.

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sst/matrix.hpp"

namespace sst {

// Seeds derived from tensor names keep initialization independent of
// insertion order: the stream for one tensor never shifts another's.
std::uint64_t fnv1a64(const std::string& text);

// Xavier-style scale sqrt(6 / (fan_in + fan_out)).
double xavier_scale(std::size_t fan_in, std::size_t fan_out);

// Uniform in (-scale, scale), seeded by fnv1a64(name) ^ seed.  Used for all
// weight matrices; biases and norm offsets are zero-filled instead.
template <typename T>
void fill_uniform_deterministic(Mat<T>& m, const std::string& name,
                                std::uint64_t seed, double scale) {
  std::mt19937_64 rng(fnv1a64(name) ^ seed);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      // 53 high bits give a uniform double in [0, 1).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m(i, j) = static_cast<T>((2.0 * u - 1.0) * scale);
    }
}

// (name, tensor) pairs in manifest order.  Pointers must outlive the call.
using TensorList = std::vector<std::pair<std::string, Mat<float>*>>;
using ConstTensorList = std::vector<std::pair<std::string, const Mat<float>*>>;

// Writes <path>.bin (flat f32, list order) and <path>.json (manifest with
// format_version, tensor names, shapes, byte offsets).
void save_tensor_list(const std::string& path_prefix, const ConstTensorList& tensors);

// Reads a manifest/blob pair.  Every listed tensor must be present with a
// matching shape; extra tensors in the file are an error.
void load_tensor_list(const std::string& path_prefix, const TensorList& tensors);

class TensorStore {
 public:
  // Registers a tensor; name must be unique.  Returns a reference valid for
  // the store's lifetime (storage is node-stable).
  Mat<float>& add(const std::string& name, std::size_t rows, std::size_t cols);

  Mat<float>& at(const std::string& name);
  const Mat<float>& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }

  void save(const std::string& path_prefix) const;
  void load(const std::string& path_prefix);

 private:
  std::map<std::string, Mat<float>> tensors_;
  std::vector<std::string> order_;
};

}  // namespace sst
