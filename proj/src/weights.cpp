// SPDX-License-Identifier: Apache-2.0

#include "sst/weights.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace sst {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts need byte swaps");

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double xavier_scale(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void save_tensor_list(const std::string& path_prefix, const ConstTensorList& tensors) {
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["dtype"] = "float32";
  auto& list = manifest["tensors"] = nlohmann::json::array();

  std::ofstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("invalid-argument: cannot open " + path_prefix + ".bin for writing");
  std::uint64_t offset = 0;
  for (const auto& [name, m] : tensors) {
    list.push_back({{"name", name},
                    {"shape", {m->rows(), m->cols()}},
                    {"offset", offset}});
    const std::uint64_t bytes = static_cast<std::uint64_t>(m->rows()) * m->cols() * sizeof(float);
    bin.write(reinterpret_cast<const char*>(m->data().data()),
              static_cast<std::streamsize>(bytes));
    offset += bytes;
  }
  if (!bin) throw std::runtime_error("numeric-failure: short write to " + path_prefix + ".bin");

  std::ofstream js(path_prefix + ".json");
  if (!js) throw std::runtime_error("invalid-argument: cannot open " + path_prefix + ".json for writing");
  js << manifest.dump(2) << "\n";
}

void load_tensor_list(const std::string& path_prefix, const TensorList& tensors) {
  std::ifstream js(path_prefix + ".json");
  if (!js) throw std::runtime_error("invalid-argument: cannot open " + path_prefix + ".json");
  nlohmann::json manifest = nlohmann::json::parse(js);
  if (manifest.value("format_version", 0) != 1)
    throw std::invalid_argument("invalid-config: unsupported weight manifest format_version");

  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("invalid-argument: cannot open " + path_prefix + ".bin");

  std::map<std::string, Mat<float>*> wanted;
  for (const auto& [name, m] : tensors)
    if (!wanted.emplace(name, m).second)
      throw std::invalid_argument("invalid-config: duplicate tensor name " + name);

  std::size_t seen = 0;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    auto it = wanted.find(name);
    if (it == wanted.end())
      throw std::invalid_argument("invalid-config: unexpected tensor in weight file: " + name);
    Mat<float>& m = *it->second;
    const auto shape = entry.at("shape");
    if (shape.size() != 2 || shape[0].get<int>() != m.rows() || shape[1].get<int>() != m.cols())
      throw std::invalid_argument("invalid-config: shape mismatch for tensor " + name);
    bin.seekg(static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    bin.read(reinterpret_cast<char*>(m.data().data()),
             static_cast<std::streamsize>(static_cast<std::uint64_t>(m.rows()) * m.cols() *
                                          sizeof(float)));
    if (!bin) throw std::runtime_error("numeric-failure: short read for tensor " + name);
    m.check_finite(name.c_str());
    ++seen;
  }
  if (seen != wanted.size())
    throw std::invalid_argument("invalid-config: weight file is missing tensors");
}

Mat<float>& TensorStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  auto [it, inserted] = tensors_.emplace(name, Mat<float>::filled(rows, cols, 0.0f));
  if (!inserted) throw std::invalid_argument("invalid-config: duplicate tensor name " + name);
  order_.push_back(name);
  return it->second;
}

Mat<float>& TensorStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("out-of-range: unknown tensor " + name);
  return it->second;
}

const Mat<float>& TensorStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("out-of-range: unknown tensor " + name);
  return it->second;
}

bool TensorStore::contains(const std::string& name) const { return tensors_.count(name) != 0; }

void TensorStore::save(const std::string& path_prefix) const {
  ConstTensorList list;
  for (const auto& name : order_) list.emplace_back(name, &tensors_.at(name));
  save_tensor_list(path_prefix, list);
}

void TensorStore::load(const std::string& path_prefix) {
  TensorList list;
  for (const auto& name : order_) list.emplace_back(name, &tensors_.at(name));
  load_tensor_list(path_prefix, list);
}

}  // namespace sst
