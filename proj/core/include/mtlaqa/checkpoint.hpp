#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <torch/nn/module.h>
#include <torch/types.h>

namespace mtlaqa {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// Single-file container: a UTF-8 JSON metadata block followed by named
/// tensors stored as raw little-endian bytes.
///
///   "MTLAQACK" u32 version
///   u64 metadata_len, metadata bytes
///   u64 tensor_count
///   per tensor: u32 name_len, name, u8 dtype (0 f32, 1 f64, 2 i64),
///               u32 ndim, i64 dims[ndim], u64 nbytes, data
struct TensorFile {
  std::string metadata;
  NamedTensors tensors;
};

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file);
/// Throws ValidationError naming the path when it is missing or malformed.
TensorFile read_tensor_file(const std::filesystem::path& path);

/// Parameters followed by buffers, keyed by their dotted module path.
NamedTensors state_tensors(const torch::nn::Module& module);

struct StateDiff {
  std::vector<std::string> missing;     // expected by the module, absent from the source
  std::vector<std::string> unexpected;  // present in the source only
  std::vector<std::string> shape_mismatch;

  [[nodiscard]] bool empty() const {
    return missing.empty() && unexpected.empty() && shape_mismatch.empty();
  }
  [[nodiscard]] std::string describe() const;
};

StateDiff diff_state(const torch::nn::Module& module, const NamedTensors& source);

/// Copies every tensor into the module. Any difference throws ValidationError
/// carrying the diff report.
void load_state(torch::nn::Module& module, const NamedTensors& source);

/// FNV-1a 64 over the bytes, as 16 hex digits.
std::string fingerprint(std::string_view canonical);

}  // namespace mtlaqa
