#include "mtlaqa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <torch/torch.h>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'M', 'T', 'L', 'A', 'Q', 'A', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("truncated checkpoint: " + path.string());
  return value;
}

std::uint8_t dtype_code(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat: return 0;
    case torch::kDouble: return 1;
    case torch::kLong: return 2;
    default: throw ValidationError("checkpoint: unsupported tensor dtype");
  }
}

torch::ScalarType dtype_from_code(std::uint8_t c, const std::filesystem::path& path) {
  switch (c) {
    case 0: return torch::kFloat;
    case 1: return torch::kDouble;
    case 2: return torch::kLong;
    default: throw ValidationError("checkpoint: unknown dtype code in " + path.string());
  }
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, file.metadata.size());
    out.write(file.metadata.data(), static_cast<std::streamsize>(file.metadata.size()));
    put<std::uint64_t>(out, file.tensors.size());
    for (const auto& [name, tensor] : file.tensors) {
      const auto t = tensor.detach().to(torch::kCPU).contiguous();
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint8_t>(out, dtype_code(t.scalar_type()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
      for (auto d : t.sizes()) put<std::int64_t>(out, d);
      const auto nbytes = static_cast<std::uint64_t>(t.numel()) * t.element_size();
      put<std::uint64_t>(out, nbytes);
      out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
    }
    if (!out) throw RuntimeFailure("write failed for checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("checkpoint not found: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("not an mtlaqa checkpoint: " + path.string());
  }
  if (get<std::uint32_t>(in, path) != kVersion) {
    throw ValidationError("unsupported checkpoint version: " + path.string());
  }
  TensorFile file;
  file.metadata.resize(get<std::uint64_t>(in, path));
  in.read(file.metadata.data(), static_cast<std::streamsize>(file.metadata.size()));
  const auto count = get<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in, path), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto dtype = dtype_from_code(get<std::uint8_t>(in, path), path);
    std::vector<std::int64_t> dims(get<std::uint32_t>(in, path));
    for (auto& d : dims) d = get<std::int64_t>(in, path);
    const auto nbytes = get<std::uint64_t>(in, path);
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (nbytes != static_cast<std::uint64_t>(t.numel()) * t.element_size()) {
      throw ValidationError("checkpoint tensor '" + name + "' has inconsistent size in " +
                            path.string());
    }
    in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
    if (!in) throw ValidationError("truncated checkpoint: " + path.string());
    file.tensors.emplace_back(std::move(name), std::move(t));
  }
  return file;
}

NamedTensors state_tensors(const torch::nn::Module& module) {
  NamedTensors out;
  for (const auto& item : module.named_parameters(true)) out.emplace_back(item.key(), item.value());
  for (const auto& item : module.named_buffers(true)) out.emplace_back(item.key(), item.value());
  return out;
}

std::string StateDiff::describe() const {
  std::ostringstream msg;
  auto list = [&](const char* label, const std::vector<std::string>& names) {
    if (names.empty()) return;
    msg << label << " (" << names.size() << "):";
    for (const auto& n : names) msg << ' ' << n;
    msg << '\n';
  };
  list("missing", missing);
  list("unexpected", unexpected);
  list("shape mismatch", shape_mismatch);
  return msg.str();
}

StateDiff diff_state(const torch::nn::Module& module, const NamedTensors& source) {
  std::map<std::string, torch::Tensor> src(source.begin(), source.end());
  StateDiff diff;
  for (const auto& [name, tensor] : state_tensors(module)) {
    const auto it = src.find(name);
    if (it == src.end()) {
      diff.missing.push_back(name);
      continue;
    }
    if (it->second.sizes() != tensor.sizes() || it->second.scalar_type() != tensor.scalar_type()) {
      diff.shape_mismatch.push_back(name);
    }
    src.erase(it);
  }
  for (const auto& entry : src) diff.unexpected.push_back(entry.first);
  return diff;
}

void load_state(torch::nn::Module& module, const NamedTensors& source) {
  const auto diff = diff_state(module, source);
  if (!diff.empty()) throw ValidationError("checkpoint/architecture mismatch:\n" + diff.describe());
  std::map<std::string, torch::Tensor> src(source.begin(), source.end());
  torch::NoGradGuard no_grad;
  for (auto& [name, tensor] : state_tensors(module)) tensor.copy_(src.at(name));
}

std::string fingerprint(std::string_view canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mtlaqa
