#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/container/sequential.h>

#include "mtlaqa/backbone.hpp"
#include "mtlaqa/captioner.hpp"
#include "mtlaqa/losses.hpp"
#include "mtlaqa/tasks.hpp"

namespace mtlaqa {

enum class Architecture { kC3dAvg, kMscadc };
enum class Profile { kStandard, kTiny };

std::string to_string(Architecture arch);
/// Accepts "c3d_avg" / "C3D-AVG" and "mscadc" / "MSCADC".
Architecture parse_architecture(std::string_view name);
std::string to_string(Profile profile);
Profile parse_profile(std::string_view name);

struct C3dAvgConfig {
  C3dTrunkConfig trunk;
  std::int64_t clips = 6;
  std::int64_t fc_width = 4096;
  double dropout = 0.5;
  /// AQA and classification share the fc6/fc7 stack and keep separate output layers.
  bool share_fc = true;
};

struct MscadcConfig {
  MscadcTrunkConfig trunk;
  std::int64_t head_channels = 12;
  ContextNetConfig context;
};

struct NetworkConfig {
  Architecture architecture = Architecture::kC3dAvg;
  C3dAvgConfig c3d_avg;
  MscadcConfig mscadc;
  /// feature_dim is derived from the architecture when the network is built.
  CaptionerConfig captioner;

  /// Widths and resolutions as published.
  static NetworkConfig standard(Architecture arch, std::int64_t vocab_size);
  /// Reduced channels and crop for desk-scale runs; same topology.
  static NetworkConfig tiny(Architecture arch, std::int64_t vocab_size);
  static NetworkConfig make(Architecture arch, Profile profile, std::int64_t vocab_size);

  [[nodiscard]] std::int64_t input_frames() const;
  [[nodiscard]] std::int64_t crop() const;
  /// Length of each vector fed to the caption encoder, and how many there are.
  [[nodiscard]] std::int64_t caption_feature_dim() const;
  [[nodiscard]] std::int64_t caption_sequence_length() const;
};

/// Per-batch predictions.
struct MtlOutput {
  torch::Tensor score;            // (N), normalized units
  ClassLogits class_logits;       // (N, k_sa) each; undefined unless classification ran
  torch::Tensor caption_logits;   // (N, L, V); only when teacher inputs were supplied
  torch::Tensor caption_state;    // (N, hidden); encoder output when captioning ran
  torch::Tensor caption_features; // (N, S, D) encoder input sequence
  torch::Tensor video_feature;    // C3D-AVG: averaged pool-5 (N, D); MSCADC: body output
  std::vector<FeatureMap> head_features;  // MSCADC per-task head volumes
};

class MtlNetworkImpl : public torch::nn::Module {
 public:
  explicit MtlNetworkImpl(NetworkConfig config) : config_(std::move(config)) {}

  /// video (N, 3, T, H, W) already preprocessed. caption_inputs (N, L) are
  /// the teacher-forcing tokens; pass an undefined tensor to skip decoding.
  virtual MtlOutput forward(const torch::Tensor& video, const TaskConfig& tasks,
                            const torch::Tensor& caption_inputs = {}) = 0;

  /// Trunk activations c1..c5, each globally average-pooled to (N, C).
  virtual std::vector<FeatureMap> pooled_layer_features(const torch::Tensor& video) = 0;

  virtual Captioner& captioner() = 0;

  [[nodiscard]] const NetworkConfig& config() const { return config_; }

 protected:
  NetworkConfig config_;
};

using MtlNetwork = std::shared_ptr<MtlNetworkImpl>;

/// Fully connected stack of the C3D lineage: (Linear, ReLU, Dropout) x 2.
torch::nn::Sequential make_fc_stack(std::int64_t in, std::int64_t width, double dropout);

class C3dAvgMtlImpl : public MtlNetworkImpl {
 public:
  explicit C3dAvgMtlImpl(NetworkConfig config);

  /// Splits the 96 frames into 6 disjoint 16-frame clips, runs the shared
  /// trunk on each and averages the pool-5 volumes element-wise. AQA and
  /// classification read the average; the caption encoder reads the 6
  /// per-clip features in order.
  MtlOutput forward(const torch::Tensor& video, const TaskConfig& tasks,
                    const torch::Tensor& caption_inputs = {}) override;
  std::vector<FeatureMap> pooled_layer_features(const torch::Tensor& video) override;
  Captioner& captioner() override { return captioner_; }

  C3dTrunk trunk{nullptr};

 private:
  torch::Tensor split_clips(const torch::Tensor& video) const;

  torch::nn::Sequential fc_{nullptr};
  torch::nn::Sequential fc_cls_{nullptr};
  torch::nn::Linear score_{nullptr};
  torch::nn::ModuleList classifiers_;
  Captioner captioner_{nullptr};
};

/// Task head: C1(12) -> context net -> MP(2,2,2) -> C3(12)+BN.
class MscadcHeadImpl : public torch::nn::Module {
 public:
  MscadcHeadImpl(std::int64_t in_channels, const MscadcConfig& config);
  torch::Tensor forward(const torch::Tensor& body);

  torch::nn::Conv3d project{nullptr};
  ContextNet context{nullptr};
  torch::nn::Conv3d conv{nullptr};
  torch::nn::BatchNorm3d norm{nullptr};
};
TORCH_MODULE(MscadcHead);

class MscadcMtlImpl : public MtlNetworkImpl {
 public:
  explicit MscadcMtlImpl(NetworkConfig config);

  /// One pass over a 16-frame clip. Each active task owns an independent
  /// head; AQA ends in C3(1) + average pool, classification in five
  /// C3(k_sa) + average pool, captioning reads the head volume as a
  /// temporal sequence of flattened (12, h, w) slices.
  MtlOutput forward(const torch::Tensor& video, const TaskConfig& tasks,
                    const torch::Tensor& caption_inputs = {}) override;
  std::vector<FeatureMap> pooled_layer_features(const torch::Tensor& video) override;
  Captioner& captioner() override { return captioner_; }

  MscadcTrunk trunk{nullptr};

 private:
  MscadcHead aqa_head_{nullptr};
  MscadcHead cls_head_{nullptr};
  MscadcHead cap_head_{nullptr};
  torch::nn::Conv3d score_{nullptr};
  torch::nn::ModuleList classifiers_;
  Captioner captioner_{nullptr};
};

MtlNetwork make_network(const NetworkConfig& config);

/// external parameter name -> internal canonical name.
using NameMap = std::map<std::string, std::string>;

/// The public C3D release names its layers conv1, conv2, conv3a ... conv5b
/// (plus fc6..fc8, which are ignored); these map onto trunk.<layer>.
const NameMap& c3d_pretrained_name_map();

struct InitScheme {
  enum class Kind { kRandom, kPretrainedTrunk };
  Kind kind = Kind::kRandom;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;  // kPretrainedTrunk only
  NameMap name_map;                  // empty: built-in table, then identity
};

struct InitReport {
  std::vector<std::string> loaded;
  std::vector<std::string> ignored;  // external keys with no destination
};

/// Random: He-style uniform U(-sqrt(6/fan_in), sqrt(6/fan_in)) for conv and
/// linear weights, zero biases, BN scale 1 shift 0, U(-sqrt3, sqrt3) word
/// embeddings. Pretrained: random everywhere, then the trunk is overwritten
/// from the checkpoint; any trunk tensor without a source is an error.
InitReport init_weights(MtlNetworkImpl& network, const InitScheme& scheme);

}  // namespace mtlaqa
