#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/dropout.h>
#include <torch/nn/pimpl.h>

namespace mtlaqa {

/// Activation volume (N, C, T, H, W) tagged with the layer group it came from.
struct FeatureMap {
  torch::Tensor data;
  std::string tag;
};

using FeatureCaptures = std::vector<FeatureMap>;

enum class TrunkVariant { kC3d, kMscadc };

/// C3D up to pool-5. Channels are conv1, conv2, conv3a, conv3b, conv4a,
/// conv4b, conv5a, conv5b; the defaults are the standard widths.
struct C3dTrunkConfig {
  std::array<std::int64_t, 8> channels{64, 128, 256, 256, 512, 512, 512, 512};
  std::int64_t frames = 16;
  std::int64_t crop = 112;

  /// Pool-5 output shape (C, T, H, W) for this configuration.
  [[nodiscard]] std::array<std::int64_t, 4> output_shape() const;
};

/// The dilated MSCADC body: five conv groups with batchnorm, the last two
/// without pooling and with spatial dilation.
struct MscadcTrunkConfig {
  std::array<std::int64_t, 8> channels{32, 64, 128, 128, 256, 256, 256, 256};
  std::int64_t frames = 16;
  std::int64_t crop = 180;
  std::int64_t dilation = 2;
  bool batchnorm = true;
  double dropout = 0.5;

  [[nodiscard]] std::array<std::int64_t, 4> output_shape() const;
};

/// Multiscale context aggregation: constant-width 3x3x3 cascade with growing
/// spatial dilation, ReLU between layers, resolution preserved.
struct ContextNetConfig {
  std::int64_t channels = 12;
  std::vector<std::int64_t> dilations{1, 1, 2, 4, 8, 1};
};

/// Conv3d 3x3x3, stride 1, with spatial dilation `d` (temporal dilation 1)
/// and resolution-preserving padding.
torch::nn::Conv3d conv3x3x3(std::int64_t in, std::int64_t out, std::int64_t spatial_dilation = 1,
                            bool bias = true);

class C3dTrunkImpl : public torch::nn::Module {
 public:
  explicit C3dTrunkImpl(C3dTrunkConfig config = {});

  /// (N, 3, 16, 112, 112) -> pool-5 (N, 512, 1, 4, 4). When `captures` is
  /// given, appends c1..c4 (post-pool group outputs) and c5 (conv5b, pre-pool).
  torch::Tensor forward(const torch::Tensor& clip, FeatureCaptures* captures = nullptr);

  [[nodiscard]] const C3dTrunkConfig& config() const { return config_; }

 private:
  C3dTrunkConfig config_;
  torch::nn::Conv3d conv1{nullptr}, conv2{nullptr}, conv3a{nullptr}, conv3b{nullptr};
  torch::nn::Conv3d conv4a{nullptr}, conv4b{nullptr}, conv5a{nullptr}, conv5b{nullptr};
};
TORCH_MODULE(C3dTrunk);

class MscadcTrunkImpl : public torch::nn::Module {
 public:
  explicit MscadcTrunkImpl(MscadcTrunkConfig config = {});

  /// (N, 3, 16, 180, 180) -> (N, 256, 4, 22, 22). Captures c1..c3 after each
  /// pool, c4 after the second 256 conv, c5 after the dilated pair.
  torch::Tensor forward(const torch::Tensor& clip, FeatureCaptures* captures = nullptr);

  [[nodiscard]] const MscadcTrunkConfig& config() const { return config_; }

 private:
  torch::Tensor block(std::size_t i, const torch::Tensor& x);

  MscadcTrunkConfig config_;
  torch::nn::ModuleList convs_;
  torch::nn::ModuleList norms_;
  torch::nn::Dropout dropout_{nullptr};
};
TORCH_MODULE(MscadcTrunk);

class ContextNetImpl : public torch::nn::Module {
 public:
  explicit ContextNetImpl(ContextNetConfig config = {});

  /// Shape-preserving. Rejects inputs whose spatial extent cannot host the
  /// largest dilation (h, w >= 2 * max_dilation + 1).
  torch::Tensor forward(const torch::Tensor& x);

  [[nodiscard]] const ContextNetConfig& config() const { return config_; }
  /// Spatial receptive field of one output voxel.
  [[nodiscard]] std::int64_t receptive_field() const;

 private:
  ContextNetConfig config_;
  torch::nn::ModuleList layers_;
};
TORCH_MODULE(ContextNet);

}  // namespace mtlaqa
