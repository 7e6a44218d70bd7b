#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <torch/types.h>

#include "mtlaqa/networks.hpp"
#include "mtlaqa/video_sample.hpp"

namespace mtlaqa {

enum class Mode { kTrain, kEval };

struct PreprocessConfig {
  std::int64_t target_frames = 96;
  std::int64_t resize_width = 171;
  std::int64_t resize_height = 128;
  std::int64_t crop = 112;
  double hflip_prob = 0.5;
  std::int64_t temporal_jitter = 3;
  /// Subtracted per channel after scaling pixels to [0, 1].
  std::array<float, 3> mean{0.5F, 0.5F, 0.5F};

  /// Input pipeline matching a network profile.
  static PreprocessConfig for_network(Architecture arch, Profile profile);

  /// Throws ValidationError when the crop does not fit the resized frame.
  void validate() const;
};

/// Resampling indices i_k = round(k (T - 1) / (target - 1)).
std::vector<std::int64_t> temporal_indices(std::int64_t frames, std::int64_t target);
FrameSequence temporal_normalize(const FrameSequence& frames, std::int64_t target);

/// Uses frames [start, end] only.
FrameSequence temporal_normalize(const FrameSequence& frames, std::int64_t start,
                                 std::int64_t end, std::int64_t target);

FrameSequence resize(const FrameSequence& frames, std::int64_t width, std::int64_t height);
FrameSequence hflip(const FrameSequence& frames);
FrameSequence center_crop(const FrameSequence& frames, std::int64_t size);

/// Start-offset jitter, resampling, resize, optional flip and center crop.
/// Eval mode draws nothing from `rng` and is deterministic.
FrameSequence augment(const FrameSequence& frames, const PreprocessConfig& config, Mode mode,
                      std::mt19937_64& rng);

/// (T, H, W, 3) bytes -> float (3, T, H, W), x / 255 - mean[c].
torch::Tensor to_tensor(const FrameSequence& frames, const std::array<float, 3>& mean);

}  // namespace mtlaqa
