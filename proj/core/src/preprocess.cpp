#include "mtlaqa/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

// raw engine output only, so the stream is the same on every standard library
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(rng() % span);
}

void check_frames(const FrameSequence& f) {
  if (f.count < 1 || f.height < 1 || f.width < 1 ||
      f.rgb.size() != static_cast<std::size_t>(f.count) * f.frame_bytes()) {
    throw ValidationError("frame sequence is empty or inconsistent");
  }
}

}  // namespace

PreprocessConfig PreprocessConfig::for_network(Architecture arch, Profile profile) {
  PreprocessConfig c;
  if (arch == Architecture::kC3dAvg) {
    c.target_frames = 96;
    if (profile == Profile::kStandard) {
      c.resize_width = 171, c.resize_height = 128, c.crop = 112;
    } else {
      c.resize_width = 86, c.resize_height = 64, c.crop = 32;
    }
  } else {
    c.target_frames = 16;
    if (profile == Profile::kStandard) {
      c.resize_width = 640, c.resize_height = 360, c.crop = 180;
    } else {
      c.resize_width = 480, c.resize_height = 270, c.crop = 136;
    }
  }
  return c;
}

void PreprocessConfig::validate() const {
  if (target_frames < 1) throw ValidationError("preprocess: target_frames must be >= 1");
  if (crop < 1 || crop > resize_width || crop > resize_height) {
    throw ValidationError("preprocess: crop " + std::to_string(crop) + " does not fit " +
                          std::to_string(resize_width) + "x" + std::to_string(resize_height));
  }
  if (hflip_prob < 0.0 || hflip_prob > 1.0) throw ValidationError("preprocess: hflip_prob not in [0, 1]");
  if (temporal_jitter < 0) throw ValidationError("preprocess: temporal_jitter must be >= 0");
}

std::vector<std::int64_t> temporal_indices(std::int64_t frames, std::int64_t target) {
  if (target < 1) throw ValidationError("temporal_normalize: target must be >= 1");
  if (frames < 1) throw ValidationError("temporal_normalize: no frames");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(target), 0);
  if (target == 1) return idx;
  for (std::int64_t k = 0; k < target; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(frames - 1) /
                       static_cast<double>(target - 1);
    idx[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::lround(pos));
  }
  return idx;
}

FrameSequence temporal_normalize(const FrameSequence& frames, std::int64_t target) {
  return temporal_normalize(frames, 0, frames.count - 1, target);
}

FrameSequence temporal_normalize(const FrameSequence& frames, std::int64_t start,
                                 std::int64_t end, std::int64_t target) {
  check_frames(frames);
  if (start < 0 || end >= frames.count || start > end) {
    throw ValidationError("temporal_normalize: bad frame window");
  }
  const auto idx = temporal_indices(end - start + 1, target);
  FrameSequence out{target, frames.height, frames.width, {}};
  out.rgb.resize(static_cast<std::size_t>(target) * out.frame_bytes());
  for (std::int64_t k = 0; k < target; ++k) {
    std::memcpy(out.frame(k), frames.frame(start + idx[static_cast<std::size_t>(k)]),
                out.frame_bytes());
  }
  return out;
}

FrameSequence resize(const FrameSequence& frames, std::int64_t width, std::int64_t height) {
  check_frames(frames);
  if (frames.width == width && frames.height == height) return frames;
  FrameSequence out{frames.count, height, width, {}};
  out.rgb.resize(static_cast<std::size_t>(out.count) * out.frame_bytes());
  const int interp = (width < frames.width && height < frames.height) ? cv::INTER_AREA
                                                                     : cv::INTER_LINEAR;
  for (std::int64_t t = 0; t < frames.count; ++t) {
    const cv::Mat src(static_cast<int>(frames.height), static_cast<int>(frames.width), CV_8UC3,
                      const_cast<std::uint8_t*>(frames.frame(t)));
    cv::Mat dst(static_cast<int>(height), static_cast<int>(width), CV_8UC3, out.frame(t));
    cv::resize(src, dst, dst.size(), 0, 0, interp);
  }
  return out;
}

FrameSequence hflip(const FrameSequence& frames) {
  check_frames(frames);
  FrameSequence out = frames;
  for (std::int64_t t = 0; t < frames.count; ++t) {
    const auto* src = frames.frame(t);
    auto* dst = out.frame(t);
    for (std::int64_t y = 0; y < frames.height; ++y) {
      for (std::int64_t x = 0; x < frames.width; ++x) {
        const auto s = (y * frames.width + (frames.width - 1 - x)) * 3;
        const auto d = (y * frames.width + x) * 3;
        std::memcpy(dst + d, src + s, 3);
      }
    }
  }
  return out;
}

FrameSequence center_crop(const FrameSequence& frames, std::int64_t size) {
  check_frames(frames);
  if (size > frames.width || size > frames.height || size < 1) {
    throw ValidationError("center_crop: crop larger than frame");
  }
  const auto x0 = (frames.width - size) / 2;
  const auto y0 = (frames.height - size) / 2;
  FrameSequence out{frames.count, size, size, {}};
  out.rgb.resize(static_cast<std::size_t>(out.count) * out.frame_bytes());
  for (std::int64_t t = 0; t < frames.count; ++t) {
    for (std::int64_t y = 0; y < size; ++y) {
      std::memcpy(out.frame(t) + y * size * 3,
                  frames.frame(t) + ((y0 + y) * frames.width + x0) * 3,
                  static_cast<std::size_t>(size * 3));
    }
  }
  return out;
}

FrameSequence augment(const FrameSequence& frames, const PreprocessConfig& config, Mode mode,
                      std::mt19937_64& rng) {
  check_frames(frames);
  const auto last = frames.count - 1;
  std::int64_t start = 0, end = last;
  bool flip = false;
  if (mode == Mode::kTrain) {
    const auto j = uniform_int(rng, -config.temporal_jitter, config.temporal_jitter);
    start = std::clamp<std::int64_t>(j, 0, last);
    end = std::clamp<std::int64_t>(last + j, start, last);
    flip = uniform01(rng) < config.hflip_prob;
  }
  auto out = temporal_normalize(frames, start, end, config.target_frames);
  out = center_crop(resize(out, config.resize_width, config.resize_height), config.crop);
  return flip ? hflip(out) : out;
}

torch::Tensor to_tensor(const FrameSequence& frames, const std::array<float, 3>& mean) {
  check_frames(frames);
  auto bytes = torch::from_blob(const_cast<std::uint8_t*>(frames.rgb.data()),
                                {frames.count, frames.height, frames.width, 3}, torch::kUInt8);
  auto x = bytes.permute({3, 0, 1, 2}).to(torch::kFloat).div_(255.0F);
  const auto m = torch::tensor({mean[0], mean[1], mean[2]}).view({3, 1, 1, 1});
  return (x - m).contiguous();
}

}  // namespace mtlaqa
