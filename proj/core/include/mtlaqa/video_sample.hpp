#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlaqa/dive_label.hpp"
#include "mtlaqa/vocabulary.hpp"

namespace mtlaqa {

/// Decoded RGB frames, row-major (T, H, W, 3).
struct FrameSequence {
  std::int64_t count = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> rgb;

  [[nodiscard]] std::size_t frame_bytes() const {
    return static_cast<std::size_t>(height * width * 3);
  }
  [[nodiscard]] const std::uint8_t* frame(std::int64_t t) const {
    return rgb.data() + static_cast<std::size_t>(t) * frame_bytes();
  }
  [[nodiscard]] std::uint8_t* frame(std::int64_t t) {
    return rgb.data() + static_cast<std::size_t>(t) * frame_bytes();
  }
};

struct VideoSample {
  FrameSequence frames;
  AqaScore score;
  DiveLabel label;
  CaptionTokens caption;
  std::vector<std::string> caption_words;  // normalized reference tokens
  std::string sample_id;
};

}  // namespace mtlaqa
