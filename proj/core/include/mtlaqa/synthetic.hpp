#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtlaqa/annotation.hpp"
#include "mtlaqa/video_sample.hpp"

namespace mtlaqa {

/// Hidden generator parameters of one synthetic clip. Each discrete latent
/// is one label field: size -> position, speed -> armstand, direction ->
/// rotation type, bounces -> somersault index, oscillations -> twist index.
struct SyntheticLatents {
  std::int64_t size_class = 0;    // 0..2
  double size_factor = 0.0;       // [0, 1), continuous growth within the class
  std::int64_t speed_class = 0;   // 0 slow, 1 fast
  std::int64_t direction = 0;     // 0 sideways, 1 downward, 2 upward, 3 diagonal
  std::int64_t bounces = 0;       // 0..9 reversals of the primary sweep
  std::int64_t oscillations = 0;  // 0..7 perpendicular sine periods
  double jitter = 0.0;            // per-frame positional noise amplitude
  std::int64_t start_sign = 1;    // +1/-1: which end of the axis the sweep leaves from
  std::int64_t slope_sign = 1;    // +1/-1: diagonal orientation

  [[nodiscard]] DiveLabel label() const;
};

/// raw = 20 + 20 (size_class + size_factor) + bounces + 0.8 oscillations
///       + 3 speed_class - 10 roughness
double synthetic_raw_score(const SyntheticLatents& latents, double roughness);

/// "<speed> <direction> object with <b> bounces and <o> wiggles at <size> size",
/// numbers spelled out.
std::string synthetic_caption(const SyntheticLatents& latents);

/// Every token the caption template can produce, sorted.
std::vector<std::string> synthetic_vocabulary();

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::int64_t sample_count = 16;
  std::int64_t frames = 96;
  std::int64_t width = 192;
  std::int64_t height = 108;
  double test_fraction = 0.25;
  std::int64_t max_bounces = 9;
  std::int64_t max_oscillations = 7;
  double max_jitter = 0.04;

  void validate() const;
};

/// Object centre per frame in region units ([0, 1]^2, the motion region),
/// including jitter.
std::vector<std::array<double, 2>> synthetic_trajectory(const SyntheticLatents& latents,
                                                        std::int64_t frames,
                                                        std::uint64_t jitter_seed);

/// Mean norm of the trajectory's second differences.
double trajectory_roughness(const std::vector<std::array<double, 2>>& path);

struct SyntheticSample {
  AnnotationRecord record;
  SyntheticLatents latents;
  FrameSequence frames;
};

/// Pure function of (spec, index).
SyntheticSample render_synthetic_sample(const SyntheticSpec& spec, std::int64_t index);

inline constexpr double kSyntheticNormalization = 120.0;

/// Writes annotations.jsonl, frames/<id>/%06d.png, train.txt, test.txt and
/// vocab.txt under `root`. Equal specs give byte-identical trees.
void generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& root);

}  // namespace mtlaqa
