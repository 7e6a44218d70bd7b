#include "mtlaqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mtlaqa/errors.hpp"
#include "mtlaqa/vocabulary.hpp"

namespace mtlaqa {
namespace {

// motion region in normalized frame coordinates; survives every center crop
constexpr double kRegionX0 = 0.36, kRegionX1 = 0.64;
constexpr double kRegionY0 = 0.25, kRegionY1 = 0.75;

constexpr std::array<double, 3> kBaseSide{0.10, 0.16, 0.22};  // region units
constexpr double kSweepReach = 0.24;
constexpr double kOscillationReach = 0.08;

constexpr std::array<const char*, 10> kNumberWords{"zero", "one", "two",   "three", "four",
                                                   "five", "six", "seven", "eight", "nine"};
constexpr std::array<const char*, 2> kSpeedWords{"slow", "fast"};
constexpr std::array<const char*, 4> kDirectionWords{"sideways", "downward", "upward", "diagonal"};
constexpr std::array<const char*, 3> kSizeWords{"small", "medium", "large"};

constexpr std::array<std::uint8_t, 3> kBackground{18, 20, 28};
constexpr std::array<std::uint8_t, 3> kForeground{240, 236, 210};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t draw(std::mt19937_64& rng, std::int64_t n) {
  return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n));
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double triangle(double phase) {
  // 0 -> -1, 1 -> +1, 2 -> -1, ...
  const double m = std::floor(phase);
  const double f = phase - m;
  const bool even = static_cast<std::int64_t>(m) % 2 == 0;
  return even ? -1.0 + 2.0 * f : 1.0 - 2.0 * f;
}

double side_length(const SyntheticLatents& l) {
  return kBaseSide[static_cast<std::size_t>(l.size_class)] * (1.0 + 0.25 * l.size_factor);
}

void render_frame(std::uint8_t* rgb, std::int64_t width, std::int64_t height,
                  std::array<double, 2> centre, double side) {
  const double rx = (kRegionX1 - kRegionX0) * static_cast<double>(width);
  const double ry = (kRegionY1 - kRegionY0) * static_cast<double>(height);
  const double cx = (kRegionX0 + (kRegionX1 - kRegionX0) * centre[0]) * static_cast<double>(width);
  const double cy = (kRegionY0 + (kRegionY1 - kRegionY0) * centre[1]) * static_cast<double>(height);
  const double hx = 0.5 * side * rx, hy = 0.5 * side * ry;
  const double x0 = cx - hx, x1 = cx + hx, y0 = cy - hy, y1 = cy + hy;
  for (std::int64_t y = 0; y < height; ++y) {
    const double cov_y = std::clamp(std::min(y1, y + 1.0) - std::max(y0, static_cast<double>(y)), 0.0, 1.0);
    for (std::int64_t x = 0; x < width; ++x) {
      const double cov_x =
          std::clamp(std::min(x1, x + 1.0) - std::max(x0, static_cast<double>(x)), 0.0, 1.0);
      const double a = cov_x * cov_y;
      auto* px = rgb + (y * width + x) * 3;
      for (int c = 0; c < 3; ++c) {
        const double v = kBackground[c] + a * (kForeground[c] - kBackground[c]);
        px[c] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
}

}  // namespace

DiveLabel SyntheticLatents::label() const {
  return DiveLabel{size_class, speed_class, direction, bounces, oscillations};
}

double synthetic_raw_score(const SyntheticLatents& l, double roughness) {
  return 20.0 + 20.0 * (static_cast<double>(l.size_class) + l.size_factor) +
         static_cast<double>(l.bounces) + 0.8 * static_cast<double>(l.oscillations) +
         3.0 * static_cast<double>(l.speed_class) - 10.0 * roughness;
}

std::string synthetic_caption(const SyntheticLatents& l) {
  std::string s;
  s += kSpeedWords[static_cast<std::size_t>(l.speed_class)];
  s += ' ';
  s += kDirectionWords[static_cast<std::size_t>(l.direction)];
  s += " object with ";
  s += kNumberWords[static_cast<std::size_t>(l.bounces)];
  s += " bounces and ";
  s += kNumberWords[static_cast<std::size_t>(l.oscillations)];
  s += " wiggles at ";
  s += kSizeWords[static_cast<std::size_t>(l.size_class)];
  s += " size";
  return s;
}

std::vector<std::string> synthetic_vocabulary() {
  std::vector<std::string> words{"object", "with", "bounces", "and", "wiggles", "at", "size"};
  for (auto w : kNumberWords) words.emplace_back(w);
  for (auto w : kSpeedWords) words.emplace_back(w);
  for (auto w : kDirectionWords) words.emplace_back(w);
  for (auto w : kSizeWords) words.emplace_back(w);
  std::sort(words.begin(), words.end());
  return words;
}

void SyntheticSpec::validate() const {
  if (sample_count < 1) throw ValidationError("synthetic: sample_count must be >= 1");
  if (frames < 2) throw ValidationError("synthetic: frames must be >= 2");
  if (width < 16 || height < 16) throw ValidationError("synthetic: frame too small");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ValidationError("synthetic: test_fraction must be in [0, 1)");
  }
  if (max_bounces < 0 || max_bounces > 9) throw ValidationError("synthetic: max_bounces in 0..9");
  if (max_oscillations < 0 || max_oscillations > 7) {
    throw ValidationError("synthetic: max_oscillations in 0..7");
  }
  if (!(max_jitter >= 0.0 && max_jitter <= 0.1)) throw ValidationError("synthetic: max_jitter in [0, 0.1]");
}

std::vector<std::array<double, 2>> synthetic_trajectory(const SyntheticLatents& l,
                                                        std::int64_t frames,
                                                        std::uint64_t jitter_seed) {
  std::array<double, 2> axis{}, perp{};
  const double s = static_cast<double>(l.start_sign);
  switch (l.direction) {
    case 0: axis = {s, 0.0}, perp = {0.0, 1.0}; break;
    case 1: axis = {0.0, 1.0}, perp = {1.0, 0.0}; break;   // leaves from the top
    case 2: axis = {0.0, -1.0}, perp = {1.0, 0.0}; break;  // leaves from the bottom
    default: {
      const double k = static_cast<double>(l.slope_sign);
      axis = {s * k, s}, perp = {k, -1.0};
      break;
    }
  }
  const double amplitude = l.speed_class == 0 ? 0.5 : 1.0;
  std::mt19937_64 rng(jitter_seed);
  std::vector<std::array<double, 2>> path(static_cast<std::size_t>(frames));
  for (std::int64_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(frames - 1);
    // b reversals = b + 1 half sweeps; clamp keeps t = 1 on the last one
    const double phase = std::min(t * static_cast<double>(l.bounces + 1),
                                  static_cast<double>(l.bounces + 1) - 1e-12);
    const double p = kSweepReach * amplitude * triangle(phase);
    const double q = kOscillationReach *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(l.oscillations) * t);
    for (int a = 0; a < 2; ++a) {
      const double noise = l.jitter * (2.0 * uniform01(rng) - 1.0);
      path[static_cast<std::size_t>(k)][a] = 0.5 + axis[a] * p + perp[a] * q + noise;
    }
  }
  return path;
}

double trajectory_roughness(const std::vector<std::array<double, 2>>& path) {
  if (path.size() < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const double dx = path[k + 1][0] - 2.0 * path[k][0] + path[k - 1][0];
    const double dy = path[k + 1][1] - 2.0 * path[k][1] + path[k - 1][1];
    sum += std::hypot(dx, dy);
  }
  return sum / static_cast<double>(path.size() - 2);
}

SyntheticSample render_synthetic_sample(const SyntheticSpec& spec, std::int64_t index) {
  std::mt19937_64 rng(mix(spec.seed, static_cast<std::uint64_t>(index)));
  SyntheticLatents l;
  l.size_class = draw(rng, 3);
  l.size_factor = uniform01(rng);
  l.speed_class = draw(rng, 2);
  l.direction = draw(rng, 4);
  l.bounces = draw(rng, spec.max_bounces + 1);
  l.oscillations = draw(rng, spec.max_oscillations + 1);
  l.jitter = spec.max_jitter * uniform01(rng);
  l.start_sign = draw(rng, 2) == 0 ? 1 : -1;
  l.slope_sign = draw(rng, 2) == 0 ? 1 : -1;
  const auto jitter_seed = rng();

  const auto path = synthetic_trajectory(l, spec.frames, jitter_seed);
  const double roughness = trajectory_roughness(path);

  SyntheticSample out;
  out.latents = l;
  char id[32];
  std::snprintf(id, sizeof(id), "syn_%06lld", static_cast<long long>(index));
  auto& rec = out.record;
  rec.sample_id = id;
  rec.video_path = id;
  rec.frame_range = {0, spec.frames - 1};
  rec.raw_score = synthetic_raw_score(l, roughness);
  rec.dive = describe_label(l.label(), DiveLabelSchema::standard());
  rec.caption_text = synthetic_caption(l);
  rec.latents = {{"size_class", static_cast<double>(l.size_class)},
                 {"size_factor", l.size_factor},
                 {"speed_class", static_cast<double>(l.speed_class)},
                 {"direction", static_cast<double>(l.direction)},
                 {"bounces", static_cast<double>(l.bounces)},
                 {"oscillations", static_cast<double>(l.oscillations)},
                 {"jitter", l.jitter},
                 {"roughness", roughness}};

  auto& f = out.frames;
  f.count = spec.frames, f.width = spec.width, f.height = spec.height;
  f.rgb.resize(static_cast<std::size_t>(f.count) * f.frame_bytes());
  const double side = side_length(l);
  for (std::int64_t t = 0; t < f.count; ++t) {
    render_frame(f.frame(t), f.width, f.height, path[static_cast<std::size_t>(t)], side);
  }
  return out;
}

void generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& root) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(root / "frames");

  std::vector<AnnotationRecord> records;
  std::vector<std::string> train, test;
  const auto n_test = static_cast<std::int64_t>(std::floor(spec.test_fraction * spec.sample_count));
  const std::vector<int> png_params{cv::IMWRITE_PNG_COMPRESSION, 6};
  for (std::int64_t i = 0; i < spec.sample_count; ++i) {
    auto sample = render_synthetic_sample(spec, i);
    const auto dir = root / "frames" / sample.record.sample_id;
    fs::create_directories(dir);
    for (std::int64_t t = 0; t < sample.frames.count; ++t) {
      const cv::Mat rgb(static_cast<int>(sample.frames.height), static_cast<int>(sample.frames.width),
                        CV_8UC3, sample.frames.frame(t));
      cv::Mat bgr;
      cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
      char name[16];
      std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(t));
      if (!cv::imwrite((dir / name).string(), bgr, png_params)) {
        throw RuntimeFailure("cannot write frame " + (dir / name).string());
      }
    }
    // the last floor(test_fraction * n) samples form the test split
    (i < spec.sample_count - n_test ? train : test).push_back(sample.record.sample_id);
    records.push_back(std::move(sample.record));
  }
  DatasetHeader header;
  header.normalization_constant = kSyntheticNormalization;
  header.name = "synthetic-" + std::to_string(spec.seed);
  write_annotation_file(root / "annotations.jsonl", header, records);
  write_manifest(root / "train.txt", train);
  write_manifest(root / "test.txt", test);
  Vocabulary::from_tokens(synthetic_vocabulary()).save(root / "vocab.txt");
}

}  // namespace mtlaqa
