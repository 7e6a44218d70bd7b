#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtlaqa/annotation.hpp"
#include "mtlaqa/video_sample.hpp"
#include "mtlaqa/vocabulary.hpp"

namespace mtlaqa {

/// Standard layout of a dataset directory.
struct DataDir {
  std::filesystem::path root;

  [[nodiscard]] std::filesystem::path annotations() const { return root / "annotations.jsonl"; }
  [[nodiscard]] std::filesystem::path frames() const { return root / "frames"; }
  [[nodiscard]] std::filesystem::path train_manifest() const { return root / "train.txt"; }
  [[nodiscard]] std::filesystem::path test_manifest() const { return root / "test.txt"; }
  [[nodiscard]] std::filesystem::path vocabulary() const { return root / "vocab.txt"; }
};

struct SampleError {
  std::string sample_id;
  std::size_t line = 0;
  std::string message;
};

struct Dataset {
  DatasetHeader header;
  std::vector<VideoSample> samples;  // file order
  std::vector<LineError> line_errors;
  std::vector<SampleError> sample_errors;
  std::vector<std::string> warnings;

  [[nodiscard]] const VideoSample* find(const std::string& sample_id) const;
  /// One line per problem, prefixed with a count summary; empty when clean.
  [[nodiscard]] std::string report() const;
};

/// Borrowed view onto a Dataset; the dataset must outlive it.
using SampleSet = std::vector<const VideoSample*>;

/// Frames are read from `<video_root>/<video_path>/%06d.png` over the
/// record's inclusive frame range. A missing frame skips that sample with an
/// entry in sample_errors.
Dataset load_dataset(const std::filesystem::path& annotation_path,
                     const std::filesystem::path& video_root,
                     const DiveLabelSchema& schema = DiveLabelSchema::standard());

/// All samples, in order.
SampleSet all_samples(const Dataset& dataset);
/// Samples named by `ids`, in manifest order. Unknown ids throw.
SampleSet select_samples(const Dataset& dataset, const std::vector<std::string>& ids);
/// Manifest on disk if present, otherwise `fallback`.
SampleSet split_or(const Dataset& dataset, const std::filesystem::path& manifest,
                   const SampleSet& fallback);

/// The directory's vocab.txt when present, otherwise built from the captions.
Vocabulary dataset_vocabulary(const Dataset& dataset, const DataDir& dir);

/// Fills VideoSample::caption from caption_words.
void encode_captions(Dataset& dataset, const Vocabulary& vocab);

}  // namespace mtlaqa
