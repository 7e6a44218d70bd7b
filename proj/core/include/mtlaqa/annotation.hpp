#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mtlaqa/dive_label.hpp"

namespace mtlaqa {

inline constexpr int kAnnotationSchemaVersion = 1;

/// First line of an annotation file.
struct DatasetHeader {
  int schema_version = kAnnotationSchemaVersion;
  /// Raw scores are divided by this to get normalized targets.
  double normalization_constant = 1.0;
  std::string name;
};

struct FrameRange {
  std::int64_t start = 0;
  std::int64_t end = 0;  // inclusive
  [[nodiscard]] std::int64_t count() const { return end - start + 1; }
};

/// One serialized dataset row.
struct AnnotationRecord {
  std::string sample_id;
  std::string video_path;  // relative to the video root; defaults to sample_id
  FrameRange frame_range;
  double raw_score = 0.0;
  DiveFields dive;
  std::string caption_text;
  /// Generator latents for synthetic rows; empty for real data.
  std::map<std::string, double> latents;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct AnnotationFile {
  DatasetHeader header;
  bool has_header = false;
  std::vector<AnnotationRecord> records;
  std::vector<std::size_t> record_lines;
  std::vector<LineError> errors;
};

DiveLabel label_from_record(const AnnotationRecord& rec, const DiveLabelSchema& schema);

/// Parses a JSON-lines annotation file. Malformed rows land in `errors` with
/// their line numbers; a duplicate sample_id rejects the whole file.
AnnotationFile read_annotation_file(const std::filesystem::path& path,
                                    const DiveLabelSchema& schema = DiveLabelSchema::standard());

void write_annotation_file(const std::filesystem::path& path, const DatasetHeader& header,
                           const std::vector<AnnotationRecord>& records);

/// Newline-separated sample ids; blank lines ignored.
std::vector<std::string> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace mtlaqa
