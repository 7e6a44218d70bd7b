#include "mtlaqa/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

FrameSequence read_frames(const std::filesystem::path& dir, const FrameRange& range) {
  FrameSequence seq;
  for (std::int64_t t = range.start; t <= range.end; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(t));
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) throw RuntimeFailure("missing frame " + path.string());
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw RuntimeFailure("unreadable frame " + path.string());
    if (seq.count == 0) {
      seq.height = bgr.rows, seq.width = bgr.cols;
      seq.rgb.reserve(static_cast<std::size_t>(range.count()) * seq.frame_bytes());
    } else if (bgr.rows != seq.height || bgr.cols != seq.width) {
      throw RuntimeFailure("frame size changes at " + path.string());
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    const auto* p = rgb.ptr<std::uint8_t>();
    seq.rgb.insert(seq.rgb.end(), p, p + seq.frame_bytes());
    ++seq.count;
  }
  return seq;
}

}  // namespace

const VideoSample* Dataset::find(const std::string& sample_id) const {
  for (const auto& s : samples) {
    if (s.sample_id == sample_id) return &s;
  }
  return nullptr;
}

std::string Dataset::report() const {
  if (line_errors.empty() && sample_errors.empty() && warnings.empty()) return {};
  std::ostringstream out;
  out << samples.size() << " samples loaded, " << line_errors.size() << " malformed lines, "
      << sample_errors.size() << " samples skipped\n";
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  for (const auto& e : line_errors) out << "line " << e.line << ": " << e.message << '\n';
  for (const auto& e : sample_errors) {
    out << "line " << e.line << " (" << e.sample_id << "): " << e.message << '\n';
  }
  return out.str();
}

Dataset load_dataset(const std::filesystem::path& annotation_path,
                     const std::filesystem::path& video_root, const DiveLabelSchema& schema) {
  auto file = read_annotation_file(annotation_path, schema);
  Dataset ds;
  ds.header = file.header;
  ds.line_errors = std::move(file.errors);
  if (file.records.empty()) ds.warnings.push_back("no records in " + annotation_path.string());

  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const auto& rec = file.records[i];
    const auto line = file.record_lines[i];
    try {
      VideoSample s;
      s.sample_id = rec.sample_id;
      s.label = label_from_record(rec, schema);
      s.score = AqaScore::from_raw(rec.raw_score, ds.header.normalization_constant);
      s.caption_words = tokenize(rec.caption_text);
      const auto dir = video_root / (rec.video_path.empty() ? rec.sample_id : rec.video_path);
      if (!std::filesystem::is_directory(dir)) {
        throw RuntimeFailure("missing video directory " + dir.string());
      }
      s.frames = read_frames(dir, rec.frame_range);
      ds.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      ds.sample_errors.push_back({rec.sample_id, line, e.what()});
    }
  }
  return ds;
}

SampleSet all_samples(const Dataset& dataset) {
  SampleSet out;
  out.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) out.push_back(&s);
  return out;
}

SampleSet select_samples(const Dataset& dataset, const std::vector<std::string>& ids) {
  std::map<std::string, const VideoSample*> index;
  for (const auto& s : dataset.samples) index.emplace(s.sample_id, &s);
  SampleSet out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("manifest names unknown sample '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

SampleSet split_or(const Dataset& dataset, const std::filesystem::path& manifest,
                   const SampleSet& fallback) {
  if (!std::filesystem::exists(manifest)) return fallback;
  return select_samples(dataset, read_manifest(manifest));
}

Vocabulary dataset_vocabulary(const Dataset& dataset, const DataDir& dir) {
  if (std::filesystem::exists(dir.vocabulary())) return Vocabulary::load(dir.vocabulary());
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) corpus.push_back(s.caption_words);
  return Vocabulary::build(corpus);
}

void encode_captions(Dataset& dataset, const Vocabulary& vocab) {
  for (auto& s : dataset.samples) {
    std::vector<std::int64_t> ids;
    ids.reserve(s.caption_words.size());
    for (const auto& w : s.caption_words) ids.push_back(vocab.index_of(w));
    if (ids.size() > kMaxCaptionTokens) ids.resize(kMaxCaptionTokens);
    s.caption = CaptionTokens::from_content(ids);
  }
}

}  // namespace mtlaqa
