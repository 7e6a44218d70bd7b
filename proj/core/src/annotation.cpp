#include "mtlaqa/annotation.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

using nlohmann::json;

std::string armstand_text(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "Yes" : "No";
  return v.get<std::string>();
}

AnnotationRecord parse_record(const json& j) {
  for (const char* key : {"sample_id", "frame_range", "raw_score", "position", "armstand",
                          "rotation", "somersaults", "twists", "caption_text"}) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  }
  AnnotationRecord rec;
  rec.sample_id = j.at("sample_id").get<std::string>();
  if (rec.sample_id.empty()) throw ValidationError("sample_id: empty");
  rec.video_path = j.value("video_path", rec.sample_id);
  const auto& range = j.at("frame_range");
  if (!range.is_array() || range.size() != 2) {
    throw ValidationError("frame_range: expected [start, end]");
  }
  rec.frame_range = {range[0].get<std::int64_t>(), range[1].get<std::int64_t>()};
  if (rec.frame_range.start < 0 || rec.frame_range.end < rec.frame_range.start) {
    throw ValidationError("frame_range: invalid bounds");
  }
  rec.raw_score = j.at("raw_score").get<double>();
  if (!(rec.raw_score >= 0.0)) throw ValidationError("raw_score: must be >= 0");
  rec.dive.position = j.at("position").get<std::string>();
  rec.dive.armstand = armstand_text(j.at("armstand"));
  rec.dive.rotation = j.at("rotation").get<std::string>();
  rec.dive.somersaults = j.at("somersaults").get<double>();
  rec.dive.twists = j.at("twists").get<double>();
  rec.caption_text = j.at("caption_text").get<std::string>();
  if (j.contains("latents")) rec.latents = j.at("latents").get<std::map<std::string, double>>();
  return rec;
}

json record_to_json(const AnnotationRecord& rec) {
  json j;
  j["sample_id"] = rec.sample_id;
  j["video_path"] = rec.video_path.empty() ? rec.sample_id : rec.video_path;
  j["frame_range"] = {rec.frame_range.start, rec.frame_range.end};
  j["raw_score"] = rec.raw_score;
  j["position"] = rec.dive.position;
  j["armstand"] = rec.dive.armstand;
  j["rotation"] = rec.dive.rotation;
  j["somersaults"] = rec.dive.somersaults;
  j["twists"] = rec.dive.twists;
  j["caption_text"] = rec.caption_text;
  if (!rec.latents.empty()) j["latents"] = rec.latents;
  return j;
}

}  // namespace

DiveLabel label_from_record(const AnnotationRecord& rec, const DiveLabelSchema& schema) {
  return resolve_label(rec.dive, schema);
}

AnnotationFile read_annotation_file(const std::filesystem::path& path,
                                    const DiveLabelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("annotation file not found: " + path.string());

  AnnotationFile file;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      file.errors.push_back({line_no, std::string("malformed JSON: ") + e.what()});
      continue;
    }
    if (!file.has_header && file.records.empty() && file.errors.empty() &&
        j.contains("schema_version")) {
      file.has_header = true;
      file.header.schema_version = j.at("schema_version").get<int>();
      if (file.header.schema_version != kAnnotationSchemaVersion) {
        throw ValidationError(path.string() + ": unsupported schema_version " +
                              std::to_string(file.header.schema_version));
      }
      file.header.normalization_constant = j.value("normalization_constant", 0.0);
      file.header.name = j.value("name", std::string());
      continue;
    }
    try {
      AnnotationRecord rec = parse_record(j);
      (void)label_from_record(rec, schema);
      if (!seen.insert(rec.sample_id).second) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                              ": duplicate sample_id '" + rec.sample_id + "'");
      }
      file.records.push_back(std::move(rec));
      file.record_lines.push_back(line_no);
    } catch (const json::exception& e) {
      file.errors.push_back({line_no, std::string("bad field type: ") + e.what()});
    } catch (const ValidationError& e) {
      if (std::string(e.what()).find("duplicate sample_id") != std::string::npos) throw;
      file.errors.push_back({line_no, e.what()});
    }
  }
  if (!file.records.empty() && !(file.header.normalization_constant > 0.0)) {
    double max_raw = 0.0;
    for (const auto& r : file.records) max_raw = std::max(max_raw, r.raw_score);
    file.header.normalization_constant = max_raw > 0.0 ? max_raw : 1.0;
  }
  return file;
}

void write_annotation_file(const std::filesystem::path& path, const DatasetHeader& header,
                           const std::vector<AnnotationRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write annotation file " + path.string());
  json h;
  h["schema_version"] = header.schema_version;
  h["normalization_constant"] = header.normalization_constant;
  if (!header.name.empty()) h["name"] = header.name;
  out << h.dump() << '\n';
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

std::vector<std::string> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("split manifest not found: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write manifest " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

}  // namespace mtlaqa
