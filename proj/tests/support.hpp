#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mtlaqa/dataset.hpp"
#include "mtlaqa/synthetic.hpp"

namespace mtlaqa::testkit {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mtlaqa_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Synthetic dataset loaded with captions encoded against its vocab.txt.
struct SyntheticFixture {
  Dataset dataset;
  Vocabulary vocab;
};

inline SyntheticFixture load_synthetic(const std::filesystem::path& root, const SyntheticSpec& spec) {
  generate_synthetic(spec, root);
  const DataDir dir{root};
  SyntheticFixture f{load_dataset(dir.annotations(), dir.frames()), {}};
  f.vocab = dataset_vocabulary(f.dataset, dir);
  encode_captions(f.dataset, f.vocab);
  return f;
}

}  // namespace mtlaqa::testkit
