#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtlaqa/config.hpp"
#include "mtlaqa/trainer.hpp"

namespace mtlaqa {

/// Labelled grid of optional values (empty cells print as null / "n/a").
struct ResultTable {
  std::string title;
  std::string corner;  // header of the row-label column
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> cells;  // rows x columns

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_text() const;
};

struct AblationResult {
  ResultTable table;  // test Spearman at the final epoch
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Rows AQA, + Cls, + Caps, + Cls + Caps; one column per architecture. Every
/// arm uses the same seed, epochs and sample ids. Per-arm run directories go
/// under `run_root` when it is non-empty.
AblationResult run_ablation(const ExperimentConfig& base, const std::vector<Architecture>& architectures,
                            const TrainData& data, const std::filesystem::path& run_root = {},
                            bool verbose = false);

/// The first `size` ids of one seeded permutation of the train set, so the
/// subsets are nested and shared by both arms.
std::vector<std::size_t> sweep_subset(std::size_t train_size, std::size_t size, std::uint64_t seed);

/// Rows STL and MTL, one column per size.
ResultTable run_size_sweep(const ExperimentConfig& config, const TrainData& data,
                           const std::vector<std::int64_t>& sizes,
                           const std::filesystem::path& run_root = {}, bool verbose = false);

}  // namespace mtlaqa
