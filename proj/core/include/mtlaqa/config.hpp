#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlaqa/losses.hpp"
#include "mtlaqa/networks.hpp"
#include "mtlaqa/preprocess.hpp"
#include "mtlaqa/tasks.hpp"

namespace mtlaqa {

enum class LrSchedule { kConstant, kCosine };

struct OptimizerConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  LrSchedule schedule = LrSchedule::kConstant;
  /// 0 disables clipping.
  double clip_grad_norm = 0.0;
};

struct ProbeConfig {
  std::vector<std::string> layers{"c1", "c2", "c3", "c4", "c5"};
  double lambda = 1e-3;
};

/// Everything a run needs; serialized verbatim into config.json.
struct ExperimentConfig {
  Architecture architecture = Architecture::kC3dAvg;
  Profile profile = Profile::kStandard;
  OptimizerConfig optimizer;
  std::int64_t epochs = 100;
  std::int64_t batch_size = 3;
  std::uint64_t seed = 0;
  LossWeights weights;
  TaskConfig tasks = TaskConfig::all();
  CaptionLossOptions caption;
  bool share_fc = true;
  bool augment = true;
  /// Overrides every dropout rate of the network.
  std::optional<double> dropout;
  /// Empty: random init. Otherwise the trunk is loaded from this tensor file.
  std::string pretrained_trunk;
  ProbeConfig probe;
  std::vector<std::int64_t> sweep_sizes;

  void validate() const;

  [[nodiscard]] NetworkConfig network(std::int64_t vocab_size) const;
  [[nodiscard]] PreprocessConfig preprocess() const;
  [[nodiscard]] TaskConfig effective_tasks() const;
};

std::string to_json(const ExperimentConfig& config, int indent = 2);

/// Unknown keys and ill-typed values throw ValidationError naming the key.
ExperimentConfig parse_config(std::string_view json_text);

/// dotted.key=value, value parsed as JSON and otherwise taken as a string.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Defaults, then the file (if any), then each override in order.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides = {});

/// Canonical JSON of a network configuration and its fingerprint.
std::string network_json(const NetworkConfig& config);
NetworkConfig network_from_json(std::string_view json_text);

}  // namespace mtlaqa
