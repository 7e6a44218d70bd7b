#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <torch/types.h>

#include "mtlaqa/captioner.hpp"
#include "mtlaqa/config.hpp"
#include "mtlaqa/dataset.hpp"
#include "mtlaqa/metrics.hpp"
#include "mtlaqa/networks.hpp"
#include "mtlaqa/preprocess.hpp"

namespace mtlaqa {

/// Network tensors plus what is needed to rebuild and feed the network.
struct CheckpointMeta {
  NetworkConfig network;
  Vocabulary vocab;
  double normalization_constant = 1.0;
  PreprocessConfig preprocess;
  std::int64_t epoch = 0;
  std::string experiment_json;  // full ExperimentConfig, informational
  bool aborted = false;
};

void save_checkpoint(const std::filesystem::path& path, const MtlNetworkImpl& network,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  MtlNetwork network;
  CheckpointMeta meta;
};

/// Rebuilds the network from the stored config. A fingerprint or tensor
/// mismatch throws ValidationError.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

struct Batch {
  torch::Tensor video;   // (N, 3, T, H, W)
  torch::Tensor scores;  // (N) normalized
  torch::Tensor labels;  // (N, 5) int64
  CaptionBatch captions;
};

/// Per-sample augmentation streams are seeded from (seed, key) so a batch is
/// reproducible independently of loading order.
Batch make_batch(const SampleSet& samples, const std::vector<std::size_t>& indices,
                 const PreprocessConfig& preprocess, Mode mode, std::uint64_t seed,
                 std::uint64_t key);

/// Frozen evaluation: Spearman on scores, sub-task accuracy, greedy-decoded
/// caption metrics and teacher-forced caption NLL for the tasks that run.
EvalReport evaluate(MtlNetworkImpl& network, const SampleSet& samples,
                    const PreprocessConfig& preprocess, const TaskConfig& tasks,
                    const Vocabulary& vocab, std::int64_t batch_size = 3);

struct TrainData {
  SampleSet train;
  SampleSet eval;  // evaluated after every epoch; train is used when empty
  Vocabulary vocab;
  double normalization_constant = 1.0;
};

struct EpochRecord {
  std::int64_t epoch = 0;  // 1-based
  LossReport loss;         // sample-weighted mean over the epoch's batches
  EvalReport eval;
  double lr = 0.0;
  double seconds = 0.0;
};

struct RunOptions {
  /// Empty: nothing is written.
  std::filesystem::path run_dir;
  bool verbose = false;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::int64_t best_epoch = 0;
  std::optional<double> best_spearman;
  MtlNetwork network;
};

/// Adam on the weighted objective with per-epoch shuffling. A non-finite
/// loss writes the pre-step weights to ckpt_final and throws RuntimeFailure.
TrainResult train(const ExperimentConfig& config, const TrainData& data,
                  const RunOptions& options = {});

/// Loss of one forward pass in the current module mode.
WeightedLoss batch_loss(MtlNetworkImpl& network, const Batch& batch, const TaskConfig& tasks,
                        const LossWeights& weights, const CaptionLossOptions& caption);

std::string epoch_json(const EpochRecord& record);

}  // namespace mtlaqa
