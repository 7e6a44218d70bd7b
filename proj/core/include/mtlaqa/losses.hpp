#pragma once

#include <array>
#include <bitset>

#include <torch/types.h>

#include "mtlaqa/dive_label.hpp"
#include "mtlaqa/tasks.hpp"

namespace mtlaqa {

using ClassLogits = std::array<torch::Tensor, kNumSubtasks>;

/// mean_i [(x_i - y_i)^2 + |x_i - y_i|]. Rejects empty or non-finite input.
torch::Tensor aqa_loss(const torch::Tensor& pred, const torch::Tensor& target);

/// Cross-entropy of one sub-task, averaged over the batch.
/// logits (N, k), labels (N) int64.
torch::Tensor subtask_cross_entropy(const torch::Tensor& logits, const torch::Tensor& labels);

/// Sum of the selected sub-task cross-entropies, mean over samples.
/// labels (N, 5) int64 in Subtask order.
torch::Tensor classification_loss(const ClassLogits& logits, const torch::Tensor& labels,
                                  std::bitset<kNumSubtasks> subtasks = std::bitset<kNumSubtasks>().set());

struct CaptionLossOptions {
  /// Divide each caption's summed NLL by its step count before the batch mean.
  bool per_token_mean = false;
};

/// Teacher-forced negative log-likelihood. step_logits (N, L, V), targets
/// (N, L) int64 padded with kPad; PAD targets are excluded. Summed over
/// steps, averaged over captions.
torch::Tensor captioning_loss(const torch::Tensor& step_logits, const torch::Tensor& targets,
                              const CaptionLossOptions& options = {});

// Closed-form gradients of the losses above with respect to their first argument.
torch::Tensor aqa_loss_grad(const torch::Tensor& pred, const torch::Tensor& target);
torch::Tensor subtask_cross_entropy_grad(const torch::Tensor& logits, const torch::Tensor& labels);
torch::Tensor captioning_loss_grad(const torch::Tensor& step_logits, const torch::Tensor& targets,
                                   const CaptionLossOptions& options = {});

struct LossReport {
  double aqa = 0.0;
  double classification = 0.0;
  double captioning = 0.0;
  double total = 0.0;
};

/// Per-task scalar losses; undefined tensors for tasks that did not run.
struct LossTerms {
  torch::Tensor aqa;
  torch::Tensor classification;
  torch::Tensor captioning;
};

struct WeightedLoss {
  torch::Tensor total;
  LossReport report;
};

/// alpha*aqa + beta*cls + gamma*cap over the active tasks. Inactive tasks
/// report 0. Requires the AQA task.
WeightedLoss total_loss(const LossTerms& terms, const LossWeights& weights, const TaskConfig& tasks);

}  // namespace mtlaqa
