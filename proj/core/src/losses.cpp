#include "mtlaqa/losses.hpp"

#include <torch/torch.h>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

void require_finite(const torch::Tensor& t, const char* what) {
  if (!torch::isfinite(t).all().item<bool>()) {
    throw NonFiniteError(std::string(what) + ": non-finite values");
  }
}

void check_labels(const torch::Tensor& logits, const torch::Tensor& labels) {
  if (logits.dim() != 2) throw ValidationError("class logits must be (N, k)");
  if (labels.dim() != 1 || labels.size(0) != logits.size(0)) {
    throw ValidationError("class labels must be (N) matching the logits batch");
  }
  if (labels.numel() == 0) throw ValidationError("classification loss: empty batch");
  const auto k = logits.size(1);
  if ((labels < 0).any().item<bool>() || (labels >= k).any().item<bool>()) {
    throw ValidationError("class label index out of range [0, " + std::to_string(k) + ")");
  }
}

void check_caption_shapes(const torch::Tensor& step_logits, const torch::Tensor& targets) {
  if (step_logits.dim() != 3) throw ValidationError("caption logits must be (N, L, V)");
  if (targets.dim() != 2 || targets.size(0) != step_logits.size(0) ||
      targets.size(1) != step_logits.size(1)) {
    throw ValidationError("caption targets (N, L) do not match logits steps");
  }
  if (targets.size(0) == 0) throw ValidationError("captioning loss: empty batch");
  const auto vocab = step_logits.size(2);
  if ((targets < 0).any().item<bool>() || (targets >= vocab).any().item<bool>()) {
    throw ValidationError("caption target index outside vocabulary");
  }
}

// Per-caption weights applied to each step's NLL: 1 (sum) or 1/steps.
torch::Tensor step_weights(const torch::Tensor& targets, const CaptionLossOptions& options,
                           torch::ScalarType dtype) {
  auto mask = targets.ne(0).to(dtype);
  if (options.per_token_mean) {
    auto steps = mask.sum(1, true).clamp_min(1.0);
    mask = mask / steps;
  }
  return mask;
}

}  // namespace

torch::Tensor aqa_loss(const torch::Tensor& pred, const torch::Tensor& target) {
  if (pred.numel() == 0) throw ValidationError("aqa loss: empty batch");
  if (pred.sizes() != target.sizes()) throw ValidationError("aqa loss: shape mismatch");
  require_finite(pred, "aqa prediction");
  require_finite(target, "aqa target");
  const auto diff = pred - target;
  return (diff.square() + diff.abs()).mean();
}

torch::Tensor aqa_loss_grad(const torch::Tensor& pred, const torch::Tensor& target) {
  if (pred.numel() == 0) throw ValidationError("aqa loss: empty batch");
  const auto diff = pred - target;
  // sign(0) == 0 gives the zero subgradient at the kink.
  return (2.0 * diff + diff.sign()) / static_cast<double>(pred.numel());
}

torch::Tensor subtask_cross_entropy(const torch::Tensor& logits, const torch::Tensor& labels) {
  check_labels(logits, labels);
  const auto log_probs = torch::log_softmax(logits, 1);
  return -log_probs.gather(1, labels.unsqueeze(1)).mean();
}

torch::Tensor subtask_cross_entropy_grad(const torch::Tensor& logits, const torch::Tensor& labels) {
  check_labels(logits, labels);
  auto grad = torch::softmax(logits, 1);
  grad.scatter_add_(1, labels.unsqueeze(1),
                    -torch::ones({labels.size(0), 1}, logits.options()));
  return grad / static_cast<double>(logits.size(0));
}

torch::Tensor classification_loss(const ClassLogits& logits, const torch::Tensor& labels,
                                  std::bitset<kNumSubtasks> subtasks) {
  if (labels.dim() != 2 || labels.size(1) != static_cast<std::int64_t>(kNumSubtasks)) {
    throw ValidationError("classification labels must be (N, 5)");
  }
  torch::Tensor total;
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    if (!subtasks.test(i)) continue;
    auto term = subtask_cross_entropy(logits[i], labels.select(1, static_cast<std::int64_t>(i)));
    total = total.defined() ? total + term : term;
  }
  if (!total.defined()) throw ValidationError("classification loss: no sub-task selected");
  return total;
}

torch::Tensor captioning_loss(const torch::Tensor& step_logits, const torch::Tensor& targets,
                              const CaptionLossOptions& options) {
  check_caption_shapes(step_logits, targets);
  const auto log_probs = torch::log_softmax(step_logits, 2);
  const auto nll = -log_probs.gather(2, targets.unsqueeze(2)).squeeze(2);
  const auto weights = step_weights(targets, options, nll.scalar_type());
  return (nll * weights).sum() / static_cast<double>(targets.size(0));
}

torch::Tensor captioning_loss_grad(const torch::Tensor& step_logits, const torch::Tensor& targets,
                                   const CaptionLossOptions& options) {
  check_caption_shapes(step_logits, targets);
  auto grad = torch::softmax(step_logits, 2);
  grad.scatter_add_(2, targets.unsqueeze(2),
                    -torch::ones({targets.size(0), targets.size(1), 1}, step_logits.options()));
  const auto weights = step_weights(targets, options, grad.scalar_type());
  return grad * weights.unsqueeze(2) / static_cast<double>(targets.size(0));
}

WeightedLoss total_loss(const LossTerms& terms, const LossWeights& weights, const TaskConfig& tasks) {
  if (!tasks.aqa) throw ValidationError("total loss requires the AQA task");
  if (!terms.aqa.defined()) throw ValidationError("total loss: missing AQA term");
  const TaskConfig active = effective_tasks(tasks, weights);

  WeightedLoss out;
  out.report.aqa = terms.aqa.item<double>();
  out.total = weights.alpha * terms.aqa;
  if (active.classification) {
    if (!terms.classification.defined()) throw ValidationError("total loss: missing classification term");
    out.report.classification = terms.classification.item<double>();
    out.total = out.total + weights.beta * terms.classification;
  }
  if (active.captioning) {
    if (!terms.captioning.defined()) throw ValidationError("total loss: missing captioning term");
    out.report.captioning = terms.captioning.item<double>();
    out.total = out.total + weights.gamma * terms.captioning;
  }
  out.report.total = out.total.item<double>();
  return out;
}

std::string TaskConfig::row_name() const {
  if (classification && captioning) return "+ Cls + Caps";
  if (classification) return "+ Cls";
  if (captioning) return "+ Caps";
  return "AQA";
}

TaskConfig effective_tasks(const TaskConfig& tasks, const LossWeights& weights) {
  if (weights.alpha < 0 || weights.beta < 0 || weights.gamma < 0) {
    throw ValidationError("loss weights must be non-negative");
  }
  return {true, tasks.classification && weights.beta > 0.0,
          tasks.captioning && weights.gamma > 0.0};
}

}  // namespace mtlaqa
