#pragma once

#include <cstdint>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/modules/dropout.h>
#include <torch/nn/modules/embedding.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/pimpl.h>

#include "mtlaqa/vocabulary.hpp"

namespace mtlaqa {

/// Gated recurrent unit:
///   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
class GruCellImpl : public torch::nn::Module {
 public:
  GruCellImpl(std::int64_t input_size, std::int64_t hidden_size);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& h);
  [[nodiscard]] std::int64_t hidden_size() const { return hidden_size_; }

 private:
  std::int64_t hidden_size_;
  torch::nn::Linear input_gates_{nullptr};
  torch::nn::Linear hidden_gates_{nullptr};
};
TORCH_MODULE(GruCell);

struct CaptionerConfig {
  std::int64_t feature_dim = 8192;
  std::int64_t hidden_size = 512;
  std::int64_t embedding_size = 512;
  std::int64_t vocab_size = kNumReserved;
  double dropout = 0.2;
  std::int64_t max_decode_steps = static_cast<std::int64_t>(kMaxCaptionTokens);
};

/// Teacher-forcing tensors for a batch of captions, padded with kPad.
struct CaptionBatch {
  torch::Tensor inputs;   // (N, L): START, content...
  torch::Tensor targets;  // (N, L): content..., END
};
CaptionBatch make_caption_batch(const std::vector<const CaptionTokens*>& captions);

/// Encoder-decoder over a sequence of feature vectors: a learned projection
/// into the encoder GRU, whose final state seeds the decoder GRU.
class CaptionerImpl : public torch::nn::Module {
 public:
  explicit CaptionerImpl(CaptionerConfig config);

  /// features (N, S, feature_dim) -> final hidden state (N, hidden).
  torch::Tensor encode(const torch::Tensor& features);

  /// state (N, hidden), inputs (N, L) -> vocabulary logits (N, L, V).
  torch::Tensor decode_teacher_forced(const torch::Tensor& state, const torch::Tensor& inputs);

  /// Single caption form: one logit row per content token plus END.
  torch::Tensor decode_teacher_forced(const torch::Tensor& state, const CaptionTokens& target);

  /// Argmax decoding from START until END or max_decode_steps content
  /// tokens. PAD and START are never emitted.
  std::vector<CaptionTokens> decode_greedy(const torch::Tensor& state);

  [[nodiscard]] const CaptionerConfig& config() const { return config_; }

  GruCell encoder{nullptr};
  GruCell decoder{nullptr};
  torch::nn::Linear projection{nullptr};
  torch::nn::Embedding embedding{nullptr};
  torch::nn::Linear output{nullptr};

 private:
  torch::Tensor step(const torch::Tensor& tokens, torch::Tensor& h);

  CaptionerConfig config_;
  torch::nn::Dropout dropout_{nullptr};
};
TORCH_MODULE(Captioner);

}  // namespace mtlaqa
