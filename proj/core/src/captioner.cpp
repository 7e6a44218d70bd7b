#include "mtlaqa/captioner.hpp"

#include <algorithm>
#include <limits>

#include <torch/torch.h>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {

GruCellImpl::GruCellImpl(std::int64_t input_size, std::int64_t hidden_size)
    : hidden_size_(hidden_size) {
  input_gates_ = register_module("input_gates", torch::nn::Linear(input_size, 3 * hidden_size));
  hidden_gates_ = register_module("hidden_gates", torch::nn::Linear(hidden_size, 3 * hidden_size));
}

torch::Tensor GruCellImpl::forward(const torch::Tensor& x, const torch::Tensor& h) {
  const auto gi = input_gates_(x).chunk(3, 1);
  const auto gh = hidden_gates_(h).chunk(3, 1);
  const auto r = torch::sigmoid(gi[0] + gh[0]);
  const auto z = torch::sigmoid(gi[1] + gh[1]);
  const auto n = torch::tanh(gi[2] + r * gh[2]);
  return (1 - z) * n + z * h;
}

CaptionBatch make_caption_batch(const std::vector<const CaptionTokens*>& captions) {
  if (captions.empty()) throw ValidationError("caption batch: no captions");
  std::int64_t steps = 0;
  for (const auto* c : captions) {
    if (c->indices.size() != c->length + 2 || c->indices.front() != kStart ||
        c->indices.back() != kEnd) {
      throw ValidationError("caption must be framed as START ... END");
    }
    steps = std::max<std::int64_t>(steps, static_cast<std::int64_t>(c->length) + 1);
  }
  const auto n = static_cast<std::int64_t>(captions.size());
  auto inputs = torch::zeros({n, steps}, torch::kLong);
  auto targets = torch::zeros({n, steps}, torch::kLong);
  auto in_acc = inputs.accessor<std::int64_t, 2>();
  auto tg_acc = targets.accessor<std::int64_t, 2>();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& idx = captions[static_cast<std::size_t>(i)]->indices;
    for (std::size_t t = 0; t + 1 < idx.size(); ++t) {
      in_acc[i][static_cast<std::int64_t>(t)] = idx[t];
      tg_acc[i][static_cast<std::int64_t>(t)] = idx[t + 1];
    }
  }
  return {inputs, targets};
}

CaptionerImpl::CaptionerImpl(CaptionerConfig config) : config_(config) {
  if (config_.vocab_size <= kNumReserved) {
    throw ValidationError("captioner: vocabulary has no content tokens");
  }
  projection = register_module("projection", torch::nn::Linear(config_.feature_dim, config_.hidden_size));
  encoder = register_module("encoder", GruCell(config_.hidden_size, config_.hidden_size));
  embedding = register_module(
      "embedding", torch::nn::Embedding(config_.vocab_size, config_.embedding_size));
  decoder = register_module("decoder", GruCell(config_.embedding_size, config_.hidden_size));
  output = register_module("output", torch::nn::Linear(config_.hidden_size, config_.vocab_size));
  dropout_ = register_module("dropout", torch::nn::Dropout(config_.dropout));
}

torch::Tensor CaptionerImpl::encode(const torch::Tensor& features) {
  if (features.dim() != 3 || features.size(2) != config_.feature_dim) {
    throw ValidationError("captioner: expected features (N, S, " +
                          std::to_string(config_.feature_dim) + ")");
  }
  if (features.size(1) < 1) throw ValidationError("captioner: empty feature sequence");
  auto h = torch::zeros({features.size(0), config_.hidden_size}, features.options());
  const auto projected = dropout_(projection(features));
  for (std::int64_t s = 0; s < features.size(1); ++s) h = encoder(projected.select(1, s), h);
  return h;
}

torch::Tensor CaptionerImpl::step(const torch::Tensor& tokens, torch::Tensor& h) {
  h = decoder(dropout_(embedding(tokens)), h);
  return output(dropout_(h));
}

torch::Tensor CaptionerImpl::decode_teacher_forced(const torch::Tensor& state,
                                                   const torch::Tensor& inputs) {
  if (inputs.dim() != 2 || inputs.size(0) != state.size(0)) {
    throw ValidationError("captioner: teacher inputs must be (N, L) matching the state batch");
  }
  auto h = state;
  std::vector<torch::Tensor> logits;
  logits.reserve(static_cast<std::size_t>(inputs.size(1)));
  for (std::int64_t t = 0; t < inputs.size(1); ++t) logits.push_back(step(inputs.select(1, t), h));
  return torch::stack(logits, 1);
}

torch::Tensor CaptionerImpl::decode_teacher_forced(const torch::Tensor& state,
                                                   const CaptionTokens& target) {
  if (target.indices.empty() || target.indices.back() != kEnd) {
    throw ValidationError("captioner: target caption lacks END");
  }
  const auto batch = make_caption_batch({&target});
  const auto s = state.dim() == 1 ? state.unsqueeze(0) : state;
  return decode_teacher_forced(s, batch.inputs).squeeze(0);
}

std::vector<CaptionTokens> CaptionerImpl::decode_greedy(const torch::Tensor& state) {
  const auto n = state.size(0);
  std::vector<std::vector<std::int64_t>> content(static_cast<std::size_t>(n));
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  auto h = state;
  auto tokens = torch::full({n}, kStart, torch::TensorOptions().dtype(torch::kLong));
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::int64_t t = 0; t < config_.max_decode_steps; ++t) {
    auto logits = step(tokens, h).clone();
    logits.select(1, kPad).fill_(neg_inf);
    logits.select(1, kStart).fill_(neg_inf);
    tokens = logits.argmax(1);
    const auto acc = tokens.accessor<std::int64_t, 1>();
    bool all_done = true;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!done[ui]) {
        if (acc[i] == kEnd) done[ui] = true;
        else content[ui].push_back(acc[i]);
      }
      all_done = all_done && done[ui];
    }
    if (all_done) break;
  }
  std::vector<CaptionTokens> out;
  out.reserve(content.size());
  for (const auto& c : content) out.push_back(CaptionTokens::from_content(c));
  return out;
}

}  // namespace mtlaqa
