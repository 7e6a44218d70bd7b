#include <limits>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "mtlaqa/captioner.hpp"
#include "mtlaqa/errors.hpp"
#include "mtlaqa/losses.hpp"
#include "oracles.hpp"

using namespace mtlaqa;

namespace {

CaptionerConfig small_config() {
  CaptionerConfig c;
  c.feature_dim = 20;
  c.hidden_size = 16;
  c.embedding_size = 8;
  c.vocab_size = 12;
  c.dropout = 0.0;
  return c;
}

torch::Tensor param(torch::nn::Module& m, const std::string& name) { return m.named_parameters()[name]; }

}  // namespace

TEST(GruCell, MatchesReferenceCell) {
  torch::manual_seed(1);
  GruCell cell(6, 5);
  torch::nn::GRUCell reference(torch::nn::GRUCellOptions(6, 5));
  {
    torch::NoGradGuard guard;
    reference->weight_ih.copy_(param(*cell, "input_gates.weight"));
    reference->bias_ih.copy_(param(*cell, "input_gates.bias"));
    reference->weight_hh.copy_(param(*cell, "hidden_gates.weight"));
    reference->bias_hh.copy_(param(*cell, "hidden_gates.bias"));
  }
  const auto x = torch::randn({4, 6});
  const auto h = torch::randn({4, 5});
  EXPECT_LT((cell(x, h) - reference(x, h)).abs().max().item<float>(), 1e-6F);
}

TEST(Captioner, EncodeSingleStepAndShapes) {
  torch::NoGradGuard guard;
  Captioner cap(small_config());
  cap->eval();
  const auto f = torch::randn({3, 1, 20});
  const auto expected = cap->encoder(cap->projection(f.select(1, 0)), torch::zeros({3, 16}));
  EXPECT_TRUE(torch::allclose(cap->encode(f), expected));
  for (std::int64_t s : {2, 6}) EXPECT_EQ(cap->encode(torch::randn({2, s, 20})).sizes().vec(), (std::vector<std::int64_t>{2, 16}));
  EXPECT_THROW(cap->encode(torch::randn({2, 0, 20})), ValidationError);
  EXPECT_THROW(cap->encode(torch::randn({2, 3, 19})), ValidationError);
}

TEST(Captioner, ZeroFeaturesZeroBiasesGiveZeroState) {
  torch::NoGradGuard guard;
  Captioner cap(small_config());
  for (auto& p : cap->named_parameters()) {
    if (p.key().ends_with("bias")) p.value().zero_();
  }
  EXPECT_EQ(cap->encode(torch::zeros({2, 6, 20})).abs().max().item<float>(), 0.0F);
}

TEST(Captioner, TeacherForcedStepsAndNormalization) {
  torch::NoGradGuard guard;
  Captioner cap(small_config());
  cap->eval();
  const auto state = torch::randn({16});
  const auto target = CaptionTokens::from_content(std::vector<std::int64_t>{7});
  const auto logits = cap->decode_teacher_forced(state, target);
  EXPECT_EQ(logits.sizes().vec(), (std::vector<std::int64_t>{2, 12}));
  EXPECT_TRUE(torch::equal(logits, cap->decode_teacher_forced(state, target)));
  EXPECT_LT((torch::softmax(logits, 1).sum(1) - 1).abs().max().item<float>(), 1e-6F);
  CaptionTokens no_end{{kStart, 7}, 1};
  EXPECT_THROW(cap->decode_teacher_forced(state, no_end), ValidationError);
}

TEST(Captioner, GreedyStopsAtEndOrCap) {
  torch::NoGradGuard guard;
  Captioner cap(small_config());
  cap->eval();
  cap->output->weight.zero_();
  cap->output->bias.zero_();
  cap->output->bias[kEnd] = 10.0F;
  const auto state = torch::randn({2, 16});
  for (const auto& c : cap->decode_greedy(state)) {
    EXPECT_EQ(c.indices, (std::vector<std::int64_t>{kStart, kEnd}));
  }
  cap->output->bias[kEnd] = -10.0F;
  cap->output->bias[kPad] = 50.0F;  // masked: never emitted
  cap->output->bias[5] = 10.0F;
  const auto first = cap->decode_greedy(state);
  for (const auto& c : first) {
    EXPECT_EQ(c.length, kMaxCaptionTokens);
    EXPECT_EQ(c.indices.back(), kEnd);
    for (auto t : c.content()) EXPECT_EQ(t, 5);
  }
  EXPECT_EQ(first, cap->decode_greedy(state));
}

TEST(Captioner, GreedyIsLocallyOptimal) {
  torch::NoGradGuard guard;
  torch::manual_seed(13);
  auto config = small_config();
  config.max_decode_steps = 15;
  Captioner cap(config);
  cap->eval();
  const auto states = torch::randn({6, 16}) * 3.0;
  const auto greedy = cap->decode_greedy(states);
  for (std::int64_t i = 0; i < states.size(0); ++i) {
    const auto& g = greedy[static_cast<std::size_t>(i)];
    const bool ended = static_cast<std::int64_t>(g.length) < config.max_decode_steps;
    const auto log_probs = torch::log_softmax(cap->decode_teacher_forced(states[i], g), 1);
    const auto steps = static_cast<std::int64_t>(g.length) + (ended ? 1 : 0);
    for (std::int64_t t = 0; t < steps; ++t) {
      const auto chosen = g.indices[static_cast<std::size_t>(t + 1)];
      const double chosen_nll = -log_probs[t][chosen].item<double>();
      for (std::int64_t v = 0; v < config.vocab_size; ++v) {
        if (v == kPad || v == kStart) continue;
        EXPECT_LE(chosen_nll, -log_probs[t][v].item<double>() + 1e-6);
      }
    }
  }
}

TEST(Captioner, StateGradientMatchesFiniteDifferences) {
  torch::manual_seed(17);
  Captioner cap(small_config());
  cap->to(torch::kDouble);
  cap->eval();
  const auto inputs = torch::tensor(std::vector<std::int64_t>{kStart, 6, 9, 4}).view({1, 4});
  const auto targets = torch::tensor(std::vector<std::int64_t>{6, 9, 4, kEnd}).view({1, 4});
  const auto state = torch::randn({1, 16}, torch::kDouble) * 0.5;
  auto f = [&](const torch::Tensor& s) {
    return captioning_loss(cap->decode_teacher_forced(s, inputs), targets).item<double>();
  };
  const auto fd = testkit::central_difference(f, state, 1e-3);
  auto s = state.clone().requires_grad_(true);
  captioning_loss(cap->decode_teacher_forced(s, inputs), targets).backward();
  EXPECT_LT(testkit::relative_error(s.grad(), fd), 1e-3);
}

TEST(CaptionBatch, PadsToLongest) {
  const auto a = CaptionTokens::from_content(std::vector<std::int64_t>{5, 6, 7});
  const auto b = CaptionTokens::from_content(std::vector<std::int64_t>{8});
  const auto batch = make_caption_batch({&a, &b});
  EXPECT_TRUE(torch::equal(batch.inputs, torch::tensor(std::vector<std::int64_t>{kStart, 5, 6, 7, kStart, 8, kPad, kPad}).view({2, 4})));
  EXPECT_TRUE(torch::equal(batch.targets, torch::tensor(std::vector<std::int64_t>{5, 6, 7, kEnd, 8, kEnd, kPad, kPad}).view({2, 4})));
}
