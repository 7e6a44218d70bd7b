#include <random>

#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include "mtlaqa/metrics.hpp"
#include "mtlaqa/networks.hpp"
#include "mtlaqa/preprocess.hpp"
#include "mtlaqa/synthetic.hpp"

using namespace mtlaqa;

namespace {

void BM_TinyForward(benchmark::State& state, Architecture arch) {
  torch::NoGradGuard guard;
  auto net = make_network(NetworkConfig::tiny(arch, 30));
  init_weights(*net, {InitScheme::Kind::kRandom, 1, {}, {}});
  net->eval();
  const auto& c = net->config();
  const auto x = torch::randn({3, 3, c.input_frames(), c.crop(), c.crop()});
  for (auto _ : state) benchmark::DoNotOptimize(net->forward(x, TaskConfig::all()).score);
}
BENCHMARK_CAPTURE(BM_TinyForward, c3d_avg, Architecture::kC3dAvg)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TinyForward, mscadc, Architecture::kMscadc)->Unit(benchmark::kMillisecond);

void BM_C3dTrunkClip(benchmark::State& state) {
  torch::NoGradGuard guard;
  C3dTrunk trunk;
  trunk->eval();
  const auto x = torch::randn({1, 3, 16, 112, 112});
  for (auto _ : state) benchmark::DoNotOptimize(trunk(x));
}
BENCHMARK(BM_C3dTrunkClip)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Spearman(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = normal(rng), b[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(spearman(a, b));
}
BENCHMARK(BM_Spearman)->Arg(300)->Arg(3000);

void BM_CaptionMetrics(benchmark::State& state) {
  std::vector<TokenSeq> hyps, refs;
  for (std::int64_t i = 0; i < 64; ++i) {
    SyntheticLatents a, b;
    a.bounces = i % 10, a.oscillations = i % 8, a.direction = i % 4;
    b = a;
    b.size_class = (i + 1) % 3;
    hyps.push_back(tokenize(synthetic_caption(a)));
    refs.push_back(tokenize(synthetic_caption(b)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(caption_metrics(hyps, refs));
}
BENCHMARK(BM_CaptionMetrics);

void BM_Augment(benchmark::State& state) {
  SyntheticSpec spec;
  const auto sample = render_synthetic_sample(spec, 0);
  const auto cfg = PreprocessConfig::for_network(Architecture::kC3dAvg, Profile::kStandard);
  std::mt19937_64 rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(augment(sample.frames, cfg, Mode::kTrain, rng));
}
BENCHMARK(BM_Augment)->Unit(benchmark::kMillisecond);

void BM_RenderSynthetic(benchmark::State& state) {
  SyntheticSpec spec;
  std::int64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_synthetic_sample(spec, i++));
}
BENCHMARK(BM_RenderSynthetic)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
