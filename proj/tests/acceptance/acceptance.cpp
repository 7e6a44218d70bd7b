#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "cli.hpp"
#include "mtlaqa/captioner.hpp"
#include "mtlaqa/config.hpp"
#include "mtlaqa/dataset.hpp"
#include "mtlaqa/losses.hpp"
#include "mtlaqa/metrics.hpp"
#include "mtlaqa/networks.hpp"
#include "mtlaqa/synthetic.hpp"
#include "mtlaqa/trainer.hpp"
#include "mtlaqa/vocabulary.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mtlaqa;

namespace {

/// Collects failed conditions for one criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << " = " << actual << ", expected " << expected << " +/- " << tol;
    expect(std::abs(actual - expected) <= tol, s.str());
  }
  void below(double actual, double bound, const std::string& what) {
    std::ostringstream s;
    s << what << " = " << actual << ", bound " << bound;
    expect(actual < bound, s.str());
  }
  void note(const std::string& n) { notes_.push_back(n); }

  [[nodiscard]] bool ok() const { return failures_.empty(); }
  [[nodiscard]] std::string summary() const {
    std::ostringstream s;
    if (ok()) {
      s << count_ << " checks";
      for (const auto& n : notes_) s << "; " << n;
    } else {
      s << failures_.size() << "/" << count_ << " failed: " << failures_.front();
      for (std::size_t i = 1; i < failures_.size() && i < 4; ++i) s << " | " << failures_[i];
    }
    return s.str();
  }

 private:
  int count_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

torch::Tensor dvec(std::vector<double> v) { return torch::tensor(v, torch::kDouble); }

torch::Tensor labels(std::vector<std::int64_t> v) {
  return torch::tensor(v, torch::kLong).view({1, static_cast<std::int64_t>(v.size())});
}

ClassLogits uniform_logits() {
  const auto card = DiveLabelSchema::standard().cardinalities();
  ClassLogits out;
  for (std::size_t i = 0; i < kNumSubtasks; ++i) out[i] = torch::zeros({1, card[i]}, torch::kDouble);
  return out;
}

std::vector<std::int64_t> dims(const torch::Tensor& t) { return t.sizes().vec(); }

std::string shape_string(const std::vector<std::int64_t>& d) {
  std::string s = "(";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + ")";
}

void expect_shape(Checker& c, const torch::Tensor& t, const std::vector<std::int64_t>& want,
                  const std::string& what) {
  const auto got = t.defined() ? dims(t) : std::vector<std::int64_t>{};
  c.expect(got == want, what + " " + shape_string(got) + " != " + shape_string(want));
}

// 1. loss oracles
void loss_oracles(Checker& c) {
  c.near(aqa_loss(dvec({1, 2}), dvec({1, 4})).item<double>(), (0 + 0 + 4 + 2) / 2.0, 1e-6, "aqa (1,2)/(1,4)");
  c.near(aqa_loss(dvec({3}), dvec({1})).item<double>(), 2.0 * 2.0 + 2.0, 1e-6, "aqa (3)/(1)");
  c.near(aqa_loss(dvec({0.5, -1}), dvec({0.5, -1})).item<double>(), 0.0, 1e-12, "aqa identity");

  const double ln_sum = std::log(3.0) + std::log(2.0) + std::log(4.0) + std::log(10.0) + std::log(8.0);
  c.near(classification_loss(uniform_logits(), labels({1, 0, 2, 5, 7})).item<double>(), ln_sum, 1e-6,
         "uniform cross-entropy");

  auto one = uniform_logits();
  one[0] = torch::log(dvec({0.7, 0.2, 0.1})).view({1, 3});
  std::bitset<kNumSubtasks> position;
  position.set(0);
  c.near(classification_loss(one, labels({0, 0, 0, 0, 0}), position).item<double>(), -std::log(0.7), 1e-6,
         "single sub-task cross-entropy");

  auto saturated = uniform_logits();
  const std::vector<std::int64_t> y{2, 1, 3, 9, 0};
  for (std::size_t i = 0; i < kNumSubtasks; ++i) saturated[i][0][y[i]] = 100.0;
  c.below(classification_loss(saturated, labels(y)).item<double>(), 1e-10, "margin-100 cross-entropy");

  const auto cap_logits = torch::zeros({1, 2, 10}, torch::kDouble);
  const auto cap_targets = torch::tensor(std::vector<std::int64_t>{7, kEnd}).view({1, 2});
  const double cap_value = captioning_loss(cap_logits, cap_targets).item<double>();
  c.near(cap_value, 2.0 * std::log(10.0), 1e-6, "caption loss, 2 uniform steps");
  c.near(captioning_loss(torch::cat({cap_logits, cap_logits}), torch::cat({cap_targets, cap_targets})).item<double>(),
         cap_value, 1e-12, "caption loss batch mean");

  LossTerms terms{dvec({3.0}).squeeze(), dvec({7.4759}).squeeze(), dvec({4.60517}).squeeze()};
  c.near(total_loss(terms, LossWeights{1, 1, 0.01}, TaskConfig::all()).report.total,
         1.0 * 3.0 + 1.0 * 7.4759 + 0.01 * 4.60517, 1e-6, "weighted total");
  c.near(total_loss(terms, LossWeights{1, 1, 0.01}, TaskConfig::stl()).report.total, 3.0, 1e-12, "AQA-only total");
  c.near(total_loss(terms, LossWeights{0, 0, 0}, TaskConfig::all()).report.total, 0.0, 0.0, "zero-weight total");
}

// Relative error restricted to entries where mask is true.
double masked_relative_error(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& mask) {
  return testkit::relative_error(a.masked_select(mask), b.masked_select(mask));
}

// 2. gradient checks
void gradient_checks(Checker& c) {
  torch::manual_seed(101);
  const auto x = torch::randn({32}, torch::kDouble);
  const auto t = torch::randn({32}, torch::kDouble);
  const auto mask = (x - t).abs() >= 1e-2;
  const auto fd_aqa =
      testkit::central_difference([&](const torch::Tensor& p) { return aqa_loss(p, t).item<double>(); }, x, 1e-4);
  auto xa = x.clone().requires_grad_(true);
  aqa_loss(xa, t).backward();
  c.below(masked_relative_error(aqa_loss_grad(x, t), fd_aqa, mask), 1e-4, "aqa closed-form gradient");
  c.below(masked_relative_error(xa.grad(), fd_aqa, mask), 1e-4, "aqa autograd gradient");

  const auto card = DiveLabelSchema::standard().cardinalities();
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    const auto z = torch::randn({4, card[i]}, torch::kDouble) * 2.0;
    const auto y = torch::randint(card[i], {4}, torch::kLong);
    const auto fd = testkit::central_difference(
        [&](const torch::Tensor& p) { return subtask_cross_entropy(p, y).item<double>(); }, z, 1e-4);
    auto za = z.clone().requires_grad_(true);
    subtask_cross_entropy(za, y).backward();
    c.below(testkit::relative_error(subtask_cross_entropy_grad(z, y), fd), 1e-4,
            "cross-entropy closed-form gradient, sub-task " + std::to_string(i));
    c.below(testkit::relative_error(za.grad(), fd), 1e-4, "cross-entropy autograd gradient, sub-task " + std::to_string(i));
  }

  const auto z = torch::randn({3, 5, 11}, torch::kDouble);
  const auto y = torch::tensor(std::vector<std::int64_t>{4, 5, 9, kEnd, kPad, 6, kEnd, kPad, kPad, kPad, 3, 8, 10, 7, kEnd})
                     .view({3, 5});
  for (bool per_token : {false, true}) {
    CaptionLossOptions opts;
    opts.per_token_mean = per_token;
    const auto fd = testkit::central_difference(
        [&](const torch::Tensor& p) { return captioning_loss(p, y, opts).item<double>(); }, z, 1e-4);
    auto za = z.clone().requires_grad_(true);
    captioning_loss(za, y, opts).backward();
    const std::string tag = per_token ? " (per-token mean)" : "";
    c.below(testkit::relative_error(captioning_loss_grad(z, y, opts), fd), 1e-4, "caption closed-form gradient" + tag);
    c.below(testkit::relative_error(za.grad(), fd), 1e-4, "caption autograd gradient" + tag);
  }

  // recurrent path: caption loss with respect to the encoder state
  const std::int64_t vocab = 26 + kNumReserved;
  auto cfg = NetworkConfig::tiny(Architecture::kC3dAvg, vocab).captioner;
  cfg.dropout = 0.0;
  torch::manual_seed(102);
  Captioner cap(cfg);
  cap->to(torch::kDouble);
  cap->eval();
  const auto inputs = torch::tensor(std::vector<std::int64_t>{kStart, 7, 12, 9, 20}).view({1, 5});
  const auto targets = torch::tensor(std::vector<std::int64_t>{7, 12, 9, 20, kEnd}).view({1, 5});
  const auto state = torch::randn({1, cfg.hidden_size}, torch::kDouble) * 0.5;
  const auto fd = testkit::central_difference(
      [&](const torch::Tensor& s) {
        return captioning_loss(cap->decode_teacher_forced(s, inputs), targets).item<double>();
      },
      state, 1e-4);
  auto s = state.clone().requires_grad_(true);
  captioning_loss(cap->decode_teacher_forced(s, inputs), targets).backward();
  c.below(testkit::relative_error(s.grad(), fd), 1e-3, "captioner state gradient");
}

torch::Tensor teacher_inputs(std::int64_t n, std::int64_t len, std::int64_t vocab) {
  return torch::randint(kNumReserved, vocab, {n, len}, torch::kLong)
      .index_put_({torch::indexing::Slice(), 0}, kStart);
}

void expect_class_shapes(Checker& c, const MtlOutput& out, std::int64_t n, const std::string& arch) {
  const auto card = DiveLabelSchema::standard().cardinalities();
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    expect_shape(c, out.class_logits[i], {n, card[i]}, arch + " class logits " + std::to_string(i));
  }
}

// 3. shape suite at full size
void shape_suite(Checker& c) {
  torch::NoGradGuard guard;
  constexpr std::int64_t kVocab = 30, kLen = 7, kN = 3;
  {
    auto net = make_network(NetworkConfig::standard(Architecture::kC3dAvg, kVocab));
    init_weights(*net, {InitScheme::Kind::kRandom, 1, {}, {}});
    net->eval();
    const auto out = net->forward(torch::randn({kN, 3, 96, 112, 112}), TaskConfig::all(), teacher_inputs(kN, kLen, kVocab));
    expect_shape(c, out.score, {kN}, "c3d_avg score");
    expect_class_shapes(c, out, kN, "c3d_avg");
    expect_shape(c, out.caption_logits, {kN, kLen, kVocab}, "c3d_avg caption logits");
    expect_shape(c, out.caption_features, {kN, 6, 8192}, "c3d_avg clip features");
    expect_shape(c, out.video_feature, {kN, 8192}, "c3d_avg video feature");
    const auto pool5 = std::dynamic_pointer_cast<C3dAvgMtlImpl>(net)->trunk(torch::randn({1, 3, 16, 112, 112}));
    expect_shape(c, pool5, {1, 512, 1, 4, 4}, "c3d pool-5");
  }
  {
    auto net = make_network(NetworkConfig::standard(Architecture::kMscadc, kVocab));
    init_weights(*net, {InitScheme::Kind::kRandom, 1, {}, {}});
    net->eval();
    const auto out = net->forward(torch::randn({kN, 3, 16, 180, 180}), TaskConfig::all(), teacher_inputs(kN, kLen, kVocab));
    expect_shape(c, out.score, {kN}, "mscadc score");
    expect_class_shapes(c, out, kN, "mscadc");
    expect_shape(c, out.caption_logits, {kN, kLen, kVocab}, "mscadc caption logits");
    expect_shape(c, out.caption_features, {kN, 2, 12 * 11 * 11}, "mscadc caption sequence");
    expect_shape(c, out.video_feature, {kN, 256, 4, 22, 22}, "mscadc body output");
    c.expect(out.head_features.size() == 3, "mscadc head count");
    for (const auto& h : out.head_features) expect_shape(c, h.data, {kN, 12, 2, 11, 11}, "mscadc head " + h.tag);
  }
}

// 4. clip aggregation invariance
void aggregation_invariance(Checker& c) {
  torch::NoGradGuard guard;
  auto net = make_network(NetworkConfig::standard(Architecture::kC3dAvg, 30));
  init_weights(*net, {InitScheme::Kind::kRandom, 4, {}, {}});
  net->eval();
  torch::manual_seed(103);
  const auto video = torch::randn({1, 3, 96, 112, 112});
  const std::vector<std::int64_t> order{4, 2, 0, 5, 3, 1};
  std::vector<torch::Tensor> clips;
  for (auto k : order) clips.push_back(video.narrow(2, k * 16, 16));
  const auto a = net->forward(video, TaskConfig::all());
  const auto b = net->forward(torch::cat(clips, 2), TaskConfig::all());
  c.below((a.score - b.score).abs().max().item<double>(), 1e-5, "score change under clip permutation");
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    c.below((a.class_logits[i] - b.class_logits[i]).abs().max().item<double>(), 1e-5,
            "class logit change under clip permutation, sub-task " + std::to_string(i));
  }

  const auto clip = video.narrow(2, 0, 16);
  const auto same = net->forward(clip.repeat({1, 1, 6, 1, 1}), TaskConfig::all());
  const auto per_clip = same.caption_features;
  for (std::int64_t k = 1; k < 6; ++k) {
    c.expect(torch::equal(per_clip.select(1, k), per_clip.select(1, 0)), "identical clips give identical clip features");
  }
  c.expect(torch::equal(same.video_feature, per_clip.select(1, 0)), "average of identical clips equals the clip feature");
  const auto single = std::dynamic_pointer_cast<C3dAvgMtlImpl>(net)->trunk(clip).reshape({1, -1});
  c.expect(torch::allclose(same.video_feature, single, 1e-5, 1e-5), "clip feature matches a separate trunk pass");
}

// 5. metric oracles
void metric_oracles(Checker& c) {
  std::mt19937_64 rng(2025);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> coarse(0, 5);
  double worst = 0.0;
  bool monotone_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = normal(rng);
      b[i] = trial % 2 ? static_cast<double>(coarse(rng)) : normal(rng);
    }
    const double s = spearman(a, b);
    worst = std::max(worst, std::abs(s - testkit::brute_force_spearman(a, b)));
    std::vector<double> affine(a), cubed(a), expd(a);
    for (int i = 0; i < 20; ++i) {
      affine[i] = 2.0 * a[i] + 7.0;
      cubed[i] = a[i] * a[i] * a[i];
      expd[i] = std::exp(a[i]);
    }
    monotone_exact &= spearman(affine, b) == s && spearman(cubed, b) == s && spearman(expd, b) == s;
  }
  c.below(worst, 1e-12, "max spearman deviation from brute force");
  c.expect(monotone_exact, "spearman unchanged by strictly increasing transforms");
  std::ostringstream dev;
  dev << "max brute-force deviation " << std::scientific << std::setprecision(2) << worst;
  c.note(dev.str());

  const std::vector<TokenSeq> hyp{{"the", "dive"}};
  const std::vector<TokenSeq> ref{{"the", "good", "dive"}};
  c.near(corpus_bleu(hyp, ref)[0], 0.6065, 1e-4, "BLEU-1 hand example");
}

ExperimentConfig tiny_config(Architecture arch, std::int64_t epochs, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.architecture = arch;
  cfg.profile = Profile::kTiny;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

// 6. overfit eight synthetic samples
void overfit(Checker& c, const fs::path& work) {
  SyntheticSpec spec;
  spec.seed = 1;
  spec.sample_count = 8;
  spec.test_fraction = 0.0;
  const auto fixture = testkit::load_synthetic(work / "overfit_data", spec);
  TrainData data{all_samples(fixture.dataset), {}, fixture.vocab, fixture.dataset.header.normalization_constant};
  for (auto arch : {Architecture::kC3dAvg, Architecture::kMscadc}) {
    const auto name = to_string(arch);
    auto cfg = tiny_config(arch, 200, 3);
    for (const char* o : {"dropout=0", "augment=false", "optimizer.schedule=cosine", "optimizer.lr=0.0003"}) {
      apply_override(cfg, o);
    }
    const auto result = train(cfg, data);
    const auto& first = result.epochs.front().eval;
    const auto& last = result.epochs.back().eval;
    c.expect(last.spearman.has_value() && *last.spearman >= 0.95,
             name + " train spearman " + std::to_string(last.spearman.value_or(NAN)) + " < 0.95");
    c.expect(last.accuracy.has_value(), name + " reports accuracy");
    if (last.accuracy) {
      for (std::size_t i = 0; i < kNumSubtasks; ++i) {
        c.expect((*last.accuracy)[i] == 1.0, name + " accuracy sub-task " + std::to_string(i) + " = " +
                                                 std::to_string((*last.accuracy)[i]));
      }
    }
    const double nll0 = first.caption_nll.value_or(NAN);
    const double nll1 = last.caption_nll.value_or(NAN);
    const double reduction = 1.0 - nll1 / nll0;
    c.expect(reduction >= 0.8, name + " caption NLL reduction " + std::to_string(reduction) + " < 0.8");
    std::ostringstream s;
    s << name << " sp " << last.spearman.value_or(NAN) << " nll " << nll0 << "->" << nll1;
    c.note(s.str());
  }
}

int run_cli(const std::vector<std::string>& args, std::string& out) {
  std::ostringstream o, e;
  std::vector<std::string> full{"mtlaqa"};
  full.insert(full.end(), args.begin(), args.end());
  const int code = cli::run(full, o, e);
  out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

json row_names(const json& table) {
  json names = json::array();
  for (const auto& row : table.at("rows")) names.push_back(row.at("name"));
  return names;
}

void expect_cells_in_range(Checker& c, const json& table, const std::string& what) {
  bool ok = true;
  int defined = 0;
  for (const auto& row : table.at("rows")) {
    for (const auto& [key, v] : row.at("values").items()) {
      if (v.is_null()) continue;
      ++defined;
      ok &= v.get<double>() >= -1.0 && v.get<double>() <= 1.0;
    }
  }
  c.expect(ok, what + " cells inside [-1, 1]");
  c.expect(defined > 0, what + " has defined cells");
}

// 7. ablate, sweep and probe through the command line
void protocols(Checker& c, const fs::path& work) {
  const auto data = (work / "protocol_data").string();
  std::string out;
  c.expect(run_cli({"synth", "--seed", "11", "--samples", "48", "--out", data}, out) == 0, "synth exits 0");

  c.expect(run_cli({"ablate", "--data", data, "--profile", "tiny", "--epochs", "2", "--seed", "1", "--out",
                    (work / "ablate").string()},
                   out) == 0,
           "ablate exits 0");
  const auto ablate = json::parse(out);
  c.expect(row_names(ablate) == json({"AQA", "+ Cls", "+ Caps", "+ Cls + Caps"}), "ablate rows");
  c.expect(ablate.at("columns").size() == 2, "ablate has a column per architecture");
  expect_cells_in_range(c, ablate, "ablate");

  c.expect(run_cli({"sweep", "--data", data, "--arch", "c3d_avg", "--profile", "tiny", "--epochs", "2", "--seed", "1",
                    "--out", (work / "sweep").string()},
                   out) == 0,
           "sweep exits 0");
  const auto sweep = json::parse(out);
  c.expect(row_names(sweep) == json({"STL", "MTL"}), "sweep rows");
  c.expect(sweep.at("columns") == json({"36", "18", "9"}), "sweep has a column per training size");
  expect_cells_in_range(c, sweep, "sweep");

  const auto run = (work / "probe_run").string();
  c.expect(run_cli({"train", "--data", data, "--arch", "c3d_avg", "--profile", "tiny", "--epochs", "20", "--seed", "1",
                    "--out", run},
                   out) == 0,
           "train exits 0");
  c.expect(run_cli({"probe", "--ckpt", run + "/ckpt_final", "--data", data, "--lambda", "1", "--out",
                    (work / "probe").string()},
                   out) == 0,
           "probe exits 0");
  const auto probe = json::parse(out);
  c.expect(row_names(probe) == json({"c1", "c2", "c3", "c4", "c5"}), "probe rows");
  expect_cells_in_range(c, probe, "probe");
  const auto& c5 = probe.at("rows").back().at("values").at("sp_corr");
  c.expect(!c5.is_null() && c5.get<double>() >= 0.8, "probe c5 = " + c5.dump() + " < 0.8");
  c.note("probe c5 " + c5.dump());
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

// 8. determinism
void determinism(Checker& c, const fs::path& work) {
  SyntheticSpec spec;
  spec.seed = 21;
  spec.sample_count = 12;
  generate_synthetic(spec, work / "det_a");
  generate_synthetic(spec, work / "det_b");
  const auto a = read_tree(work / "det_a");
  c.expect(!a.empty() && a == read_tree(work / "det_b"), "synthetic trees byte-identical");

  const auto fixture = testkit::load_synthetic(work / "det_c", spec);
  TrainData data{all_samples(fixture.dataset), {}, fixture.vocab, fixture.dataset.header.normalization_constant};
  for (auto arch : {Architecture::kC3dAvg, Architecture::kMscadc}) {
    const auto cfg = tiny_config(arch, 1, 9);
    const double x = train(cfg, data).epochs.front().loss.total;
    const double y = train(cfg, data).epochs.front().loss.total;
    c.near(y, x, 1e-6, to_string(arch) + " epoch-1 total loss repeat");
  }
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "mtlaqa_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: mtlaqa_acceptance [--workdir DIR]\n";
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);
  torch::set_num_threads(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

  const std::vector<std::pair<std::string, std::function<void(Checker&)>>> criteria{
      {"loss oracles", loss_oracles},
      {"gradient checks", gradient_checks},
      {"shape suite", shape_suite},
      {"aggregation invariance", aggregation_invariance},
      {"metric oracles", metric_oracles},
      {"overfit", [&](Checker& c) { overfit(c, work); }},
      {"protocols", [&](Checker& c) { protocols(c, work); }},
      {"determinism", [&](Checker& c) { determinism(c, work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += c.ok() ? 0 : 1;
    std::cout << (c.ok() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " (" << std::fixed
              << std::setprecision(1) << secs << "s): " << c.summary() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
