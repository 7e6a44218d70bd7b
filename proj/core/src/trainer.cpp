#include "mtlaqa/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>

#include <json.hpp>
#include <torch/torch.h>

#include "mtlaqa/checkpoint.hpp"
#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

using json = nlohmann::ordered_json;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ULL;
  return h;
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

json preprocess_json(const PreprocessConfig& p) {
  return {{"target_frames", p.target_frames}, {"resize_width", p.resize_width},
          {"resize_height", p.resize_height}, {"crop", p.crop},
          {"hflip_prob", p.hflip_prob},       {"temporal_jitter", p.temporal_jitter},
          {"mean", p.mean}};
}

PreprocessConfig preprocess_from_json(const json& j) {
  PreprocessConfig p;
  p.target_frames = j.at("target_frames").get<std::int64_t>();
  p.resize_width = j.at("resize_width").get<std::int64_t>();
  p.resize_height = j.at("resize_height").get<std::int64_t>();
  p.crop = j.at("crop").get<std::int64_t>();
  p.hflip_prob = j.at("hflip_prob").get<double>();
  p.temporal_jitter = j.at("temporal_jitter").get<std::int64_t>();
  p.mean = j.at("mean").get<std::array<float, 3>>();
  return p;
}

json loss_json(const LossReport& r) {
  return {{"aqa", r.aqa}, {"classification", r.classification}, {"captioning", r.captioning},
          {"total", r.total}};
}

double lr_at(const OptimizerConfig& opt, std::int64_t epoch, std::int64_t epochs) {
  if (opt.schedule == LrSchedule::kConstant || epochs <= 1) return opt.lr;
  const double progress = static_cast<double>(epoch - 1) / static_cast<double>(epochs);
  return 0.5 * opt.lr * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MtlNetworkImpl& network,
                     const CheckpointMeta& meta) {
  const auto net = network_json(meta.network);
  json j;
  j["format"] = "mtlaqa-checkpoint";
  j["network"] = json::parse(net);
  j["fingerprint"] = fingerprint(net);
  j["vocab"] = meta.vocab.content_tokens();
  j["normalization_constant"] = meta.normalization_constant;
  j["preprocess"] = preprocess_json(meta.preprocess);
  j["epoch"] = meta.epoch;
  j["aborted"] = meta.aborted;
  j["experiment"] = meta.experiment_json.empty() ? json(nullptr) : json::parse(meta.experiment_json);
  write_tensor_file(path, {j.dump(), state_tensors(network)});
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  auto file = read_tensor_file(path);
  json j;
  try {
    j = json::parse(file.metadata);
  } catch (const json::parse_error&) {
    throw ValidationError("checkpoint metadata is not JSON: " + path.string());
  }
  if (j.value("format", "") != "mtlaqa-checkpoint") {
    throw ValidationError("not a network checkpoint: " + path.string());
  }
  LoadedCheckpoint out;
  auto& m = out.meta;
  const auto net = j.at("network").dump();
  if (fingerprint(net) != j.at("fingerprint").get<std::string>()) {
    throw ValidationError("checkpoint fingerprint does not match its network config: " +
                          path.string());
  }
  m.network = network_from_json(net);
  m.vocab = Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
  m.normalization_constant = j.at("normalization_constant").get<double>();
  m.preprocess = preprocess_from_json(j.at("preprocess"));
  m.epoch = j.at("epoch").get<std::int64_t>();
  m.aborted = j.value("aborted", false);
  if (!j.at("experiment").is_null()) m.experiment_json = j.at("experiment").dump();
  if (m.vocab.size() != m.network.captioner.vocab_size) {
    throw ValidationError("checkpoint vocabulary size disagrees with its captioner: " + path.string());
  }
  out.network = make_network(m.network);
  load_state(*out.network, file.tensors);
  return out;
}

Batch make_batch(const SampleSet& samples, const std::vector<std::size_t>& indices,
                 const PreprocessConfig& preprocess, Mode mode, std::uint64_t seed,
                 std::uint64_t key) {
  if (indices.empty()) throw ValidationError("batch: no samples");
  std::vector<torch::Tensor> videos;
  std::vector<float> scores;
  std::vector<std::int64_t> labels;
  std::vector<const CaptionTokens*> captions;
  for (auto i : indices) {
    const auto& s = *samples.at(i);
    std::mt19937_64 rng(mix(mix(seed, key), hash_id(s.sample_id)));
    videos.push_back(to_tensor(augment(s.frames, preprocess, mode, rng), preprocess.mean));
    scores.push_back(static_cast<float>(s.score.normalized));
    for (auto v : s.label.as_array()) labels.push_back(v);
    captions.push_back(&s.caption);
  }
  const auto n = static_cast<std::int64_t>(indices.size());
  Batch b;
  b.video = torch::stack(videos);
  b.scores = torch::tensor(scores);
  b.labels = torch::tensor(labels).view({n, kNumSubtasks});
  b.captions = make_caption_batch(captions);
  return b;
}

WeightedLoss batch_loss(MtlNetworkImpl& network, const Batch& batch, const TaskConfig& tasks,
                        const LossWeights& weights, const CaptionLossOptions& caption) {
  const auto out = network.forward(batch.video, tasks,
                                   tasks.captioning ? batch.captions.inputs : torch::Tensor{});
  LossTerms terms;
  terms.aqa = aqa_loss(out.score, batch.scores);
  if (tasks.classification) terms.classification = classification_loss(out.class_logits, batch.labels);
  if (tasks.captioning) {
    terms.captioning = captioning_loss(out.caption_logits, batch.captions.targets, caption);
  }
  return total_loss(terms, weights, tasks);
}

EvalReport evaluate(MtlNetworkImpl& network, const SampleSet& samples,
                    const PreprocessConfig& preprocess, const TaskConfig& tasks,
                    const Vocabulary& vocab, std::int64_t batch_size) {
  if (samples.empty()) throw ValidationError("evaluate: no samples");
  if (batch_size < 1) throw ValidationError("evaluate: batch_size must be >= 1");
  const bool was_training = network.is_training();
  network.eval();
  torch::NoGradGuard no_grad;

  std::vector<double> pred, truth;
  std::vector<DiveLabel> pred_labels, true_labels;
  std::vector<TokenSeq> hyps, refs;
  double nll_sum = 0.0;
  for (std::size_t begin = 0; begin < samples.size(); begin += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < std::min(samples.size(), begin + static_cast<std::size_t>(batch_size)); ++i) {
      idx.push_back(i);
    }
    const auto batch = make_batch(samples, idx, preprocess, Mode::kEval, 0, 0);
    const auto out = network.forward(batch.video, tasks,
                                     tasks.captioning ? batch.captions.inputs : torch::Tensor{});
    const auto scores = out.score.to(torch::kDouble);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& s = *samples[idx[k]];
      pred.push_back(scores[static_cast<std::int64_t>(k)].item<double>());
      truth.push_back(s.score.normalized);
      true_labels.push_back(s.label);
      refs.push_back(s.caption_words);
    }
    if (tasks.classification) {
      std::array<torch::Tensor, kNumSubtasks> arg;
      for (std::size_t t = 0; t < kNumSubtasks; ++t) arg[t] = out.class_logits[t].argmax(1);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        std::array<std::int64_t, kNumSubtasks> a{};
        for (std::size_t t = 0; t < kNumSubtasks; ++t) a[t] = arg[t][static_cast<std::int64_t>(k)].item<std::int64_t>();
        pred_labels.push_back(DiveLabel::from_array(a));
      }
    }
    if (tasks.captioning) {
      nll_sum += captioning_loss(out.caption_logits, batch.captions.targets).item<double>() *
                 static_cast<double>(idx.size());
      for (const auto& c : network.captioner()->decode_greedy(out.caption_state)) {
        hyps.push_back(decode_caption(c, vocab));
      }
    }
  }
  if (was_training) network.train();

  EvalReport r;
  r.samples = samples.size();
  try {
    r.spearman = spearman(pred, truth);
  } catch (const ValidationError&) {
    r.spearman.reset();
  }
  if (tasks.classification) r.accuracy = subtask_accuracy(pred_labels, true_labels);
  if (tasks.captioning) {
    r.captions = caption_metrics(hyps, refs);
    r.caption_nll = nll_sum / static_cast<double>(samples.size());
  }
  return r;
}

std::string epoch_json(const EpochRecord& record) {
  json j;
  j["epoch"] = record.epoch;
  j["lr"] = record.lr;
  j["seconds"] = record.seconds;
  j["loss"] = loss_json(record.loss);
  j["eval"] = json::parse(record.eval.to_json());
  return j.dump();
}

TrainResult train(const ExperimentConfig& config, const TrainData& data, const RunOptions& options) {
  config.validate();
  if (data.train.empty()) throw ValidationError("train: training set is empty");
  const auto tasks = config.effective_tasks();
  const auto preprocess = config.preprocess();
  preprocess.validate();
  const SampleSet& eval_set = data.eval.empty() ? data.train : data.eval;
  const Mode train_mode = config.augment ? Mode::kTrain : Mode::kEval;

  torch::manual_seed(config.seed);
  TrainResult result;
  result.network = make_network(config.network(data.vocab.size()));
  auto& net = *result.network;
  InitScheme scheme;
  scheme.seed = config.seed;
  if (!config.pretrained_trunk.empty()) {
    scheme.kind = InitScheme::Kind::kPretrainedTrunk;
    scheme.checkpoint = config.pretrained_trunk;
  }
  init_weights(net, scheme);

  torch::optim::Adam optimizer(net.parameters(),
                               torch::optim::AdamOptions(config.optimizer.lr)
                                   .betas({config.optimizer.beta1, config.optimizer.beta2})
                                   .eps(config.optimizer.eps));

  CheckpointMeta meta;
  meta.network = net.config();
  meta.vocab = data.vocab;
  meta.normalization_constant = data.normalization_constant;
  meta.preprocess = preprocess;
  meta.experiment_json = to_json(config, -1);

  const bool write = !options.run_dir.empty();
  std::ofstream log;
  if (write) {
    std::filesystem::create_directories(options.run_dir);
    std::ofstream(options.run_dir / "config.json") << to_json(config) << '\n';
    log.open(options.run_dir / "log.jsonl", std::ios::trunc);
    if (!log) throw RuntimeFailure("cannot write " + (options.run_dir / "log.jsonl").string());
  }

  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr_at(config.optimizer, epoch, config.epochs);
    for (auto& group : optimizer.param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(rec.lr);
    }

    net.train();
    const auto order = shuffled(data.train.size(), mix(config.seed, static_cast<std::uint64_t>(epoch)));
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + bs)));
      const auto batch = make_batch(data.train, idx, preprocess, train_mode, config.seed,
                                    static_cast<std::uint64_t>(epoch));
      optimizer.zero_grad();
      std::optional<WeightedLoss> loss;
      try {
        loss = batch_loss(net, batch, tasks, config.weights, config.caption);
      } catch (const NonFiniteError&) {
        loss.reset();
      }
      if (!loss || !std::isfinite(loss->report.total)) {
        if (write) {
          meta.epoch = epoch - 1;
          meta.aborted = true;
          save_checkpoint(options.run_dir / "ckpt_final", net, meta);
        }
        throw RuntimeFailure("non-finite loss at epoch " + std::to_string(epoch) +
                             "; weights before the failing step were kept");
      }
      loss->total.backward();
      if (config.optimizer.clip_grad_norm > 0.0) {
        torch::nn::utils::clip_grad_norm_(net.parameters(), config.optimizer.clip_grad_norm);
      }
      optimizer.step();
      const auto n = static_cast<double>(idx.size());
      rec.loss.aqa += loss->report.aqa * n;
      rec.loss.classification += loss->report.classification * n;
      rec.loss.captioning += loss->report.captioning * n;
      rec.loss.total += loss->report.total * n;
      seen += idx.size();
    }
    const auto denom = static_cast<double>(seen);
    rec.loss.aqa /= denom, rec.loss.classification /= denom;
    rec.loss.captioning /= denom, rec.loss.total /= denom;

    rec.eval = evaluate(net, eval_set, preprocess, tasks, data.vocab, config.batch_size);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool improved = rec.eval.spearman &&
                          (!result.best_spearman || *rec.eval.spearman > *result.best_spearman);
    if (improved || result.best_epoch == 0) {
      result.best_epoch = epoch;
      result.best_spearman = rec.eval.spearman;
      if (write) {
        meta.epoch = epoch;
        save_checkpoint(options.run_dir / "ckpt_best", net, meta);
      }
    }
    if (write) log << epoch_json(rec) << '\n' << std::flush;
    if (options.verbose) {
      std::cerr << "epoch " << epoch << "/" << config.epochs << " loss " << std::setprecision(5)
                << rec.loss.total << " sp "
                << (rec.eval.spearman ? std::to_string(*rec.eval.spearman) : std::string("n/a"))
                << " (" << std::setprecision(3) << rec.seconds << "s)\n";
    }
    if (options.on_epoch) options.on_epoch(rec);
    result.epochs.push_back(std::move(rec));
  }

  if (write) {
    meta.epoch = config.epochs;
    save_checkpoint(options.run_dir / "ckpt_final", net, meta);
    json report;
    report["architecture"] = to_string(config.architecture);
    report["tasks"] = tasks.row_name();
    report["epochs"] = config.epochs;
    report["best_epoch"] = result.best_epoch;
    report["best_spearman"] = result.best_spearman ? json(*result.best_spearman) : json(nullptr);
    report["final"] = json::parse(result.epochs.back().eval.to_json());
    std::ofstream(options.run_dir / "report.json") << report.dump(2) << '\n';
  }
  return result;
}

}  // namespace mtlaqa
