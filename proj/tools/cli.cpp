#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <torch/torch.h>

#include "mtlaqa/config.hpp"
#include "mtlaqa/dataset.hpp"
#include "mtlaqa/errors.hpp"
#include "mtlaqa/experiments.hpp"
#include "mtlaqa/probe.hpp"
#include "mtlaqa/synthetic.hpp"
#include "mtlaqa/trainer.hpp"

namespace mtlaqa::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum class Format { kJson, kCsv, kTable };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  bool verbose = false;
};

struct Options {
  Common common;
  std::string data, test_data, out, ckpt, split = "auto";
  std::string arch, profile;
  std::optional<std::int64_t> epochs, samples;
  std::vector<std::string> archs;
  std::vector<std::int64_t> sizes;
  std::vector<std::string> layers;
  std::optional<double> lambda;
  double test_fraction = 0.25;
};

Format parse_format(const std::string& f) {
  if (f == "json") return Format::kJson;
  if (f == "csv") return Format::kCsv;
  if (f == "table") return Format::kTable;
  throw ValidationError("--format must be json, csv or table");
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Experiment config JSON; unknown keys are rejected");
  cmd->add_option("--set", c.overrides, "Override a config value: dotted.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Seed for every random choice (initialization, shuffling, augmentation, generation)");
  cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv", "table"}));
  cmd->add_flag("-v,--verbose", c.verbose, "Per-epoch progress on stderr");
}

ExperimentConfig resolve_config(const Options& o) {
  auto overrides = o.common.overrides;
  if (!o.arch.empty()) overrides.push_back("architecture=" + o.arch);
  if (!o.profile.empty()) overrides.push_back("profile=" + o.profile);
  if (o.epochs) overrides.push_back("epochs=" + std::to_string(*o.epochs));
  if (o.common.seed) overrides.push_back("seed=" + std::to_string(*o.common.seed));
  std::optional<fs::path> path;
  if (!o.common.config_path.empty()) path = o.common.config_path;
  return load_config(path, overrides);
}

/// Dataset with its split views; heap-held so the views stay valid.
struct LoadedData {
  std::unique_ptr<Dataset> dataset;
  Vocabulary vocab;
  SampleSet train;
  SampleSet test;
};

LoadedData load_data(const std::string& root, std::ostream& err,
                     const std::optional<Vocabulary>& vocab = std::nullopt) {
  if (root.empty()) throw ValidationError("--data is required");
  const DataDir dir{root};
  LoadedData d;
  d.dataset = std::make_unique<Dataset>(load_dataset(dir.annotations(), dir.frames()));
  if (const auto report = d.dataset->report(); !report.empty()) err << report;
  if (d.dataset->samples.empty()) throw ValidationError("no usable samples in " + root);
  d.vocab = vocab ? *vocab : dataset_vocabulary(*d.dataset, dir);
  encode_captions(*d.dataset, d.vocab);
  const auto all = all_samples(*d.dataset);
  d.train = split_or(*d.dataset, dir.train_manifest(), all);
  d.test = split_or(*d.dataset, dir.test_manifest(), {});
  return d;
}

SampleSet pick_split(const LoadedData& d, const std::string& split) {
  if (split == "train") return d.train;
  if (split == "test") {
    if (d.test.empty()) throw ValidationError("dataset has no test split");
    return d.test;
  }
  if (split == "all") return all_samples(*d.dataset);
  return d.test.empty() ? d.train : d.test;
}

void print_eval(const EvalReport& r, Format f, std::ostream& out) {
  if (f == Format::kJson) {
    out << json::parse(r.to_json()).dump(2) << '\n';
    return;
  }
  const auto cols = r.columns();
  std::ostringstream v;
  if (f == Format::kCsv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].first;
    out << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out << (i ? "," : "");
      if (cols[i].second) out << *cols[i].second;
    }
    out << '\n';
    return;
  }
  for (const auto& [name, value] : cols) {
    out << std::left << std::setw(16) << name;
    if (value) out << std::fixed << std::setprecision(4) << *value << '\n';
    else out << "n/a\n";
  }
}

void print_table(const ResultTable& t, Format f, std::ostream& out) {
  if (f == Format::kJson) out << t.to_json() << '\n';
  else if (f == Format::kCsv) out << t.to_csv();
  else out << t.to_text();
}

TrainData train_data(const LoadedData& d) {
  return {d.train, d.test, d.vocab, d.dataset->header.normalization_constant};
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ValidationError("--out is required");
  SyntheticSpec spec;
  spec.seed = o.common.seed.value_or(0);
  spec.sample_count = o.samples.value_or(16);
  spec.test_fraction = o.test_fraction;
  generate_synthetic(spec, o.out);
  json j{{"out", o.out}, {"samples", spec.sample_count}, {"seed", spec.seed}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = resolve_config(o);
  const auto data = load_data(o.data, err);
  RunOptions run;
  run.run_dir = o.out.empty() ? fs::path("runs") / "train" : fs::path(o.out);
  run.verbose = o.common.verbose;
  const auto result = train(config, train_data(data), run);
  const auto f = parse_format(o.common.format);
  if (f == Format::kJson) {
    json j;
    j["run_dir"] = run.run_dir.string();
    j["best_epoch"] = result.best_epoch;
    j["best_spearman"] = result.best_spearman ? json(*result.best_spearman) : json(nullptr);
    j["final"] = json::parse(result.epochs.back().eval.to_json());
    out << j.dump(2) << '\n';
  } else {
    print_eval(result.epochs.back().eval, f, out);
  }
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.ckpt.empty()) throw ValidationError("--ckpt is required");
  auto ckpt = load_checkpoint(o.ckpt);
  const auto data = load_data(o.data, err, ckpt.meta.vocab);
  const auto samples = pick_split(data, o.split);
  const auto report = evaluate(*ckpt.network, samples, ckpt.meta.preprocess, TaskConfig::all(),
                               ckpt.meta.vocab);
  print_eval(report, parse_format(o.common.format), out);
  return kExitOk;
}

int cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = resolve_config(o);
  const auto data = load_data(o.data, err);
  std::vector<Architecture> archs;
  for (const auto& a : o.archs) archs.push_back(parse_architecture(a));
  if (archs.empty()) archs = {Architecture::kC3dAvg, Architecture::kMscadc};
  const fs::path root = o.out.empty() ? fs::path("runs") / "ablation" : fs::path(o.out);
  const auto result = run_ablation(config, archs, train_data(data), root, o.common.verbose);
  print_table(result.table, parse_format(o.common.format), out);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = resolve_config(o);
  const auto data = load_data(o.data, err);
  auto sizes = o.sizes.empty() ? config.sweep_sizes : o.sizes;
  if (sizes.empty()) {
    const auto n = static_cast<std::int64_t>(data.train.size());
    sizes = {n, n / 2, n / 4};
  }
  const fs::path root = o.out.empty() ? fs::path("runs") / "sweep" : fs::path(o.out);
  const auto table = run_size_sweep(config, train_data(data), sizes, root, o.common.verbose);
  print_table(table, parse_format(o.common.format), out);
  return kExitOk;
}

int cmd_probe(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.ckpt.empty()) throw ValidationError("--ckpt is required");
  auto config = resolve_config(o);
  if (!o.layers.empty()) config.probe.layers = o.layers;
  if (o.lambda) config.probe.lambda = *o.lambda;
  config.validate();
  auto ckpt = load_checkpoint(o.ckpt);
  const auto train_set = load_data(o.data, err, ckpt.meta.vocab);
  SampleSet train = train_set.train, test = train_set.test;
  std::optional<LoadedData> other;
  if (!o.test_data.empty()) {
    other = load_data(o.test_data, err, ckpt.meta.vocab);
    test = other->test.empty() ? all_samples(*other->dataset) : other->test;
  }
  if (test.empty()) throw ValidationError("probe: no test samples (add test.txt or --test-data)");
  const auto table = linear_probe(*ckpt.network, ckpt.meta.preprocess, config.probe, train, test);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "probe.csv") << table.to_csv();
    std::ofstream(fs::path(o.out) / "probe.json") << table.to_json() << '\n';
  }
  print_table(table, parse_format(o.common.format), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multitask action quality assessment: synthetic data, training, evaluation and experiments"};
  app.name(args.empty() ? "mtlaqa" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  add_common(synth, o.common);
  synth->add_option("--samples", o.samples, "Number of clips (default 16)");
  synth->add_option("--test-fraction", o.test_fraction, "Share of clips in test.txt (default 0.25)");
  synth->add_option("--out", o.out, "Destination directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train one network and write a run directory");
  add_common(train_cmd, o.common);
  train_cmd->add_option("--data", o.data, "Dataset directory (annotations.jsonl, frames/, train.txt, test.txt)")->required();
  train_cmd->add_option("--out", o.out, "Run directory (default runs/train)");
  train_cmd->add_option("--arch", o.arch, "c3d_avg or mscadc");
  train_cmd->add_option("--profile", o.profile, "standard or tiny");
  train_cmd->add_option("--epochs", o.epochs, "Epoch count");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and print its EvalReport");
  add_common(eval_cmd, o.common);
  eval_cmd->add_option("--ckpt", o.ckpt, "Checkpoint file (ckpt_best or ckpt_final)")->required();
  eval_cmd->add_option("--data", o.data, "Dataset directory")->required();
  eval_cmd->add_option("--split", o.split, "test, train, all or auto (test when present)")
      ->check(CLI::IsMember({"auto", "train", "test", "all"}));

  auto* ablate = app.add_subcommand("ablate", "STL vs MTL grid over task sets and architectures");
  add_common(ablate, o.common);
  ablate->add_option("--data", o.data, "Dataset directory")->required();
  ablate->add_option("--out", o.out, "Root for per-arm run directories (default runs/ablation)");
  ablate->add_option("--arch", o.archs, "Architecture column (repeatable; default both)");
  ablate->add_option("--profile", o.profile, "standard or tiny");
  ablate->add_option("--epochs", o.epochs, "Epoch count per arm");

  auto* sweep = app.add_subcommand("sweep", "STL and MTL test Spearman for shrinking training sets");
  add_common(sweep, o.common);
  sweep->add_option("--data", o.data, "Dataset directory")->required();
  sweep->add_option("--out", o.out, "Root for per-arm run directories (default runs/sweep)");
  sweep->add_option("--sizes", o.sizes, "Training-set sizes (default full, half, quarter)");
  sweep->add_option("--arch", o.arch, "c3d_avg or mscadc");
  sweep->add_option("--profile", o.profile, "standard or tiny");
  sweep->add_option("--epochs", o.epochs, "Epoch count per arm");

  auto* probe = app.add_subcommand("probe", "Ridge regressors on pooled trunk activations c1..c5");
  add_common(probe, o.common);
  probe->add_option("--ckpt", o.ckpt, "Checkpoint whose trunk is probed")->required();
  probe->add_option("--data", o.data, "Dataset whose train split fits the regressors")->required();
  probe->add_option("--test-data", o.test_data, "Separate dataset to test on (default: --data test split)");
  probe->add_option("--layers", o.layers, "Subset of c1..c5");
  probe->add_option("--lambda", o.lambda, "L2 penalty (default 1e-3)");
  probe->add_option("--out", o.out, "Directory for probe.csv and probe.json");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (o.common.seed) torch::manual_seed(*o.common.seed);
    if (synth->parsed()) return cmd_synth(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out, err);
    if (eval_cmd->parsed()) return cmd_eval(o, out, err);
    if (ablate->parsed()) return cmd_ablate(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (probe->parsed()) return cmd_probe(o, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace mtlaqa::cli
