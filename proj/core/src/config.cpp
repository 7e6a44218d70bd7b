#include "mtlaqa/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

using json = nlohmann::ordered_json;

std::string schedule_name(LrSchedule s) { return s == LrSchedule::kConstant ? "constant" : "cosine"; }

LrSchedule parse_schedule(const std::string& s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "cosine") return LrSchedule::kCosine;
  throw ValidationError("optimizer.schedule: expected constant or cosine, got '" + s + "'");
}

json config_tree(const ExperimentConfig& c) {
  json j;
  j["architecture"] = to_string(c.architecture);
  j["profile"] = to_string(c.profile);
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"schedule", schedule_name(c.optimizer.schedule)},
                    {"clip_grad_norm", c.optimizer.clip_grad_norm}};
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["weights"] = {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}, {"gamma", c.weights.gamma}};
  j["tasks"] = {{"classification", c.tasks.classification}, {"captioning", c.tasks.captioning}};
  j["caption"] = {{"per_token_mean", c.caption.per_token_mean}};
  j["heads"] = {{"share_fc", c.share_fc}};
  j["augment"] = c.augment;
  j["dropout"] = c.dropout ? json(*c.dropout) : json(nullptr);
  j["pretrained_trunk"] = c.pretrained_trunk;
  j["probe"] = {{"layers", c.probe.layers}, {"lambda", c.probe.lambda}};
  j["sweep"] = {{"sizes", c.sweep_sizes}};
  return j;
}

// Objects merge key by key; anything else is replaced. Keys absent from the
// defaults are rejected.
void merge_checked(json& base, const json& update, const std::string& prefix) {
  if (!update.is_object()) {
    throw ValidationError("config: '" + (prefix.empty() ? std::string("<root>") : prefix) +
                          "' must be an object");
  }
  for (const auto& [key, value] : update.items()) {
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ValidationError("config: unknown key '" + path + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      merge_checked(slot, value, path);
    } else {
      slot = value;
    }
  }
}

template <typename T>
T field(const json& j, const std::string& path) {
  const json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    node = &node->at(path.substr(pos, dot - pos));
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!node->is_number()) throw ValidationError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!node->is_boolean()) throw ValidationError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!node->is_number_integer()) throw ValidationError("");
    }
    return node->get<T>();
  } catch (const std::exception&) {
    throw ValidationError("config: '" + path + "' has the wrong type (" + node->dump() + ")");
  }
}

ExperimentConfig from_tree(const json& j) {
  ExperimentConfig c;
  c.architecture = parse_architecture(field<std::string>(j, "architecture"));
  c.profile = parse_profile(field<std::string>(j, "profile"));
  c.optimizer.lr = field<double>(j, "optimizer.lr");
  c.optimizer.beta1 = field<double>(j, "optimizer.beta1");
  c.optimizer.beta2 = field<double>(j, "optimizer.beta2");
  c.optimizer.eps = field<double>(j, "optimizer.eps");
  c.optimizer.schedule = parse_schedule(field<std::string>(j, "optimizer.schedule"));
  c.optimizer.clip_grad_norm = field<double>(j, "optimizer.clip_grad_norm");
  c.epochs = field<std::int64_t>(j, "epochs");
  c.batch_size = field<std::int64_t>(j, "batch_size");
  c.seed = field<std::uint64_t>(j, "seed");
  c.weights.alpha = field<double>(j, "weights.alpha");
  c.weights.beta = field<double>(j, "weights.beta");
  c.weights.gamma = field<double>(j, "weights.gamma");
  c.tasks.classification = field<bool>(j, "tasks.classification");
  c.tasks.captioning = field<bool>(j, "tasks.captioning");
  c.caption.per_token_mean = field<bool>(j, "caption.per_token_mean");
  c.share_fc = field<bool>(j, "heads.share_fc");
  c.augment = field<bool>(j, "augment");
  if (!j.at("dropout").is_null()) c.dropout = field<double>(j, "dropout");
  c.pretrained_trunk = field<std::string>(j, "pretrained_trunk");
  c.probe.layers = field<std::vector<std::string>>(j, "probe.layers");
  c.probe.lambda = field<double>(j, "probe.lambda");
  c.sweep_sizes = field<std::vector<std::int64_t>>(j, "sweep.sizes");
  c.validate();
  return c;
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": invalid JSON: " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(optimizer.lr > 0.0)) throw ValidationError("config: optimizer.lr must be > 0");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw ValidationError("config: optimizer betas must be in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw ValidationError("config: optimizer.eps must be > 0");
  if (optimizer.clip_grad_norm < 0.0) throw ValidationError("config: optimizer.clip_grad_norm must be >= 0");
  if (epochs < 1) throw ValidationError("config: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (!(weights.alpha > 0.0)) throw ValidationError("config: weights.alpha must be > 0 (AQA is the main task)");
  if (weights.beta < 0.0 || weights.gamma < 0.0) throw ValidationError("config: loss weights must be >= 0");
  if (dropout && !(*dropout >= 0.0 && *dropout < 1.0)) throw ValidationError("config: dropout must be in [0, 1)");
  if (!(probe.lambda > 0.0)) throw ValidationError("config: probe.lambda must be > 0");
  if (probe.layers.empty()) throw ValidationError("config: probe.layers is empty");
  for (const auto& l : probe.layers) {
    if (l != "c1" && l != "c2" && l != "c3" && l != "c4" && l != "c5") {
      throw ValidationError("config: probe layer '" + l + "' is not one of c1..c5");
    }
  }
  for (auto s : sweep_sizes) {
    if (s < 1) throw ValidationError("config: sweep sizes must be positive");
  }
}

NetworkConfig ExperimentConfig::network(std::int64_t vocab_size) const {
  auto n = NetworkConfig::make(architecture, profile, vocab_size);
  n.c3d_avg.share_fc = share_fc;
  if (dropout) {
    n.c3d_avg.dropout = *dropout;
    n.mscadc.trunk.dropout = *dropout;
    n.captioner.dropout = *dropout;
  }
  return n;
}

PreprocessConfig ExperimentConfig::preprocess() const {
  return PreprocessConfig::for_network(architecture, profile);
}

TaskConfig ExperimentConfig::effective_tasks() const { return mtlaqa::effective_tasks(tasks, weights); }

std::string to_json(const ExperimentConfig& config, int indent) {
  return config_tree(config).dump(indent);
}

ExperimentConfig parse_config(std::string_view json_text) {
  auto tree = config_tree(ExperimentConfig{});
  merge_checked(tree, parse_json(json_text, "config"), "");
  return from_tree(tree);
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override '" + std::string(assignment) + "': expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  // build {"a": {"b": value}} and merge it through the same key check
  json update = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ValidationError("override '" + key + "': empty key segment");
    parts.push_back(p);
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) update = json{{*it, update}};
  auto tree = config_tree(config);
  merge_checked(tree, update, "");
  config = from_tree(tree);
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ValidationError("config file not found: " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    config = parse_config(buf.str());
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

std::string network_json(const NetworkConfig& n) {
  const auto& ct = n.c3d_avg.trunk;
  const auto& mt = n.mscadc.trunk;
  json j;
  j["architecture"] = to_string(n.architecture);
  j["c3d_avg"] = {{"channels", ct.channels},        {"frames", ct.frames},
                  {"crop", ct.crop},                {"clips", n.c3d_avg.clips},
                  {"fc_width", n.c3d_avg.fc_width}, {"dropout", n.c3d_avg.dropout},
                  {"share_fc", n.c3d_avg.share_fc}};
  j["mscadc"] = {{"channels", mt.channels},
                 {"frames", mt.frames},
                 {"crop", mt.crop},
                 {"dilation", mt.dilation},
                 {"batchnorm", mt.batchnorm},
                 {"dropout", mt.dropout},
                 {"head_channels", n.mscadc.head_channels},
                 {"context_channels", n.mscadc.context.channels},
                 {"context_dilations", n.mscadc.context.dilations}};
  const auto& c = n.captioner;
  j["captioner"] = {{"feature_dim", c.feature_dim},       {"hidden_size", c.hidden_size},
                    {"embedding_size", c.embedding_size}, {"vocab_size", c.vocab_size},
                    {"dropout", c.dropout},               {"max_decode_steps", c.max_decode_steps}};
  return j.dump();
}

NetworkConfig network_from_json(std::string_view json_text) {
  const auto j = parse_json(json_text, "network config");
  try {
    NetworkConfig n;
    n.architecture = parse_architecture(j.at("architecture").get<std::string>());
    const auto& a = j.at("c3d_avg");
    n.c3d_avg.trunk.channels = a.at("channels").get<std::array<std::int64_t, 8>>();
    n.c3d_avg.trunk.frames = a.at("frames").get<std::int64_t>();
    n.c3d_avg.trunk.crop = a.at("crop").get<std::int64_t>();
    n.c3d_avg.clips = a.at("clips").get<std::int64_t>();
    n.c3d_avg.fc_width = a.at("fc_width").get<std::int64_t>();
    n.c3d_avg.dropout = a.at("dropout").get<double>();
    n.c3d_avg.share_fc = a.at("share_fc").get<bool>();
    const auto& m = j.at("mscadc");
    n.mscadc.trunk.channels = m.at("channels").get<std::array<std::int64_t, 8>>();
    n.mscadc.trunk.frames = m.at("frames").get<std::int64_t>();
    n.mscadc.trunk.crop = m.at("crop").get<std::int64_t>();
    n.mscadc.trunk.dilation = m.at("dilation").get<std::int64_t>();
    n.mscadc.trunk.batchnorm = m.at("batchnorm").get<bool>();
    n.mscadc.trunk.dropout = m.at("dropout").get<double>();
    n.mscadc.head_channels = m.at("head_channels").get<std::int64_t>();
    n.mscadc.context.channels = m.at("context_channels").get<std::int64_t>();
    n.mscadc.context.dilations = m.at("context_dilations").get<std::vector<std::int64_t>>();
    const auto& c = j.at("captioner");
    n.captioner.feature_dim = c.at("feature_dim").get<std::int64_t>();
    n.captioner.hidden_size = c.at("hidden_size").get<std::int64_t>();
    n.captioner.embedding_size = c.at("embedding_size").get<std::int64_t>();
    n.captioner.vocab_size = c.at("vocab_size").get<std::int64_t>();
    n.captioner.dropout = c.at("dropout").get<double>();
    n.captioner.max_decode_steps = c.at("max_decode_steps").get<std::int64_t>();
    return n;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("network config: ") + e.what());
  }
}

}  // namespace mtlaqa
