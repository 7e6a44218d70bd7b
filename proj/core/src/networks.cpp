#include "mtlaqa/networks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "mtlaqa/checkpoint.hpp"
#include "mtlaqa/dive_label.hpp"
#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

namespace F = torch::nn::functional;

std::string normalized_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

torch::Tensor global_average(const torch::Tensor& x) {
  return x.mean(std::vector<std::int64_t>{2, 3, 4});
}

torch::nn::ModuleList make_linear_classifiers(std::int64_t in) {
  torch::nn::ModuleList list;
  for (auto k : DiveLabelSchema::standard().cardinalities()) list->push_back(torch::nn::Linear(in, k));
  return list;
}

torch::nn::ModuleList make_conv_classifiers(std::int64_t in) {
  torch::nn::ModuleList list;
  for (auto k : DiveLabelSchema::standard().cardinalities()) {
    list->push_back(torch::nn::Conv3d(torch::nn::Conv3dOptions(in, k, 3).padding(1)));
  }
  return list;
}

}  // namespace

std::string to_string(Architecture arch) {
  return arch == Architecture::kC3dAvg ? "c3d_avg" : "mscadc";
}

Architecture parse_architecture(std::string_view name) {
  const auto n = normalized_name(name);
  if (n == "c3davg") return Architecture::kC3dAvg;
  if (n == "mscadc") return Architecture::kMscadc;
  throw ValidationError("unknown architecture '" + std::string(name) + "' (c3d_avg, mscadc)");
}

std::string to_string(Profile profile) {
  return profile == Profile::kStandard ? "standard" : "tiny";
}

Profile parse_profile(std::string_view name) {
  const auto n = normalized_name(name);
  if (n == "standard") return Profile::kStandard;
  if (n == "tiny") return Profile::kTiny;
  throw ValidationError("unknown profile '" + std::string(name) + "' (standard, tiny)");
}

NetworkConfig NetworkConfig::make(Architecture arch, Profile profile, std::int64_t vocab_size) {
  return profile == Profile::kStandard ? standard(arch, vocab_size) : tiny(arch, vocab_size);
}

NetworkConfig NetworkConfig::standard(Architecture arch, std::int64_t vocab_size) {
  NetworkConfig c;
  c.architecture = arch;
  c.captioner.vocab_size = vocab_size;
  c.captioner.feature_dim = c.caption_feature_dim();
  return c;
}

NetworkConfig NetworkConfig::tiny(Architecture arch, std::int64_t vocab_size) {
  NetworkConfig c;
  c.architecture = arch;
  c.c3d_avg.trunk.channels = {16, 32, 64, 64, 128, 128, 128, 128};
  c.c3d_avg.trunk.crop = 32;
  c.c3d_avg.fc_width = 256;
  c.mscadc.trunk.channels = {8, 16, 32, 32, 64, 64, 64, 64};
  c.mscadc.trunk.crop = 136;
  c.captioner.hidden_size = 128;
  c.captioner.embedding_size = 64;
  c.captioner.vocab_size = vocab_size;
  c.captioner.feature_dim = c.caption_feature_dim();
  return c;
}

std::int64_t NetworkConfig::input_frames() const {
  return architecture == Architecture::kC3dAvg ? c3d_avg.clips * c3d_avg.trunk.frames
                                               : mscadc.trunk.frames;
}

std::int64_t NetworkConfig::crop() const {
  return architecture == Architecture::kC3dAvg ? c3d_avg.trunk.crop : mscadc.trunk.crop;
}

std::int64_t NetworkConfig::caption_feature_dim() const {
  if (architecture == Architecture::kC3dAvg) {
    const auto s = c3d_avg.trunk.output_shape();
    return s[0] * s[1] * s[2] * s[3];
  }
  const auto s = mscadc.trunk.output_shape();
  // head max-pool halves every axis
  return mscadc.head_channels * (s[2] / 2) * (s[3] / 2);
}

std::int64_t NetworkConfig::caption_sequence_length() const {
  if (architecture == Architecture::kC3dAvg) return c3d_avg.clips;
  return mscadc.trunk.output_shape()[1] / 2;
}

torch::nn::Sequential make_fc_stack(std::int64_t in, std::int64_t width, double dropout) {
  return torch::nn::Sequential(torch::nn::Linear(in, width), torch::nn::ReLU(),
                               torch::nn::Dropout(dropout), torch::nn::Linear(width, width),
                               torch::nn::ReLU(), torch::nn::Dropout(dropout));
}

// ---------------------------------------------------------------- C3D-AVG

C3dAvgMtlImpl::C3dAvgMtlImpl(NetworkConfig config) : MtlNetworkImpl(std::move(config)) {
  const auto& c = config_.c3d_avg;
  if (c.clips < 1) throw ValidationError("c3d_avg: clip count must be >= 1");
  config_.captioner.feature_dim = config_.caption_feature_dim();
  const auto dim = config_.caption_feature_dim();
  trunk = register_module("trunk", C3dTrunk(c.trunk));
  fc_ = register_module("fc", make_fc_stack(dim, c.fc_width, c.dropout));
  if (!c.share_fc) fc_cls_ = register_module("fc_cls", make_fc_stack(dim, c.fc_width, c.dropout));
  score_ = register_module("score", torch::nn::Linear(c.fc_width, 1));
  classifiers_ = register_module("classifiers", make_linear_classifiers(c.fc_width));
  captioner_ = register_module("captioner", Captioner(config_.captioner));
}

torch::Tensor C3dAvgMtlImpl::split_clips(const torch::Tensor& video) const {
  const auto& c = config_.c3d_avg;
  const auto frames = config_.input_frames();
  if (video.dim() != 5 || video.size(1) != 3 || video.size(2) != frames) {
    std::ostringstream msg;
    msg << "c3d_avg: expected video (N, 3, " << frames << ", H, W), got " << video.sizes();
    throw ValidationError(msg.str());
  }
  const auto n = video.size(0);
  // (N, 3, K*16, H, W) -> (N*K, 3, 16, H, W), clip-major within each sample
  return video.reshape({n, 3, c.clips, c.trunk.frames, video.size(3), video.size(4)})
      .permute({0, 2, 1, 3, 4, 5})
      .reshape({n * c.clips, 3, c.trunk.frames, video.size(3), video.size(4)});
}

MtlOutput C3dAvgMtlImpl::forward(const torch::Tensor& video, const TaskConfig& tasks,
                                 const torch::Tensor& caption_inputs) {
  const auto n = video.size(0);
  const auto clips = split_clips(video);
  const auto per_clip = trunk(clips).reshape({n, config_.c3d_avg.clips, -1});

  MtlOutput out;
  // accumulate in double so the result does not depend on clip order beyond rounding
  out.video_feature = per_clip.to(torch::kDouble).mean(1).to(per_clip.scalar_type());
  const auto shared = fc_->forward(out.video_feature);
  out.score = score_(shared).squeeze(1);
  if (tasks.classification) {
    const auto cls = config_.c3d_avg.share_fc ? shared : fc_cls_->forward(out.video_feature);
    for (std::size_t i = 0; i < kNumSubtasks; ++i) {
      out.class_logits[i] = classifiers_->at<torch::nn::LinearImpl>(i).forward(cls);
    }
  }
  if (tasks.captioning) {
    out.caption_features = per_clip;
    out.caption_state = captioner_->encode(per_clip);
    if (caption_inputs.defined()) {
      out.caption_logits = captioner_->decode_teacher_forced(out.caption_state, caption_inputs);
    }
  }
  return out;
}

std::vector<FeatureMap> C3dAvgMtlImpl::pooled_layer_features(const torch::Tensor& video) {
  const auto n = video.size(0);
  FeatureCaptures captures;
  trunk(split_clips(video), &captures);
  std::vector<FeatureMap> out;
  for (auto& cap : captures) {
    const auto pooled = global_average(cap.data).reshape({n, config_.c3d_avg.clips, -1}).mean(1);
    out.push_back({pooled, cap.tag});
  }
  return out;
}

// ---------------------------------------------------------------- MSCADC

MscadcHeadImpl::MscadcHeadImpl(std::int64_t in_channels, const MscadcConfig& config) {
  const auto c = config.head_channels;
  auto context_config = config.context;
  context_config.channels = c;
  project = register_module("project", torch::nn::Conv3d(torch::nn::Conv3dOptions(in_channels, c, 1)));
  context = register_module("context", ContextNet(context_config));
  conv = register_module("conv", conv3x3x3(c, c, 1, false));
  norm = register_module("norm", torch::nn::BatchNorm3d(c));
}

torch::Tensor MscadcHeadImpl::forward(const torch::Tensor& body) {
  auto x = context(torch::relu(project(body)));
  x = F::max_pool3d(x, F::MaxPool3dFuncOptions(2).stride(2));
  return torch::relu(norm(conv(x)));
}

MscadcMtlImpl::MscadcMtlImpl(NetworkConfig config) : MtlNetworkImpl(std::move(config)) {
  const auto& c = config_.mscadc;
  config_.captioner.feature_dim = config_.caption_feature_dim();
  const auto body = c.trunk.channels.back();
  trunk = register_module("trunk", MscadcTrunk(c.trunk));
  aqa_head_ = register_module("aqa_head", MscadcHead(body, c));
  cls_head_ = register_module("cls_head", MscadcHead(body, c));
  cap_head_ = register_module("cap_head", MscadcHead(body, c));
  score_ = register_module(
      "score", torch::nn::Conv3d(torch::nn::Conv3dOptions(c.head_channels, 1, 3).padding(1)));
  classifiers_ = register_module("classifiers", make_conv_classifiers(c.head_channels));
  captioner_ = register_module("captioner", Captioner(config_.captioner));
}

MtlOutput MscadcMtlImpl::forward(const torch::Tensor& video, const TaskConfig& tasks,
                                 const torch::Tensor& caption_inputs) {
  MtlOutput out;
  out.video_feature = trunk(video);
  const auto aqa = aqa_head_(out.video_feature);
  out.head_features.push_back({aqa, "aqa"});
  out.score = global_average(score_(aqa)).squeeze(1);
  if (tasks.classification) {
    const auto cls = cls_head_(out.video_feature);
    out.head_features.push_back({cls, "classification"});
    for (std::size_t i = 0; i < kNumSubtasks; ++i) {
      out.class_logits[i] = global_average(classifiers_->at<torch::nn::Conv3dImpl>(i).forward(cls));
    }
  }
  if (tasks.captioning) {
    const auto cap = cap_head_(out.video_feature);
    out.head_features.push_back({cap, "captioning"});
    const auto n = cap.size(0), t = cap.size(2);
    // (N, C, T, h, w) -> (N, T, C*h*w)
    out.caption_features = cap.permute({0, 2, 1, 3, 4}).reshape({n, t, -1});
    out.caption_state = captioner_->encode(out.caption_features);
    if (caption_inputs.defined()) {
      out.caption_logits = captioner_->decode_teacher_forced(out.caption_state, caption_inputs);
    }
  }
  return out;
}

std::vector<FeatureMap> MscadcMtlImpl::pooled_layer_features(const torch::Tensor& video) {
  FeatureCaptures captures;
  trunk(video, &captures);
  std::vector<FeatureMap> out;
  for (auto& cap : captures) out.push_back({global_average(cap.data), cap.tag});
  return out;
}

MtlNetwork make_network(const NetworkConfig& config) {
  if (config.architecture == Architecture::kC3dAvg) return std::make_shared<C3dAvgMtlImpl>(config);
  return std::make_shared<MscadcMtlImpl>(config);
}

// ---------------------------------------------------------------- init

const NameMap& c3d_pretrained_name_map() {
  static const NameMap map = [] {
    NameMap m;
    for (const char* layer :
         {"conv1", "conv2", "conv3a", "conv3b", "conv4a", "conv4b", "conv5a", "conv5b"}) {
      for (const char* p : {"weight", "bias"}) {
        const std::string suffix = std::string(layer) + "." + p;
        m[suffix] = "trunk." + suffix;
      }
    }
    return m;
  }();
  return map;
}

InitReport init_weights(MtlNetworkImpl& network, const InitScheme& scheme) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(scheme.seed);
  torch::NoGradGuard no_grad;

  auto he_uniform = [&](torch::Tensor& w) {
    const double fan_in = static_cast<double>(w[0].numel());
    const double bound = std::sqrt(6.0 / fan_in);
    w.uniform_(-bound, bound, gen);
  };
  // named_modules is a deterministic pre-order walk, so the generator stream is stable
  for (const auto& item : network.named_modules()) {
    auto& m = *item.value();
    if (auto* conv = dynamic_cast<torch::nn::Conv3dImpl*>(&m)) {
      he_uniform(conv->weight);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* lin = dynamic_cast<torch::nn::LinearImpl*>(&m)) {
      he_uniform(lin->weight);
      if (lin->bias.defined()) lin->bias.zero_();
    } else if (auto* bn = dynamic_cast<torch::nn::BatchNorm3dImpl*>(&m)) {
      bn->weight.fill_(1.0);
      bn->bias.zero_();
      bn->running_mean.zero_();
      bn->running_var.fill_(1.0);
      bn->num_batches_tracked.zero_();
    } else if (auto* emb = dynamic_cast<torch::nn::EmbeddingImpl*>(&m)) {
      emb->weight.uniform_(-std::sqrt(3.0), std::sqrt(3.0), gen);
    }
  }

  InitReport report;
  if (scheme.kind == InitScheme::Kind::kRandom) return report;

  if (!std::filesystem::exists(scheme.checkpoint)) {
    throw ValidationError("pretrained trunk checkpoint not found: " + scheme.checkpoint.string());
  }
  const auto file = read_tensor_file(scheme.checkpoint);

  std::map<std::string, torch::Tensor> trunk_state;
  for (auto& [name, tensor] : state_tensors(network)) {
    if (name.rfind("trunk.", 0) == 0) trunk_state.emplace(name, tensor);
  }
  const NameMap& builtin = c3d_pretrained_name_map();
  auto destination = [&](const std::string& key) -> std::string {
    if (!scheme.name_map.empty()) {
      const auto it = scheme.name_map.find(key);
      return it == scheme.name_map.end() ? std::string{} : it->second;
    }
    if (network.config().architecture == Architecture::kC3dAvg) {
      const auto it = builtin.find(key);
      if (it != builtin.end()) return it->second;
    }
    return key.rfind("trunk.", 0) == 0 ? key : std::string{};
  };

  StateDiff diff;
  std::set<std::string> filled;
  std::vector<std::pair<torch::Tensor, torch::Tensor>> copies;
  for (const auto& [key, tensor] : file.tensors) {
    const auto dest = destination(key);
    const auto it = dest.empty() ? trunk_state.end() : trunk_state.find(dest);
    if (it == trunk_state.end()) {
      report.ignored.push_back(key);
      continue;
    }
    if (it->second.sizes() != tensor.sizes()) {
      std::ostringstream msg;
      msg << key << " -> " << dest << " " << tensor.sizes() << " vs " << it->second.sizes();
      diff.shape_mismatch.push_back(msg.str());
      continue;
    }
    copies.emplace_back(it->second, tensor);
    filled.insert(dest);
    report.loaded.push_back(dest);
  }
  for (const auto& entry : trunk_state) {
    if (!filled.contains(entry.first)) diff.missing.push_back(entry.first);
  }
  if (!diff.empty()) {
    throw ValidationError("pretrained trunk does not match the architecture (" +
                          scheme.checkpoint.string() + "):\n" + diff.describe());
  }
  for (auto& [dst, src] : copies) dst.copy_(src.to(dst.scalar_type()));
  return report;
}

}  // namespace mtlaqa
