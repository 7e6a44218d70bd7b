#include "mtlaqa/backbone.hpp"

#include <algorithm>

#include <torch/torch.h>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

namespace F = torch::nn::functional;

void check_clip(const torch::Tensor& clip, std::int64_t frames, std::int64_t crop,
                const char* who) {
  if (clip.dim() != 5 || clip.size(1) != 3 || clip.size(2) != frames || clip.size(3) != crop ||
      clip.size(4) != crop) {
    std::ostringstream msg;
    msg << who << ": expected input (N, 3, " << frames << ", " << crop << ", " << crop
        << "), got " << clip.sizes();
    throw ValidationError(msg.str());
  }
}

torch::Tensor max_pool(const torch::Tensor& x, std::int64_t kt, std::int64_t ks,
                       std::int64_t pad_s = 0) {
  return F::max_pool3d(x, F::MaxPool3dFuncOptions({kt, ks, ks}).stride({kt, ks, ks}).padding(
                              {0, pad_s, pad_s}));
}

std::int64_t pooled(std::int64_t n, std::int64_t k, std::int64_t pad = 0) {
  return (n + 2 * pad - k) / k + 1;
}

}  // namespace

torch::nn::Conv3d conv3x3x3(std::int64_t in, std::int64_t out, std::int64_t spatial_dilation,
                            bool bias) {
  const std::int64_t d = spatial_dilation;
  return torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, 3)
                               .stride(1)
                               .padding({1, d, d})
                               .dilation({1, d, d})
                               .bias(bias));
}

std::array<std::int64_t, 4> C3dTrunkConfig::output_shape() const {
  std::int64_t t = frames, s = crop;
  s = pooled(s, 2);                 // pool1 (1,2,2)
  t = pooled(t, 2), s = pooled(s, 2);  // pool2
  t = pooled(t, 2), s = pooled(s, 2);  // pool3
  t = pooled(t, 2), s = pooled(s, 2);  // pool4
  t = pooled(t, 2), s = pooled(s, 2, 1);  // pool5, spatial padding 1
  return {channels[7], t, s, s};
}

C3dTrunkImpl::C3dTrunkImpl(C3dTrunkConfig config) : config_(config) {
  const auto& c = config_.channels;
  conv1 = register_module("conv1", conv3x3x3(3, c[0]));
  conv2 = register_module("conv2", conv3x3x3(c[0], c[1]));
  conv3a = register_module("conv3a", conv3x3x3(c[1], c[2]));
  conv3b = register_module("conv3b", conv3x3x3(c[2], c[3]));
  conv4a = register_module("conv4a", conv3x3x3(c[3], c[4]));
  conv4b = register_module("conv4b", conv3x3x3(c[4], c[5]));
  conv5a = register_module("conv5a", conv3x3x3(c[5], c[6]));
  conv5b = register_module("conv5b", conv3x3x3(c[6], c[7]));
}

torch::Tensor C3dTrunkImpl::forward(const torch::Tensor& clip, FeatureCaptures* captures) {
  check_clip(clip, config_.frames, config_.crop, "c3d trunk");
  auto capture = [&](const torch::Tensor& t, const char* tag) {
    if (captures) captures->push_back({t, tag});
  };
  auto x = max_pool(torch::relu(conv1(clip)), 1, 2);
  capture(x, "c1");
  x = max_pool(torch::relu(conv2(x)), 2, 2);
  capture(x, "c2");
  x = max_pool(torch::relu(conv3b(torch::relu(conv3a(x)))), 2, 2);
  capture(x, "c3");
  x = max_pool(torch::relu(conv4b(torch::relu(conv4a(x)))), 2, 2);
  capture(x, "c4");
  x = torch::relu(conv5b(torch::relu(conv5a(x))));
  capture(x, "c5");
  return max_pool(x, 2, 2, 1);
}

std::array<std::int64_t, 4> MscadcTrunkConfig::output_shape() const {
  std::int64_t t = frames, s = crop;
  s = pooled(s, 2);
  t = pooled(t, 2), s = pooled(s, 2);
  t = pooled(t, 2), s = pooled(s, 2);
  return {channels[7], t, s, s};
}

MscadcTrunkImpl::MscadcTrunkImpl(MscadcTrunkConfig config) : config_(config) {
  const auto& c = config_.channels;
  std::int64_t in = 3;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::int64_t dilation = i >= 6 ? config_.dilation : 1;
    convs_->push_back(conv3x3x3(in, c[i], dilation, !config_.batchnorm));
    if (config_.batchnorm) {
      norms_->push_back(torch::nn::BatchNorm3d(
          torch::nn::BatchNormOptions(c[i]).eps(1e-5).momentum(0.1)));
    }
    in = c[i];
  }
  register_module("convs", convs_);
  register_module("norms", norms_);
  dropout_ = register_module("dropout", torch::nn::Dropout(config_.dropout));
}

torch::Tensor MscadcTrunkImpl::block(std::size_t i, const torch::Tensor& x) {
  auto y = convs_->at<torch::nn::Conv3dImpl>(i).forward(x);
  if (config_.batchnorm) y = norms_->at<torch::nn::BatchNorm3dImpl>(i).forward(y);
  return torch::relu(y);
}

torch::Tensor MscadcTrunkImpl::forward(const torch::Tensor& clip, FeatureCaptures* captures) {
  check_clip(clip, config_.frames, config_.crop, "mscadc trunk");
  auto capture = [&](const torch::Tensor& t, const char* tag) {
    if (captures) captures->push_back({t, tag});
  };
  auto x = max_pool(block(0, clip), 1, 2);
  capture(x, "c1");
  x = max_pool(block(1, x), 2, 2);
  capture(x, "c2");
  x = max_pool(block(3, block(2, x)), 2, 2);
  capture(x, "c3");
  x = block(5, block(4, x));
  capture(x, "c4");
  x = block(7, block(6, x));
  capture(x, "c5");
  return dropout_(x);
}

ContextNetImpl::ContextNetImpl(ContextNetConfig config) : config_(std::move(config)) {
  if (config_.dilations.empty()) throw ValidationError("context net: empty dilation schedule");
  for (auto d : config_.dilations) {
    if (d < 1) throw ValidationError("context net: dilation must be >= 1");
    layers_->push_back(conv3x3x3(config_.channels, config_.channels, d));
  }
  register_module("layers", layers_);
}

std::int64_t ContextNetImpl::receptive_field() const {
  std::int64_t rf = 1;
  for (auto d : config_.dilations) rf += 2 * d;
  return rf;
}

torch::Tensor ContextNetImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 5 || x.size(1) != config_.channels) {
    throw ValidationError("context net: expected (N, " + std::to_string(config_.channels) +
                          ", T, H, W) input");
  }
  const auto max_d = *std::max_element(config_.dilations.begin(), config_.dilations.end());
  if (x.size(3) < 2 * max_d + 1 || x.size(4) < 2 * max_d + 1) {
    throw ValidationError("context net: spatial extent " + std::to_string(x.size(3)) + "x" +
                          std::to_string(x.size(4)) + " below minimum " +
                          std::to_string(2 * max_d + 1));
  }
  auto y = x;
  for (std::size_t i = 0; i < layers_->size(); ++i) {
    y = layers_->at<torch::nn::Conv3dImpl>(i).forward(y);
    if (i + 1 < layers_->size()) y = torch::relu(y);
  }
  return y;
}

}  // namespace mtlaqa
