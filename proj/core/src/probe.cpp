#include "mtlaqa/probe.hpp"

#include <algorithm>
#include <cmath>

#include <torch/torch.h>

#include "mtlaqa/errors.hpp"
#include "mtlaqa/metrics.hpp"
#include "mtlaqa/trainer.hpp"

namespace mtlaqa {

double RidgeModel::predict(const std::vector<double>& x) const {
  if (x.size() != weights.size()) throw ValidationError("ridge: feature length mismatch");
  double y = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) y += weights[j] * (x[j] - mean[j]) / scale[j];
  return y;
}

RidgeModel fit_ridge(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& targets, double lambda) {
  const auto n = features.size();
  if (n < 2) throw ValidationError("ridge: need at least 2 training samples, got " + std::to_string(n));
  if (targets.size() != n) throw ValidationError("ridge: feature/target count mismatch");
  if (!(lambda > 0.0)) throw ValidationError("ridge: lambda must be > 0");
  const auto d = features.front().size();
  if (d == 0) throw ValidationError("ridge: empty feature vectors");

  RidgeModel m;
  m.mean.assign(d, 0.0);
  m.scale.assign(d, 0.0);
  m.weights.assign(d, 0.0);
  for (const auto& row : features) {
    if (row.size() != d) throw ValidationError("ridge: ragged feature matrix");
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += row[j];
  }
  for (auto& v : m.mean) v /= static_cast<double>(n);
  for (const auto& row : features) {
    for (std::size_t j = 0; j < d; ++j) m.scale[j] += (row[j] - m.mean[j]) * (row[j] - m.mean[j]);
  }
  for (auto& v : m.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v < 1e-12) v = 1.0;
  }
  double ybar = 0.0;
  for (auto y : targets) ybar += y;
  ybar /= static_cast<double>(n);
  m.intercept = ybar;
  if (std::isinf(lambda)) return m;

  auto z = torch::empty({static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)}, torch::kDouble);
  auto y = torch::empty({static_cast<std::int64_t>(n), 1}, torch::kDouble);
  auto za = z.accessor<double, 2>();
  auto ya = y.accessor<double, 2>();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      za[static_cast<std::int64_t>(i)][static_cast<std::int64_t>(j)] =
          (features[i][j] - m.mean[j]) / m.scale[j];
    }
    ya[static_cast<std::int64_t>(i)][0] = targets[i] - ybar;
  }
  torch::Tensor w;
  if (d <= n) {
    const auto a = z.t().mm(z) + lambda * torch::eye(static_cast<std::int64_t>(d), torch::kDouble);
    w = torch::linalg_solve(a, z.t().mm(y));
  } else {
    const auto k = z.mm(z.t()) + lambda * torch::eye(static_cast<std::int64_t>(n), torch::kDouble);
    w = z.t().mm(torch::linalg_solve(k, y));
  }
  const auto wa = w.accessor<double, 2>();
  for (std::size_t j = 0; j < d; ++j) m.weights[j] = wa[static_cast<std::int64_t>(j)][0];
  return m;
}

std::vector<std::vector<std::vector<double>>> pooled_activations(
    MtlNetworkImpl& network, const SampleSet& samples, const PreprocessConfig& preprocess,
    const std::vector<std::string>& layers, std::int64_t batch_size) {
  const bool was_training = network.is_training();
  network.eval();
  torch::NoGradGuard no_grad;
  std::vector<std::vector<std::vector<double>>> out(layers.size());
  const auto bs = static_cast<std::size_t>(std::max<std::int64_t>(1, batch_size));
  for (std::size_t begin = 0; begin < samples.size(); begin += bs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < std::min(samples.size(), begin + bs); ++i) idx.push_back(i);
    const auto batch = make_batch(samples, idx, preprocess, Mode::kEval, 0, 0);
    const auto maps = network.pooled_layer_features(batch.video);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto it = std::find_if(maps.begin(), maps.end(),
                                   [&](const FeatureMap& f) { return f.tag == layers[l]; });
      if (it == maps.end()) throw ValidationError("probe: network exposes no layer '" + layers[l] + "'");
      const auto v = it->data.to(torch::kDouble).contiguous();
      for (std::int64_t k = 0; k < v.size(0); ++k) {
        const auto row = v[k];
        out[l].emplace_back(row.data_ptr<double>(), row.data_ptr<double>() + row.numel());
      }
    }
  }
  if (was_training) network.train();
  return out;
}

ResultTable linear_probe(MtlNetworkImpl& network, const PreprocessConfig& preprocess,
                         const ProbeConfig& probe, const SampleSet& train, const SampleSet& test) {
  if (train.size() < 2) throw ValidationError("probe: need at least 2 training samples");
  if (test.empty()) throw ValidationError("probe: empty test set");
  const auto train_x = pooled_activations(network, train, preprocess, probe.layers);
  const auto test_x = pooled_activations(network, test, preprocess, probe.layers);
  std::vector<double> train_y, test_y;
  for (const auto* s : train) train_y.push_back(s->score.normalized);
  for (const auto* s : test) test_y.push_back(s->score.normalized);

  ResultTable t;
  t.title = "Linear probe test Spearman per layer";
  t.corner = "layer";
  t.columns = {"sp_corr"};
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    const auto model = fit_ridge(train_x[l], train_y, probe.lambda);
    std::vector<double> pred;
    pred.reserve(test_x[l].size());
    for (const auto& x : test_x[l]) pred.push_back(model.predict(x));
    t.rows.push_back(probe.layers[l]);
    t.cells.push_back({spearman(pred, test_y)});
  }
  return t;
}

}  // namespace mtlaqa
