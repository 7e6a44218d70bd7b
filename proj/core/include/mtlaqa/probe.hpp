#pragma once

#include <string>
#include <vector>

#include "mtlaqa/config.hpp"
#include "mtlaqa/dataset.hpp"
#include "mtlaqa/experiments.hpp"
#include "mtlaqa/networks.hpp"
#include "mtlaqa/preprocess.hpp"

namespace mtlaqa {

/// Ridge regression on standardized features with an unpenalized intercept.
struct RidgeModel {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 for constant columns
  std::vector<double> weights;
  double intercept = 0.0;

  [[nodiscard]] double predict(const std::vector<double>& x) const;
};

/// Closed form, primal or dual whichever system is smaller. lambda = +inf
/// gives zero weights (the mean predictor).
RidgeModel fit_ridge(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& targets, double lambda);

/// Globally pooled trunk activations per sample, keyed by layer tag.
std::vector<std::vector<std::vector<double>>> pooled_activations(
    MtlNetworkImpl& network, const SampleSet& samples, const PreprocessConfig& preprocess,
    const std::vector<std::string>& layers, std::int64_t batch_size = 3);

/// One row per requested layer with the test Spearman of a ridge fit on the
/// train activations. Train and test may come from different datasets.
ResultTable linear_probe(MtlNetworkImpl& network, const PreprocessConfig& preprocess,
                         const ProbeConfig& probe, const SampleSet& train, const SampleSet& test);

}  // namespace mtlaqa
