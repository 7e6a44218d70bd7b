#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <torch/torch.h>

namespace mtlaqa::testkit {

/// Central finite differences of a scalar function of a double tensor.
inline torch::Tensor central_difference(const std::function<double(const torch::Tensor&)>& f,
                                        const torch::Tensor& x, double step) {
  torch::NoGradGuard guard;
  auto point = x.detach().clone().to(torch::kDouble).contiguous();
  auto grad = torch::zeros_like(point);
  auto flat = point.view({-1});
  auto gflat = grad.view({-1});
  for (std::int64_t i = 0; i < flat.numel(); ++i) {
    const double original = flat[i].item<double>();
    flat[i] = original + step;
    const double up = f(point);
    flat[i] = original - step;
    const double down = f(point);
    flat[i] = original;
    gflat[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const torch::Tensor& a, const torch::Tensor& b) {
  const double diff = (a.to(torch::kDouble) - b.to(torch::kDouble)).norm().item<double>();
  const double scale = std::max(a.to(torch::kDouble).norm().item<double>(),
                                b.to(torch::kDouble).norm().item<double>());
  return scale == 0.0 ? diff : diff / scale;
}

/// Quadratic-time average ranks: 1 + #smaller + half the other ties.
inline std::vector<double> brute_force_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double smaller = 0.0;
    double ties = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j == i) continue;
      if (v[j] < v[i]) smaller += 1.0;
      if (v[j] == v[i]) ties += 1.0;
    }
    ranks[i] = 1.0 + smaller + 0.5 * ties;
  }
  return ranks;
}

inline double brute_force_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = brute_force_ranks(a);
  const auto rb = brute_force_ranks(b);
  const auto n = static_cast<long double>(a.size());
  long double ma = 0;
  long double mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0;
  long double saa = 0;
  long double sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

}  // namespace mtlaqa::testkit
