#include "mtlaqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

using NgramCounts = std::map<std::vector<std::string>, double>;

NgramCounts ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1.0;
  }
  return counts;
}

void check_corpus(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  if (hyps.empty()) throw ValidationError("caption metrics: empty corpus");
  if (hyps.size() != refs.size()) {
    throw ValidationError("caption metrics: hypothesis/reference count mismatch");
  }
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw ValidationError("spearman: length mismatch");
  if (pred.size() < 2) throw ValidationError("undefined correlation: fewer than two samples");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(truth[i])) {
      throw ValidationError("spearman: non-finite value");
    }
  }
  const auto rp = average_ranks(pred);
  const auto rt = average_ranks(truth);
  const double n = static_cast<double>(rp.size());
  const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
  const double mt = std::accumulate(rt.begin(), rt.end(), 0.0) / n;
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    cov += (rp[i] - mp) * (rt[i] - mt);
    vp += (rp[i] - mp) * (rp[i] - mp);
    vt += (rt[i] - mt) * (rt[i] - mt);
  }
  if (vp == 0.0 || vt == 0.0) throw ValidationError("undefined correlation: zero rank variance");
  return std::clamp(cov / std::sqrt(vp * vt), -1.0, 1.0);
}

std::array<double, kNumSubtasks> subtask_accuracy(std::span<const DiveLabel> pred,
                                                  std::span<const DiveLabel> truth) {
  if (pred.size() != truth.size()) throw ValidationError("accuracy: count mismatch");
  std::array<double, kNumSubtasks> acc{};
  if (pred.empty()) return acc;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = pred[i].as_array();
    const auto t = truth[i].as_array();
    for (std::size_t s = 0; s < kNumSubtasks; ++s) acc[s] += p[s] == t[s] ? 1.0 : 0.0;
  }
  for (auto& a : acc) a /= static_cast<double>(pred.size());
  return acc;
}

std::array<double, 4> corpus_bleu(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  check_corpus(hyps, refs);
  std::array<double, 4> matches{}, totals{};
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += static_cast<double>(hyps[i].size());
    ref_len += static_cast<double>(refs[i].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = ngrams(hyps[i], n);
      const auto r = ngrams(refs[i], n);
      for (const auto& [gram, count] : h) {
        const auto it = r.find(gram);
        matches[n - 1] += it == r.end() ? 0.0 : std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }
  const double bp = hyp_len == 0.0 ? 0.0 : hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  std::array<double, 4> bleu{};
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    if (matches[n] == 0.0 || totals[n] == 0.0) zero = true;
    if (!zero) log_sum += std::log(matches[n] / totals[n]);
    bleu[n] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return bleu;
}

double rouge_l(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs, double beta_squared) {
  check_corpus(hyps, refs);
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    if (hyps[i].empty() || refs[i].empty()) continue;
    const double lcs = static_cast<double>(lcs_length(hyps[i], refs[i]));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(hyps[i].size());
    const double r = lcs / static_cast<double>(refs[i].size());
    sum += (1.0 + beta_squared) * p * r / (r + beta_squared * p);
  }
  return sum / static_cast<double>(hyps.size());
}

double cider(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  check_corpus(hyps, refs);
  const double docs = static_cast<double>(refs.size());
  double total = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<NgramCounts> ref_grams(refs.size());
    std::map<std::vector<std::string>, double> doc_freq;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ref_grams[i] = ngrams(refs[i], n);
      for (const auto& entry : ref_grams[i]) doc_freq[entry.first] += 1.0;
    }
    auto tfidf = [&](const NgramCounts& counts) {
      double len = 0.0;
      for (const auto& entry : counts) len += entry.second;
      NgramCounts vec;
      for (const auto& [gram, count] : counts) {
        const auto it = doc_freq.find(gram);
        const double df = it == doc_freq.end() ? 0.0 : it->second;
        vec[gram] = (count / len) * std::log(docs / std::max(1.0, df));
      }
      return vec;
    };
    double sum_n = 0.0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const auto h = tfidf(ngrams(hyps[i], n));
      const auto r = tfidf(ref_grams[i]);
      double dot = 0.0, nh = 0.0, nr = 0.0;
      for (const auto& [gram, w] : h) {
        nh += w * w;
        const auto it = r.find(gram);
        if (it != r.end()) dot += w * it->second;
      }
      for (const auto& entry : r) nr += entry.second * entry.second;
      if (nh > 0.0 && nr > 0.0) sum_n += dot / std::sqrt(nh * nr);
    }
    total += sum_n / static_cast<double>(hyps.size());
  }
  return total / 4.0;
}

CaptionScores caption_metrics(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  return {corpus_bleu(hyps, refs), rouge_l(hyps, refs), cider(hyps, refs)};
}

std::vector<std::pair<std::string, std::optional<double>>> EvalReport::columns() const {
  std::vector<std::pair<std::string, std::optional<double>>> cols;
  cols.emplace_back("sp_corr", spearman);
  for (std::size_t s = 0; s < kNumSubtasks; ++s) {
    cols.emplace_back(std::string(kSubtaskNames[s]),
                      accuracy ? std::optional<double>((*accuracy)[s]) : std::nullopt);
  }
  for (std::size_t n = 0; n < 4; ++n) {
    cols.emplace_back("B" + std::to_string(n + 1),
                      captions ? std::optional<double>(captions->bleu[n]) : std::nullopt);
  }
  cols.emplace_back("R", captions ? std::optional<double>(captions->rouge_l) : std::nullopt);
  cols.emplace_back("C", captions ? std::optional<double>(captions->cider) : std::nullopt);
  cols.emplace_back("caption_nll", caption_nll);
  return cols;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["samples"] = samples;
  for (const auto& [name, value] : columns()) {
    if (value) j[name] = *value;
    else j[name] = nullptr;
  }
  return j.dump();
}

}  // namespace mtlaqa
