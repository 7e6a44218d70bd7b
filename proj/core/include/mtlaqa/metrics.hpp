#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtlaqa/dive_label.hpp"

namespace mtlaqa {

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. Throws ValidationError("undefined
/// correlation") for fewer than two points or zero rank variance.
double spearman(std::span<const double> pred, std::span<const double> truth);

/// Fraction of exact index matches per sub-task, in Subtask order.
std::array<double, kNumSubtasks> subtask_accuracy(std::span<const DiveLabel> pred,
                                                  std::span<const DiveLabel> truth);

using TokenSeq = std::vector<std::string>;

/// Cumulative corpus BLEU-1..4 with brevity penalty, no smoothing.
std::array<double, 4> corpus_bleu(std::span<const TokenSeq> hypotheses,
                                  std::span<const TokenSeq> references);

/// Mean sentence-level ROUGE-L F-measure, F = (1 + b2) P R / (R + b2 P).
double rouge_l(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references,
               double beta_squared = 1.2);

/// CIDEr: cosine similarity of TF-IDF n-gram vectors (n = 1..4) averaged over
/// n and over samples; document frequencies come from the reference corpus.
double cider(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references);

struct CaptionScores {
  std::array<double, 4> bleu{};
  double rouge_l = 0.0;
  double cider = 0.0;
};

/// One reference per hypothesis. Rejects an empty corpus or a count mismatch.
CaptionScores caption_metrics(std::span<const TokenSeq> hypotheses,
                              std::span<const TokenSeq> references);

struct EvalReport {
  std::size_t samples = 0;
  std::optional<double> spearman;  // empty when undefined (constant predictions)
  std::optional<std::array<double, kNumSubtasks>> accuracy;
  std::optional<CaptionScores> captions;
  std::optional<double> caption_nll;  // teacher-forced, summed over steps, mean over samples

  /// Flat (column, value) pairs; headers follow the usual result tables:
  /// sp_corr, position ... num_twists, B1..B4, R, C, caption_nll.
  [[nodiscard]] std::vector<std::pair<std::string, std::optional<double>>> columns() const;
  [[nodiscard]] std::string to_json() const;
};

}  // namespace mtlaqa
