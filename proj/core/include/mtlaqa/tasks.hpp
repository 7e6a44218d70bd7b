#pragma once

#include <string>

namespace mtlaqa {

/// Which task heads run. AQA is the main task and is always on; the four
/// combinations of the two auxiliary flags are the STL/MTL ablation arms.
struct TaskConfig {
  bool aqa = true;
  bool classification = true;
  bool captioning = true;

  static TaskConfig stl() { return {true, false, false}; }
  static TaskConfig all() { return {true, true, true}; }

  /// "AQA", "+ Cls", "+ Caps", "+ Cls + Caps".
  [[nodiscard]] std::string row_name() const;
  bool operator==(const TaskConfig&) const = default;
};

/// Weights of the combined objective. A zero weight disables that task.
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.01;
};

/// Task flags with zero-weight auxiliary tasks switched off.
TaskConfig effective_tasks(const TaskConfig& tasks, const LossWeights& weights);

}  // namespace mtlaqa
