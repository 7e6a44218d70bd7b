#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtlaqa {

inline constexpr std::size_t kNumSubtasks = 5;

/// Order of the factorized sub-fields everywhere in the library (logit
/// vectors, accuracy arrays, label tensors).
enum class Subtask : std::size_t { kPosition = 0, kArmstand, kRotation, kSomersaults, kTwists };

inline constexpr std::array<std::string_view, kNumSubtasks> kSubtaskNames = {
    "position", "armstand", "rotation_type", "num_somersaults", "num_twists"};

/// Factorized dive classification: position, armstand flag, rotation type,
/// somersault count and twist count. Counts live on a half-unit grid.
struct DiveLabelSchema {
  std::vector<std::string> position_classes;
  std::vector<std::string> armstand_classes;
  std::vector<std::string> rotation_classes;
  std::vector<double> somersault_classes;
  std::vector<double> twist_classes;

  /// Free/Tuck/Pike, No/Yes, Inward/Reverse/Backward/Forward,
  /// somersaults 0..4.5 and twists 0..3.5 in steps of 0.5.
  static const DiveLabelSchema& standard();

  [[nodiscard]] std::array<std::int64_t, kNumSubtasks> cardinalities() const;
  [[nodiscard]] std::int64_t total_classes() const;
};

struct DiveLabel {
  std::int64_t position = 0;
  std::int64_t armstand = 0;
  std::int64_t rotation = 0;
  std::int64_t somersaults = 0;
  std::int64_t twists = 0;

  [[nodiscard]] std::array<std::int64_t, kNumSubtasks> as_array() const {
    return {position, armstand, rotation, somersaults, twists};
  }
  static DiveLabel from_array(const std::array<std::int64_t, kNumSubtasks>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  bool operator==(const DiveLabel&) const = default;
};

/// Human-readable sub-field values as they appear in annotation files.
struct DiveFields {
  std::string position;
  std::string armstand;
  std::string rotation;
  double somersaults = 0.0;
  double twists = 0.0;
};

/// Resolves each field to its class index. Throws ValidationError naming the
/// offending field for unknown names, off-grid or out-of-range counts.
DiveLabel resolve_label(const DiveFields& fields, const DiveLabelSchema& schema);

/// Inverse of resolve_label for in-range labels.
DiveFields describe_label(const DiveLabel& label, const DiveLabelSchema& schema);

/// Throws ValidationError if any index falls outside its cardinality.
void validate_label(const DiveLabel& label, const DiveLabelSchema& schema);

/// Concatenated one-hot blocks, one per sub-field (length total_classes()).
std::vector<float> one_hot(const DiveLabel& label, const DiveLabelSchema& schema);

/// Judged score in competition units plus its dataset-normalized value.
struct AqaScore {
  double raw = 0.0;
  double normalized = 0.0;

  /// Throws ValidationError for negative raw scores or a non-positive constant.
  static AqaScore from_raw(double raw, double normalization_constant);
};

}  // namespace mtlaqa
