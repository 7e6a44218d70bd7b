#include "mtlaqa/dive_label.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

std::vector<double> half_steps(double max_value) {
  std::vector<double> values;
  for (int i = 0; i * 0.5 <= max_value + 1e-9; ++i) values.push_back(i * 0.5);
  return values;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Case-insensitive match; a trailing plural "s" is tolerated ("Backwards").
std::int64_t find_name(const std::vector<std::string>& names, const std::string& value,
                       std::string_view field) {
  const std::string v = lower(value);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string n = lower(names[i]);
    if (v == n || v == n + "s") return static_cast<std::int64_t>(i);
  }
  throw ValidationError(std::string(field) + ": unknown class name '" + value + "'");
}

std::int64_t find_count(const std::vector<double>& grid, double value, std::string_view field) {
  if (!std::isfinite(value) || value < grid.front() - 1e-9 || value > grid.back() + 1e-9) {
    throw ValidationError(std::string(field) + ": value " + std::to_string(value) +
                          " out of range");
  }
  const double steps = (value - grid.front()) / 0.5;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ValidationError(std::string(field) + ": value " + std::to_string(value) +
                          " is not on the 0.5 grid");
  }
  return static_cast<std::int64_t>(std::llround(steps));
}

}  // namespace

const DiveLabelSchema& DiveLabelSchema::standard() {
  static const DiveLabelSchema schema{
      {"Free", "Tuck", "Pike"},
      {"No", "Yes"},
      {"Inward", "Reverse", "Backward", "Forward"},
      half_steps(4.5),
      half_steps(3.5),
  };
  return schema;
}

std::array<std::int64_t, kNumSubtasks> DiveLabelSchema::cardinalities() const {
  return {static_cast<std::int64_t>(position_classes.size()),
          static_cast<std::int64_t>(armstand_classes.size()),
          static_cast<std::int64_t>(rotation_classes.size()),
          static_cast<std::int64_t>(somersault_classes.size()),
          static_cast<std::int64_t>(twist_classes.size())};
}

std::int64_t DiveLabelSchema::total_classes() const {
  const auto c = cardinalities();
  return std::accumulate(c.begin(), c.end(), std::int64_t{0});
}

DiveLabel resolve_label(const DiveFields& fields, const DiveLabelSchema& schema) {
  DiveLabel label;
  label.position = find_name(schema.position_classes, fields.position, "position");
  label.armstand = find_name(schema.armstand_classes, fields.armstand, "armstand");
  label.rotation = find_name(schema.rotation_classes, fields.rotation, "rotation");
  label.somersaults = find_count(schema.somersault_classes, fields.somersaults, "somersaults");
  label.twists = find_count(schema.twist_classes, fields.twists, "twists");
  return label;
}

void validate_label(const DiveLabel& label, const DiveLabelSchema& schema) {
  const auto card = schema.cardinalities();
  const auto idx = label.as_array();
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    if (idx[i] < 0 || idx[i] >= card[i]) {
      throw ValidationError(std::string(kSubtaskNames[i]) + ": class index " +
                            std::to_string(idx[i]) + " outside [0, " + std::to_string(card[i]) +
                            ")");
    }
  }
}

DiveFields describe_label(const DiveLabel& label, const DiveLabelSchema& schema) {
  validate_label(label, schema);
  return {schema.position_classes[label.position], schema.armstand_classes[label.armstand],
          schema.rotation_classes[label.rotation], schema.somersault_classes[label.somersaults],
          schema.twist_classes[label.twists]};
}

std::vector<float> one_hot(const DiveLabel& label, const DiveLabelSchema& schema) {
  validate_label(label, schema);
  std::vector<float> out(static_cast<std::size_t>(schema.total_classes()), 0.0f);
  const auto card = schema.cardinalities();
  const auto idx = label.as_array();
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < kNumSubtasks; ++i) {
    out[static_cast<std::size_t>(offset + idx[i])] = 1.0f;
    offset += card[i];
  }
  return out;
}

AqaScore AqaScore::from_raw(double raw, double normalization_constant) {
  if (!std::isfinite(raw) || raw < 0.0) {
    throw ValidationError("raw score must be a non-negative finite number, got " +
                          std::to_string(raw));
  }
  if (!(normalization_constant > 0.0)) {
    throw ValidationError("normalization constant must be positive");
  }
  return {raw, raw / normalization_constant};
}

}  // namespace mtlaqa
