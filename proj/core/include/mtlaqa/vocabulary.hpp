#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mtlaqa {

inline constexpr std::int64_t kPad = 0;
inline constexpr std::int64_t kStart = 1;
inline constexpr std::int64_t kEnd = 2;
inline constexpr std::int64_t kUnk = 3;
inline constexpr std::int64_t kNumReserved = 4;
inline constexpr std::size_t kMaxCaptionTokens = 100;

/// Lowercases, splits on whitespace, strips non-alphanumeric characters from
/// both ends of every token and drops tokens that end up empty.
std::vector<std::string> tokenize(std::string_view text);

/// Token <-> index bijection. Indices 0..3 are PAD, START, END, UNK.
class Vocabulary {
 public:
  Vocabulary();

  /// Distinct tokens of the given token stream, sorted, after the reserved block.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  /// One token per line, reserved entries excluded.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(index_to_token_.size()); }
  [[nodiscard]] std::int64_t index_of(std::string_view token) const;  // kUnk when absent
  [[nodiscard]] bool contains(std::string_view token) const;
  [[nodiscard]] const std::string& token_at(std::int64_t index) const;
  /// Non-reserved tokens in index order.
  [[nodiscard]] std::vector<std::string> content_tokens() const;

  bool operator==(const Vocabulary& other) const { return index_to_token_ == other.index_to_token_; }

 private:
  void add(const std::string& token);

  std::vector<std::string> index_to_token_;
  std::unordered_map<std::string, std::int64_t> token_to_index_;
};

/// START, content..., END. `length` counts content tokens only.
struct CaptionTokens {
  std::vector<std::int64_t> indices;
  std::size_t length = 0;

  /// Validates the START...END framing and the content cap.
  static CaptionTokens from_content(std::span<const std::int64_t> content);
  [[nodiscard]] std::span<const std::int64_t> content() const {
    return std::span<const std::int64_t>(indices).subspan(1, length);
  }
  bool operator==(const CaptionTokens&) const = default;
};

/// Empty text yields (START, END). Content is truncated to 100 tokens.
CaptionTokens encode_caption(std::string_view text, const Vocabulary& vocab);

/// Content tokens back to strings.
std::vector<std::string> decode_caption(const CaptionTokens& caption, const Vocabulary& vocab);

}  // namespace mtlaqa
