#include "mtlaqa/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && !is_alnum(static_cast<unsigned char>(word[begin]))) ++begin;
    while (end > begin && !is_alnum(static_cast<unsigned char>(word[end - 1]))) --end;
    if (begin == end) continue;
    std::string token = word.substr(begin, end - begin);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Vocabulary::Vocabulary() {
  for (const char* reserved : {"<pad>", "<start>", "<end>", "<unk>"}) add(reserved);
}

void Vocabulary::add(const std::string& token) {
  if (token_to_index_.contains(token)) return;
  token_to_index_.emplace(token, size());
  index_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus) {
  std::set<std::string> distinct;
  for (const auto& sentence : corpus) distinct.insert(sentence.begin(), sentence.end());
  return from_tokens({distinct.begin(), distinct.end()});
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  for (const auto& t : tokens) {
    if (t.empty()) throw ValidationError("vocabulary: empty token");
    if (vocab.contains(t)) throw ValidationError("vocabulary: duplicate token '" + t + "'");
    vocab.add(t);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return from_tokens(tokens);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write vocabulary file " + path.string());
  for (const auto& t : content_tokens()) out << t << '\n';
}

std::int64_t Vocabulary::index_of(std::string_view token) const {
  const auto it = token_to_index_.find(std::string(token));
  return it == token_to_index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_index_.contains(std::string(token));
}

const std::string& Vocabulary::token_at(std::int64_t index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("vocabulary index " + std::to_string(index) + " out of range");
  }
  return index_to_token_[static_cast<std::size_t>(index)];
}

std::vector<std::string> Vocabulary::content_tokens() const {
  return {index_to_token_.begin() + kNumReserved, index_to_token_.end()};
}

CaptionTokens CaptionTokens::from_content(std::span<const std::int64_t> content) {
  if (content.size() > kMaxCaptionTokens) {
    throw ValidationError("caption exceeds " + std::to_string(kMaxCaptionTokens) + " tokens");
  }
  CaptionTokens out;
  out.indices.reserve(content.size() + 2);
  out.indices.push_back(kStart);
  for (std::int64_t idx : content) {
    if (idx == kPad || idx == kStart || idx == kEnd) {
      throw ValidationError("caption content contains a framing token");
    }
    out.indices.push_back(idx);
  }
  out.indices.push_back(kEnd);
  out.length = content.size();
  return out;
}

CaptionTokens encode_caption(std::string_view text, const Vocabulary& vocab) {
  std::vector<std::int64_t> content;
  for (const auto& token : tokenize(text)) {
    if (content.size() == kMaxCaptionTokens) break;
    content.push_back(vocab.index_of(token));
  }
  return CaptionTokens::from_content(content);
}

std::vector<std::string> decode_caption(const CaptionTokens& caption, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(caption.length);
  for (std::int64_t idx : caption.content()) out.push_back(vocab.token_at(idx));
  return out;
}

}  // namespace mtlaqa
