#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "converse/tensor.hpp"

namespace converse {

struct Corpus;

// Lowercases ASCII, maps URLs to <url> and @handles to <mention>, and splits
// on whitespace. ASCII punctuation is split off into single-character tokens.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kEmpty = 1;
  static constexpr std::size_t kUrl = 2;
  static constexpr std::size_t kMention = 3;

  Vocabulary();
  // Every token seen at least min_count times in the corpus tweets.
  static Vocabulary build(const Corpus& corpus, std::size_t min_count = 1);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t add(std::string_view token);
  std::optional<std::size_t> find(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Never returns an empty list: text without tokens maps to <empty>.
  // Unknown tokens map to <unk>, or throw VocabularyError when allow_oov is off.
  std::vector<std::size_t> encode(std::string_view text, bool allow_oov = true) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text format, one token per line: `token v1 v2 ... vd`.
struct EmbeddingFile {
  std::vector<std::string> tokens;
  Tensor vectors;  // [tokens, d]
};

EmbeddingFile load_embeddings(const std::filesystem::path& path);

}  // namespace converse
