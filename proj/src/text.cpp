#include "converse/text.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "converse/dataset_io.hpp"
#include "converse/error.hpp"

namespace converse {

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    const std::string_view piece = text.substr(i, j - i);
    i = j;
    if (starts_with_ci(piece, "http://") || starts_with_ci(piece, "https://") ||
        starts_with_ci(piece, "www.")) {
      out.emplace_back("<url>");
      continue;
    }
    if (piece.size() > 1 && piece[0] == '@') {
      out.emplace_back("<mention>");
      continue;
    }
    std::string word;
    for (char c : piece) {
      const auto uc = static_cast<unsigned char>(c);
      if (uc < 128 && std::ispunct(uc)) {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
        out.emplace_back(1, c);
      } else {
        word += static_cast<char>(uc < 128 ? std::tolower(uc) : uc);
      }
    }
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* t : {"<unk>", "<empty>", "<url>", "<mention>"}) add(t);
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& thread : corpus.threads) {
    for (const auto& tweet : thread.tweets) {
      for (auto& tok : tokenize(tweet.text)) ++counts[tok];
    }
  }
  Vocabulary v;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) v.add(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

std::size_t Vocabulary::add(std::string_view token) {
  auto [it, inserted] = index_.emplace(std::string(token), tokens_.size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Vocabulary::encode(std::string_view text, bool allow_oov) const {
  std::vector<std::size_t> ids;
  for (const auto& tok : tokenize(text)) {
    if (auto id = find(tok)) {
      ids.push_back(*id);
    } else if (allow_oov) {
      ids.push_back(kUnk);
    } else {
      throw VocabularyError("out-of-vocabulary token '" + tok + "'");
    }
  }
  if (ids.empty()) ids.push_back(kEmpty);
  return ids;
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  EmbeddingFile file;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> row;
    std::string num;
    while (fields >> num) {
      double v = 0.0;
      auto res = std::from_chars(num.data(), num.data() + num.size(), v);
      if (res.ec != std::errc() || res.ptr != num.data() + num.size()) {
        throw SchemaError("embeddings line " + std::to_string(line_no) + ": bad number '" + num + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) throw SchemaError("embeddings line " + std::to_string(line_no) + ": no values");
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw SchemaError("embeddings line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(row.size()));
    }
    file.tokens.push_back(token);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (file.tokens.empty()) throw SchemaError("embedding file is empty: " + path.string());
  file.vectors = Tensor({file.tokens.size(), dim}, std::move(values));
  return file;
}

}  // namespace converse
