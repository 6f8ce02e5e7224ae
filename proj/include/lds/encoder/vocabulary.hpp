#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"

namespace lds {

using TokenId = std::size_t;
using TokenList = std::vector<TokenId>;

inline constexpr std::string_view kMaskPlaceholder = "[MASK]";
inline constexpr std::string_view kSentencePlaceholder = "[sentence]";

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

/// Splits text into lowercase word pieces. A literal "[MASK]" is kept as one
/// piece; every other non-alphanumeric ASCII byte is a separator. Bytes >= 0x80
/// count as word characters so UTF-8 words stay whole.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kMaskPlaceholder.size()) == kMaskPlaceholder) {
      out.emplace_back(kMaskPlaceholder);
      i += kMaskPlaceholder.size();
      continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    if (!is_word_byte(c)) {
      ++i;
      continue;
    }
    std::string word;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    out.push_back(std::move(word));
  }
  return out;
}

}  // namespace detail

/// Token <-> id map. Ids 0 and 1 are reserved for the unknown and mask tokens.
class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kMask = 1;
  static constexpr std::string_view kUnkToken = "[UNK]";

  Vocabulary() {
    tokens_ = {std::string(kUnkToken), std::string(kMaskPlaceholder)};
    ids_.emplace(tokens_[0], kUnk);
    ids_.emplace(tokens_[1], kMask);
  }

  /// Rebuilds a vocabulary from tokens in id order, as stored in a checkpoint.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < 2 || tokens[0] != kUnkToken || tokens[1] != kMaskPlaceholder) {
      throw DataError("vocabulary must start with the reserved [UNK] and [MASK] tokens");
    }
    Vocabulary v;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      if (v.contains(tokens[i])) throw DataError("duplicate vocabulary token '" + tokens[i] + "'");
      v.add(tokens[i]);
    }
    return v;
  }

  TokenId add(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  /// Adds every word of `text`.
  void add_words(std::string_view text) {
    for (const auto& w : detail::split_words(text)) add(w);
  }

  bool contains(const std::string& token) const { return ids_.count(token) != 0; }

  TokenId id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  /// Lowercases, splits on whitespace and punctuation and maps each word to
  /// its id. Unknown words map to kUnk, a literal "[MASK]" to kMask.
  TokenList tokenize(std::string_view text) const {
    TokenList out;
    for (const auto& w : detail::split_words(text)) out.push_back(id(w));
    return out;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Prompt with exactly one "[MASK]" and one "[sentence]" placeholder, e.g.
/// "This is a [MASK] news: [sentence]".
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string pattern) : pattern_(std::move(pattern)) {
    for (auto placeholder : {kMaskPlaceholder, kSentencePlaceholder}) {
      const auto first = pattern_.find(placeholder);
      if (first == std::string::npos ||
          pattern_.find(placeholder, first + placeholder.size()) != std::string::npos) {
        throw ConfigError("template '" + pattern_ + "' must contain " + std::string(placeholder) +
                          " exactly once");
      }
    }
  }

  const std::string& pattern() const { return pattern_; }

  /// Substitutes `text` for "[sentence]"; "[MASK]" stays literal.
  std::string apply(std::string_view text) const {
    std::string out = pattern_;
    out.replace(out.find(kSentencePlaceholder), kSentencePlaceholder.size(), text);
    return out;
  }

 private:
  std::string pattern_;
};

inline std::string apply_template(const PromptTemplate& tmpl, std::string_view text) {
  return tmpl.apply(text);
}

/// Vocabulary over the training-class texts, every label name in the dataset
/// and the template's own words. No frequency cutoff.
inline Vocabulary build_vocabulary(const Dataset& dataset, const std::vector<std::string>& train_classes,
                                   const PromptTemplate& tmpl) {
  Vocabulary vocab;
  std::string bare = tmpl.pattern();
  bare.replace(bare.find(kSentencePlaceholder), kSentencePlaceholder.size(), " ");
  vocab.add_words(bare);
  for (const auto& c : train_classes) {
    for (auto i : dataset.members(c)) vocab.add_words(dataset.sample(i).text);
  }
  for (const auto& c : dataset.classes()) vocab.add_words(c);
  return vocab;
}

}  // namespace lds
