#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/types.hpp"
#include "lds/encoder/embedding_store.hpp"
#include "lds/encoder/toy_encoder.hpp"
#include "lds/encoder/vocabulary.hpp"

namespace lds {

/// Turns an episode of sample indices into representation vectors.
using EpisodeEmbedder = std::function<EmbeddedEpisode(const Episode&)>;

/// Prompted token ids of every sample, plus the bare tokens of every label.
struct TokenizedCorpus {
  std::vector<TokenList> samples;
  std::unordered_map<std::string, TokenList> labels;

  const TokenList& label(const std::string& name) const {
    auto it = labels.find(name);
    if (it == labels.end()) throw DataError("no tokens for label '" + name + "'");
    return it->second;
  }
};

inline TokenizedCorpus tokenize_corpus(const Dataset& dataset, const Vocabulary& vocab, const PromptTemplate& tmpl) {
  TokenizedCorpus c;
  c.samples.reserve(dataset.size());
  for (const auto& s : dataset.samples()) c.samples.push_back(vocab.tokenize(tmpl.apply(s.text)));
  for (const auto& name : dataset.classes()) {
    auto tokens = vocab.tokenize(name);
    if (tokens.empty()) throw DataError("label '" + name + "' has no tokens");
    c.labels.emplace(name, std::move(tokens));
  }
  return c;
}

inline EmbeddedEpisode embed_episode(const EncoderParams& params, const TokenizedCorpus& corpus, const Episode& ep) {
  EmbeddedEpisode out;
  out.class_names = ep.class_names;
  for (std::size_t i = 0; i < ep.class_names.size(); ++i) {
    auto& sup = out.support_reps.emplace_back();
    for (auto idx : ep.support[i]) sup.push_back(encode_text(params, corpus.samples.at(idx)));
    auto& qry = out.query_reps.emplace_back();
    for (auto idx : ep.query[i]) qry.push_back(encode_text(params, corpus.samples.at(idx)));
    out.label_reps.push_back(encode_text(params, corpus.label(ep.class_names[i])));
  }
  return out;
}

inline EmbeddedEpisode embed_episode(const EmbeddingStore& samples, const EmbeddingStore& labels, const Episode& ep) {
  if (samples.dim() != labels.dim()) throw DataError("sample and label stores differ in dimension");
  auto lookup = [](const EmbeddingStore& s, const std::string& key, const char* what) -> const Vector& {
    if (!s.contains(key)) throw DataError(std::string("missing embedding for ") + what + " '" + key + "'");
    return s.at(key);
  };
  EmbeddedEpisode out;
  out.class_names = ep.class_names;
  for (std::size_t i = 0; i < ep.class_names.size(); ++i) {
    auto& sup = out.support_reps.emplace_back();
    for (auto idx : ep.support[i]) sup.push_back(lookup(samples, std::to_string(idx), "sample"));
    auto& qry = out.query_reps.emplace_back();
    for (auto idx : ep.query[i]) qry.push_back(lookup(samples, std::to_string(idx), "sample"));
    out.label_reps.push_back(lookup(labels, ep.class_names[i], "label"));
  }
  return out;
}

/// The returned embedders hold references; the arguments must outlive them.
inline EpisodeEmbedder encoder_embedder(const EncoderParams& params, const TokenizedCorpus& corpus) {
  return [&params, &corpus](const Episode& ep) { return embed_episode(params, corpus, ep); };
}

inline EpisodeEmbedder store_embedder(const EmbeddingStore& samples, const EmbeddingStore& labels) {
  return [&samples, &labels](const Episode& ep) { return embed_episode(samples, labels, ep); };
}

/// Throws unless every sample of `classes` and each class name has a record.
inline void check_store_coverage(const Dataset& dataset, const std::vector<std::string>& classes,
                                 const EmbeddingStore& samples, const EmbeddingStore& labels) {
  for (const auto& c : classes) {
    if (!labels.contains(c)) throw DataError("missing embedding for label '" + c + "'");
    for (auto idx : dataset.members(c)) {
      if (!samples.contains(std::to_string(idx))) {
        throw DataError("missing embedding for sample " + std::to_string(idx) + " of class '" + c + "'");
      }
    }
  }
}

}  // namespace lds
