#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/core/types.hpp"
#include "lds/encoder/vocabulary.hpp"

namespace lds {

/// Trainable token-embedding table. A text's representation is the mean of
/// the rows of its (prompted) tokens.
///
/// Mean pooling stands in for reading the mask-position hidden state of a
/// contextual encoder: without contextualisation the mask row alone would not
/// depend on the input.
struct EncoderParams {
  RowMatrix table;

  std::size_t vocab_size() const { return static_cast<std::size_t>(table.rows()); }
  Eigen::Index dim() const { return table.cols(); }
};

/// Entries i.i.d. uniform in [-0.5/d, 0.5/d]. Values are rounded to float so
/// a freshly initialised table survives a checkpoint round-trip exactly.
inline EncoderParams init_encoder(std::size_t vocab_size, Eigen::Index dim, std::uint64_t seed) {
  if (dim <= 0) throw ConfigError("embedding dim must be positive");
  Rng rng(seed, Stream::kInit, 0);
  const double bound = 0.5 / static_cast<double>(dim);
  EncoderParams p{RowMatrix(static_cast<Eigen::Index>(vocab_size), dim)};
  for (Eigen::Index r = 0; r < p.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      p.table(r, c) = static_cast<float>(rng.uniform(-bound, bound));
    }
  }
  return p;
}

inline Vector encode_text(const EncoderParams& params, const TokenList& tokens) {
  if (tokens.empty()) throw DataError("cannot encode an empty token list");
  Vector v = Vector::Zero(params.dim());
  for (auto id : tokens) {
    if (id >= params.vocab_size()) throw DataError("token id out of range");
    v += params.table.row(static_cast<Eigen::Index>(id)).transpose();
  }
  return v / static_cast<double>(tokens.size());
}

inline Vector encode_label(const EncoderParams& params, const Vocabulary& vocab,
                           const std::string& label_name) {
  auto tokens = vocab.tokenize(label_name);
  if (tokens.empty()) throw DataError("label '" + label_name + "' has no tokens");
  return encode_text(params, tokens);
}

/// Gradient of a loss w.r.t. the embedding table, given the gradient w.r.t.
/// each encoded vector. Each vector is a mean over its k tokens, so every
/// contributing row receives grad / k; contributions accumulate in input order.
inline RowMatrix encoder_backward(const EncoderParams& params, const std::vector<TokenList>& token_lists,
                                  const std::vector<Vector>& grads) {
  if (token_lists.size() != grads.size()) {
    throw DataError("encoder_backward: " + std::to_string(token_lists.size()) + " token lists but " +
                    std::to_string(grads.size()) + " gradients");
  }
  RowMatrix out = RowMatrix::Zero(params.table.rows(), params.table.cols());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& tokens = token_lists[i];
    if (grads[i].size() != params.dim()) throw DataError("encoder_backward: gradient dim mismatch");
    if (tokens.empty()) throw DataError("encoder_backward: empty token list");
    const double scale = 1.0 / static_cast<double>(tokens.size());
    for (auto id : tokens) {
      if (id >= params.vocab_size()) throw DataError("token id out of range");
      out.row(static_cast<Eigen::Index>(id)) += scale * grads[i].transpose();
    }
  }
  return out;
}

}  // namespace lds
