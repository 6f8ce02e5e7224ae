#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/encoder/binary_io.hpp"
#include "lds/encoder/toy_encoder.hpp"
#include "lds/encoder/vocabulary.hpp"

namespace lds {

// Layout: "LDSC", u8 version, u32 vocab size V, u32 dim d, V NUL-terminated
// tokens in id order, then V*d float32 row-major. All integers little-endian.
inline constexpr char kCheckpointMagic[4] = {'L', 'D', 'S', 'C'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  EncoderParams params;
  Vocabulary vocab;
};

inline void write_checkpoint(std::ostream& out, const EncoderParams& params, const Vocabulary& vocab) {
  using namespace binary_io;
  if (params.vocab_size() != vocab.size()) {
    throw DataError("checkpoint: table has " + std::to_string(params.vocab_size()) +
                    " rows but vocabulary has " + std::to_string(vocab.size()) + " tokens");
  }
  out.write(kCheckpointMagic, 4);
  put_u8(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(vocab.size()));
  put_u32(out, static_cast<std::uint32_t>(params.dim()));
  for (const auto& t : vocab.tokens()) {
    if (t.find('\0') != std::string::npos) throw DataError("checkpoint: token contains NUL");
    out.write(t.c_str(), static_cast<std::streamsize>(t.size() + 1));
  }
  for (Eigen::Index r = 0; r < params.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.table.cols(); ++c) {
      put_f32(out, static_cast<float>(params.table(r, c)));
    }
  }
}

inline Checkpoint read_checkpoint(std::istream& in, const std::string& context = "checkpoint") {
  binary_io::Reader r(in, context);
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kCheckpointMagic)) {
    throw DataError(context + ": not a checkpoint (bad magic)");
  }
  const auto version = r.u8();
  if (version != kCheckpointVersion) {
    throw DataError(context + ": unsupported version " + std::to_string(version));
  }
  const auto v = r.u32();
  const auto d = r.u32();
  if (d == 0) throw DataError(context + ": zero dimension");
  std::vector<std::string> tokens;
  tokens.reserve(v);
  for (std::uint32_t i = 0; i < v; ++i) tokens.push_back(r.cstring());
  Checkpoint ck{EncoderParams{RowMatrix(v, d)}, Vocabulary::from_tokens(tokens)};
  for (std::uint32_t row = 0; row < v; ++row) {
    for (std::uint32_t col = 0; col < d; ++col) {
      const float x = r.f32();
      if (!std::isfinite(x)) throw DataError(context + ": non-finite table entry");
      ck.params.table(row, col) = x;
    }
  }
  if (!r.at_end()) throw DataError(context + ": trailing bytes after table");
  return ck;
}

inline void save_checkpoint(const EncoderParams& params, const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, params, vocab);
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in, path);
}

}  // namespace lds
