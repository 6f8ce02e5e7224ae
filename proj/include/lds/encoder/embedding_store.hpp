#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"
#include "lds/encoder/binary_io.hpp"

namespace lds {

// Layout: "LDSE", u8 version, u32 dim d, u32 record count, then per record
// u16 key length, key bytes, d float32. All integers little-endian.
inline constexpr char kStoreMagic[4] = {'L', 'D', 'S', 'E'};
inline constexpr std::uint8_t kStoreVersion = 1;

/// Precomputed representations keyed by sample id (decimal index) or label
/// name. Records keep insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(Eigen::Index dim = 0) : dim_(dim) {}

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }

  void insert(const std::string& key, Vector v) {
    if (dim_ == 0 && keys_.empty()) dim_ = v.size();
    if (v.size() != dim_) {
      throw DataError("embedding store: record '" + key + "' has dim " + std::to_string(v.size()) +
                      ", store dim is " + std::to_string(dim_));
    }
    if (key.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw DataError("embedding store: key longer than 65535 bytes");
    }
    if (!v.allFinite()) throw DataError("embedding store: record '" + key + "' is not finite");
    if (!pos_.try_emplace(key, keys_.size()).second) {
      throw DataError("embedding store: duplicate key '" + key + "'");
    }
    keys_.push_back(key);
    values_.push_back(std::move(v));
  }

  bool contains(const std::string& key) const { return pos_.count(key) != 0; }

  const Vector& at(const std::string& key) const {
    auto it = pos_.find(key);
    if (it == pos_.end()) throw DataError("embedding store: no record for '" + key + "'");
    return values_[it->second];
  }

  const Vector& value(std::size_t i) const { return values_.at(i); }

 private:
  Eigen::Index dim_;
  std::vector<std::string> keys_;
  std::vector<Vector> values_;
  std::unordered_map<std::string, std::size_t> pos_;
};

inline void write_embedding_store(std::ostream& out, const EmbeddingStore& store) {
  using namespace binary_io;
  out.write(kStoreMagic, 4);
  put_u8(out, kStoreVersion);
  put_u32(out, static_cast<std::uint32_t>(store.dim()));
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& key = store.keys()[i];
    put_u16(out, static_cast<std::uint16_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    for (double x : store.value(i)) put_f32(out, static_cast<float>(x));
  }
}

inline EmbeddingStore read_embedding_store(std::istream& in, const std::string& context = "store") {
  binary_io::Reader r(in, context);
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kStoreMagic)) {
    throw DataError(context + ": not an embedding store (bad magic)");
  }
  const auto version = r.u8();
  if (version != kStoreVersion) {
    throw DataError(context + ": unsupported version " + std::to_string(version));
  }
  const auto dim = static_cast<Eigen::Index>(r.u32());
  const auto count = r.u32();
  if (dim == 0 && count > 0) throw DataError(context + ": zero dimension with records");
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string key(r.u16(), '\0');
    r.bytes(key.data(), key.size());
    Vector v(dim);
    for (Eigen::Index c = 0; c < dim; ++c) v[c] = r.f32();
    store.insert(key, std::move(v));
  }
  if (!r.at_end()) throw DataError(context + ": trailing bytes after last record");
  return store;
}

inline void save_embedding_store(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embedding store '" + path + "'");
  write_embedding_store(out, store);
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline EmbeddingStore load_embedding_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding store '" + path + "'");
  return read_embedding_store(in, path);
}

}  // namespace lds
