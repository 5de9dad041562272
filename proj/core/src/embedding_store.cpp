// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/embedding_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "clipdpo/error.hpp"

namespace clipdpo {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  template <typename T>
  T get_le() {
    if (!has(sizeof(T))) throw Error(ErrorCode::TruncatedPayload, "unexpected end of header");
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string_view take(std::size_t n) {
    if (!has(n)) throw Error(ErrorCode::TruncatedPayload, "unexpected end of id table");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

float f32_from_le(const char* p) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(u);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::uint32_t dim, std::vector<std::string> ids,
                               std::vector<float> payload)
    : dim_(dim), ids_(std::move(ids)), payload_(std::move(payload)) {
  if (dim_ == 0) throw Error(ErrorCode::DimMismatchHeader, "store dim must be >= 1");
  if (payload_.size() != ids_.size() * static_cast<std::size_t>(dim_)) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(payload_.size()) +
                                                 " values, expected " +
                                                 std::to_string(ids_.size() * dim_));
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate store id", ids_[i]);
    }
    std::span<float> r(payload_.data() + i * dim_, dim_);
    for (float x : r) {
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite embedding row", ids_[i]);
    }
    try {
      const auto unit = normalized(r);
      std::copy(unit.begin(), unit.end(), r.begin());
    } catch (const Error& e) {
      throw Error(e.code(), "cannot normalize embedding row: " + e.message(), ids_[i]);
    }
  }
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader rd(bytes);
  if (!rd.has(4) || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not an EMB1 store");
  }
  rd.take(4);
  const auto version = rd.get_le<std::uint32_t>();
  if (version != kEmbeddingStoreVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "store version " + std::to_string(version));
  }
  const auto dim = rd.get_le<std::uint32_t>();
  const auto count = rd.get_le<std::uint64_t>();
  if (dim == 0) throw Error(ErrorCode::DimMismatchHeader, "header dim is 0");

  std::vector<std::string> ids;
  // Each id costs at least its 4-byte length prefix; reject absurd counts early.
  if (count > rd.remaining() / 4) {
    throw Error(ErrorCode::TruncatedPayload, "id table shorter than header count");
  }
  ids.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = rd.get_le<std::uint32_t>();
    ids.emplace_back(rd.take(len));
  }

  const std::size_t expected = static_cast<std::size_t>(count) * dim * sizeof(float);
  if (rd.remaining() < expected) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(rd.remaining()) +
                                                 " bytes, expected " + std::to_string(expected));
  }
  if (rd.remaining() > expected) {
    throw Error(ErrorCode::DimMismatchHeader, "payload has trailing bytes beyond count x dim");
  }
  std::vector<float> payload(static_cast<std::size_t>(count) * dim);
  const char* p = bytes.data() + (bytes.size() - expected);
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = f32_from_le(p + 4 * i);
  return EmbeddingStore(dim, std::move(ids), std::move(payload));
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  write_embedding_store(path, dim_, ids_, payload_);
}

bool EmbeddingStore::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::row(std::size_t index) const {
  return std::span<const float>(payload_).subspan(index * dim_, dim_);
}

std::span<const float> EmbeddingStore::row(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::MissingEmbedding, "no embedding for id", std::string(id));
  return row(*idx);
}

EmbeddingVector EmbeddingStore::vector(std::string_view id) const {
  auto r = row(id);
  return EmbeddingVector(std::vector<float>(r.begin(), r.end()));
}

void write_embedding_store(const std::filesystem::path& path, std::uint32_t dim,
                           std::span<const std::string> ids, std::span<const float> payload) {
  if (payload.size() != ids.size() * static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::TruncatedPayload, "payload size does not match ids x dim");
  }
  std::string out(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(out, kEmbeddingStoreVersion);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, ids.size());
  for (const auto& id : ids) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out += id;
  }
  out.reserve(out.size() + payload.size() * 4);
  for (float x : payload) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace clipdpo
