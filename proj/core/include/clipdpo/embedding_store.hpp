// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Binary embedding store, little-endian:
//
//   "EMB1"            4 bytes magic
//   u32 version       = 1
//   u32 dim
//   u64 count
//   count x (u32 byte length, UTF-8 id bytes)
//   count x dim f32   row-major payload
//
// Rows are re-normalized when a store is built or loaded, so every row handed
// out by the store is unit-norm.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clipdpo/embedding.hpp"

namespace clipdpo {

inline constexpr std::uint32_t kEmbeddingStoreVersion = 1;

class EmbeddingStore {
 public:
  // Throws DimMismatchHeader (dim 0), TruncatedPayload (payload size),
  // DuplicateId, ZeroVector or NonFinite (with the row id).
  EmbeddingStore(std::uint32_t dim, std::vector<std::string> ids, std::vector<float> payload);

  // Throws IoError, BadMagic, UnsupportedVersion, DimMismatchHeader,
  // TruncatedPayload, DuplicateId.
  static EmbeddingStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  bool contains(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;
  std::span<const float> row(std::size_t index) const;
  // Throws MissingEmbedding.
  std::span<const float> row(std::string_view id) const;
  EmbeddingVector vector(std::string_view id) const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::uint32_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> payload_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

// Writes rows verbatim (no normalization). Throws IoError or
// TruncatedPayload when payload.size() != ids.size() * dim.
void write_embedding_store(const std::filesystem::path& path, std::uint32_t dim,
                           std::span<const std::string> ids, std::span<const float> payload);

}  // namespace clipdpo
