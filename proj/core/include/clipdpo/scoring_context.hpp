// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clipdpo/embedding_store.hpp"
#include "clipdpo/records.hpp"

namespace clipdpo {

// Resolves image ids to image embeddings (through ImageRecord::embedding_ref)
// and record keys (caption_id, qa_id) to text embeddings. Holds references;
// the stores must outlive the context.
class ScoringContext {
 public:
  // Throws DuplicateId, or MissingEmbedding for the first image whose
  // embedding_ref is not in `image_store`.
  ScoringContext(const EmbeddingStore& image_store, const EmbeddingStore& text_store,
                 std::span<const ImageRecord> images);

  // Throws UnknownImageId.
  std::span<const float> image(std::string_view image_id) const;
  // Throws MissingEmbedding.
  std::span<const float> text(std::string_view key) const;

  const EmbeddingStore& image_store() const noexcept { return images_; }
  const EmbeddingStore& text_store() const noexcept { return texts_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  const EmbeddingStore& images_;
  const EmbeddingStore& texts_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> image_rows_;
};

}  // namespace clipdpo
