// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/scoring_context.hpp"

#include "clipdpo/error.hpp"

namespace clipdpo {

ScoringContext::ScoringContext(const EmbeddingStore& image_store, const EmbeddingStore& text_store,
                               std::span<const ImageRecord> images)
    : images_(image_store), texts_(text_store) {
  if (image_store.dim() != text_store.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "image store dim " + std::to_string(image_store.dim()) + " vs text store dim " +
                    std::to_string(text_store.dim()));
  }
  image_rows_.reserve(images.size());
  for (const auto& im : images) {
    auto row = image_store.find(im.embedding_ref);
    if (!row) {
      throw Error(ErrorCode::MissingEmbedding,
                  "embedding_ref '" + im.embedding_ref + "' not in image store", im.image_id);
    }
    if (!image_rows_.emplace(im.image_id, *row).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate image_id", im.image_id);
    }
  }
}

std::span<const float> ScoringContext::image(std::string_view image_id) const {
  auto it = image_rows_.find(image_id);
  if (it == image_rows_.end()) {
    throw Error(ErrorCode::UnknownImageId, "unknown image", std::string(image_id));
  }
  return images_.row(it->second);
}

std::span<const float> ScoringContext::text(std::string_view key) const {
  return texts_.row(key);
}

}  // namespace clipdpo
