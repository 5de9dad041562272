// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// CLIP ranking and global filtering: per-image caption ranking, category
// assignment with text-image down-sampling, caption score / length filters
// and question score filters.
//
// Score thresholds drop strictly below the minimum; a score equal to the
// minimum is kept.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clipdpo/embedding.hpp"
#include "clipdpo/records.hpp"
#include "clipdpo/scoring_context.hpp"

namespace clipdpo {

struct CurationConfig {
  double caption_score_min = 28.0;
  double question_score_min = 25.0;
  std::size_t caption_max_words = 60;
  std::uint64_t text_downsample_seed = 0;
  // Keep probability for text-category images. nullopt: cap text at the mean
  // count of the other three categories (see auto_text_cap_ratio).
  std::optional<double> text_cap_ratio;

  // Throws InvalidConfig.
  void validate() const;
};

// Scores every caption against its image, marks it scored and sorts by score
// descending, caption_id ascending on ties. Throws UnknownImageId if a
// caption belongs to another image and MissingEmbedding(caption_id) when its
// text embedding is absent.
std::vector<CaptionRecord> rank_captions(const ImageRecord& image,
                                         std::vector<CaptionRecord> captions,
                                         const ScoringContext& ctx);

// min(1, mean(people, objects, scenes) / text); 1 when there are no text images.
double auto_text_cap_ratio(const std::array<std::size_t, 4>& category_counts) noexcept;

// Deterministic keep decision for one text-category image.
bool keep_text_image(std::uint64_t seed, std::string_view image_id, double ratio) noexcept;

struct DownsampleResult {
  // Input order is preserved in both lists; every image carries a category.
  std::vector<ImageRecord> kept;
  std::vector<ImageRecord> dropped;
  std::array<std::size_t, 4> category_counts{};
  double text_keep_ratio = 1.0;
};

// Throws MissingEmbedding / UnknownImageId. `workers` only partitions the
// scoring; the result does not depend on it.
DownsampleResult categorize_and_downsample(std::vector<ImageRecord> images,
                                           const PrototypeSet& protos, const CurationConfig& cfg,
                                           const ScoringContext& ctx, unsigned workers = 1);

// Applies the score check first, then the length check, to every scored
// caption; terminal captions are left as they are, which makes the filter
// idempotent. Returns all captions in input order. Throws UnscoredCaption.
std::vector<CaptionRecord> filter_captions(std::vector<CaptionRecord> captions,
                                           const CurationConfig& cfg);

// Scores each raw question against its image (question embedding keyed by
// qa_id) and drops those under question_score_min. Questions that already
// carry a score are re-checked without re-scoring. Returns all records in
// input order.
std::vector<QARecord> filter_questions(std::vector<QARecord> qas, const ScoringContext& ctx,
                                       const CurationConfig& cfg);

// Captions with status kept, in input order.
std::vector<CaptionRecord> kept_captions(std::span<const CaptionRecord> captions);
// QA records that passed the question filter (status scored or kept).
std::vector<QARecord> surviving_questions(std::span<const QARecord> qas);

}  // namespace clipdpo
