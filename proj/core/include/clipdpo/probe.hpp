// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Hallucination probe: counts hallucinated captions the model prefers over
// the original, and how often CLIP ranks the original back on top.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clipdpo/embedding_store.hpp"

namespace clipdpo {

enum class HallucinationType { existence, attribute, relationship };

inline constexpr std::array<HallucinationType, 3> kHallucinationTypes{
    HallucinationType::existence, HallucinationType::attribute, HallucinationType::relationship};

std::string_view to_string(HallucinationType t) noexcept;
std::optional<HallucinationType> parse_hallucination_type(std::string_view s) noexcept;

struct ProbeCaption {
  std::string text;
  double model_loglik = 0.0;
  std::string embedding_ref;
};

struct ProbeRecord {
  std::string image_id;
  ProbeCaption original;
  // Indexed by HallucinationType; at most one caption per type.
  std::array<std::optional<ProbeCaption>, 3> hallucinated;
};

using TypeCounts = std::array<std::size_t, 3>;
// nullopt for a type with no inverted records.
using TypeRates = std::array<std::optional<double>, 3>;

// Records whose hallucinated caption of type t has strictly higher likelihood
// than the original.
TypeCounts likelihood_inversions(std::span<const ProbeRecord> records);
bool is_inverted(const ProbeRecord& r, HallucinationType t) noexcept;

// Over inverted records only, the percentage with
// clip(image, original) > clip(image, hallucinated). Images are looked up by
// image_id in `images`, captions by embedding_ref in `texts`. Throws
// MissingEmbedding.
TypeRates clip_correction_rate(std::span<const ProbeRecord> records, const EmbeddingStore& images,
                               const EmbeddingStore& texts);

// JSON lines {"image_id", "original": {"text", "model_loglik", "embedding_ref"},
// "hallucinated": [{"type", "text", "model_loglik", "embedding_ref"}, ...]}.
// Throws IoError, SchemaError, DuplicateId.
std::vector<ProbeRecord> load_probe_records(const std::filesystem::path& path);

}  // namespace clipdpo
