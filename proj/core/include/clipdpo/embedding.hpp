// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Numeric substrate for every scoring stage: unit vectors, CLIP-scale
// similarity, batched score matrices and category prototypes.
//
// Vectors are stored as 32-bit floats. Dot products, norms and means
// accumulate in double precision in index order, so the batched and scalar
// paths produce identical bits.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace clipdpo {

class EmbeddingVector {
 public:
  // Throws EmptyInput for dim 0 and NonFinite for NaN/inf entries.
  explicit EmbeddingVector(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const noexcept { return values_[i]; }
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<float> values_;
};

// 100 x cosine similarity of two unit vectors.
struct ClipScore {
  double value = 0.0;
  constexpr auto operator<=>(const ClipScore&) const = default;
};

inline constexpr double kClipScale = 100.0;
inline constexpr double kZeroNormThreshold = 1e-12;
// Scoring refuses vectors whose norm is further than this from 1.
inline constexpr double kUnitNormTolerance = 1e-3;

// Sequential double-precision dot product. Throws DimensionMismatch.
double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v) noexcept;

std::vector<float> normalized(std::span<const float> v);
EmbeddingVector normalize(const EmbeddingVector& v);

bool is_unit(std::span<const float> v, double tolerance = kUnitNormTolerance) noexcept;

// Throws DimensionMismatch, or NotNormalized when either input is off the
// unit sphere by more than kUnitNormTolerance.
ClipScore clip_score(std::span<const float> a, std::span<const float> b);
ClipScore clip_score(const EmbeddingVector& a, const EmbeddingVector& b);

class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  ClipScore at(std::size_t row, std::size_t col) const { return {data_[row * cols_ + col]}; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> mutable_row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

// Entry (i, j) equals clip_score(images[i], texts[j]) bit-for-bit. Rows are
// partitioned across `workers` threads; each entry is computed independently.
ScoreMatrix score_matrix(std::span<const EmbeddingVector> images,
                         std::span<const EmbeddingVector> texts, unsigned workers = 1);

// normalize(mean of normalized descriptions). Throws EmptyInput,
// DimensionMismatch, or ZeroVector when the mean vanishes.
EmbeddingVector build_prototype(std::span<const EmbeddingVector> descriptions);

// Index of the highest-scoring candidate; the earliest index wins ties.
// Throws EmptyInput on an empty candidate list.
std::size_t argmax_score(std::span<const float> query,
                         std::span<const EmbeddingVector> candidates);

enum class Category : std::uint8_t { text = 0, people = 1, objects = 2, scenes = 3 };

inline constexpr std::array<Category, 4> kCategories{Category::text, Category::people,
                                                     Category::objects, Category::scenes};

std::string_view to_string(Category c) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;

// Exactly one unit prototype per category, held in kCategories order.
class PrototypeSet {
 public:
  // Prototypes are re-normalized on construction; all must share one dim.
  PrototypeSet(EmbeddingVector text, EmbeddingVector people, EmbeddingVector objects,
               EmbeddingVector scenes);

  const EmbeddingVector& prototype(Category c) const noexcept {
    return prototypes_[static_cast<std::size_t>(c)];
  }
  std::span<const EmbeddingVector> prototypes() const noexcept { return prototypes_; }
  std::size_t dim() const noexcept { return prototypes_.front().dim(); }

 private:
  std::vector<EmbeddingVector> prototypes_;
};

// Highest-cosine category; ties resolve to the earlier category in
// (text, people, objects, scenes).
Category assign_category(std::span<const float> image, const PrototypeSet& protos);
Category assign_category(const EmbeddingVector& image, const PrototypeSet& protos);

}  // namespace clipdpo
