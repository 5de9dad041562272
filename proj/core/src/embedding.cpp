// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "clipdpo/error.hpp"

namespace clipdpo {

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::EmptyInput, "embedding must have dim >= 1");
  for (float x : values_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "embedding has a non-finite entry");
  }
}

double EmbeddingVector::norm() const noexcept { return l2_norm(values_); }

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double l2_norm(std::span<const float> v) noexcept {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

std::vector<float> normalized(std::span<const float> v) {
  const double n = l2_norm(v);
  if (!(n > kZeroNormThreshold)) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  }
  return out;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  return EmbeddingVector(normalized(v.values()));
}

bool is_unit(std::span<const float> v, double tolerance) noexcept {
  return std::abs(l2_norm(v) - 1.0) <= tolerance;
}

ClipScore clip_score(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (!is_unit(a) || !is_unit(b)) {
    throw Error(ErrorCode::NotNormalized, "clip_score requires unit-norm inputs");
  }
  return {kClipScale * dot(a, b)};
}

ClipScore clip_score(const EmbeddingVector& a, const EmbeddingVector& b) {
  return clip_score(a.values(), b.values());
}

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

ScoreMatrix score_matrix(std::span<const EmbeddingVector> images,
                         std::span<const EmbeddingVector> texts, unsigned workers) {
  ScoreMatrix out(images.size(), texts.size());
  if (images.empty() || texts.empty()) return out;

  const std::size_t dim = images.front().dim();
  for (const auto& v : images) {
    if (v.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "image dims differ");
    if (!is_unit(v.values())) throw Error(ErrorCode::NotNormalized, "image vector not unit-norm");
  }
  for (const auto& v : texts) {
    if (v.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "text dim differs from image dim");
    if (!is_unit(v.values())) throw Error(ErrorCode::NotNormalized, "text vector not unit-norm");
  }

  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.mutable_row(i);
      for (std::size_t j = 0; j < texts.size(); ++j) {
        row[j] = kClipScale * dot(images[i].values(), texts[j].values());
      }
    }
  };

  const std::size_t n_workers =
      std::clamp<std::size_t>(workers == 0 ? 1 : workers, 1, images.size());
  if (n_workers == 1) {
    fill_rows(0, images.size());
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n_workers);
  const std::size_t chunk = (images.size() + n_workers - 1) / n_workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(images.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fill_rows, begin, end);
  }
  return out;
}

EmbeddingVector build_prototype(std::span<const EmbeddingVector> descriptions) {
  if (descriptions.empty()) throw Error(ErrorCode::EmptyInput, "prototype needs >= 1 description");
  const std::size_t dim = descriptions.front().dim();
  std::vector<double> sum(dim, 0.0);
  for (const auto& d : descriptions) {
    if (d.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "description dims differ");
    const auto unit = normalized(d.values());
    for (std::size_t i = 0; i < dim; ++i) sum[i] += unit[i];
  }
  const double count = static_cast<double>(descriptions.size());
  double sq = 0.0;
  for (double& x : sum) {
    x /= count;
    sq += x * x;
  }
  const double n = std::sqrt(sq);
  if (!(n > kZeroNormThreshold)) throw Error(ErrorCode::ZeroVector, "prototype mean vanishes");
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(sum[i] / n);
  return EmbeddingVector(std::move(out));
}

std::size_t argmax_score(std::span<const float> query,
                         std::span<const EmbeddingVector> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "no candidates to score");
  std::size_t best = 0;
  ClipScore best_score = clip_score(query, candidates[0].values());
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const ClipScore s = clip_score(query, candidates[i].values());
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::text: return "text";
    case Category::people: return "people";
    case Category::objects: return "objects";
    case Category::scenes: return "scenes";
  }
  return "text";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (Category c : kCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

PrototypeSet::PrototypeSet(EmbeddingVector text, EmbeddingVector people,
                           EmbeddingVector objects, EmbeddingVector scenes) {
  prototypes_.reserve(4);
  for (auto* v : {&text, &people, &objects, &scenes}) {
    if (v->dim() != text.dim()) throw Error(ErrorCode::DimensionMismatch, "prototype dims differ");
    prototypes_.push_back(normalize(*v));
  }
}

Category assign_category(std::span<const float> image, const PrototypeSet& protos) {
  return kCategories[argmax_score(image, protos.prototypes())];
}

Category assign_category(const EmbeddingVector& image, const PrototypeSet& protos) {
  return assign_category(image.values(), protos);
}

}  // namespace clipdpo
