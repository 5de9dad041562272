// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Zero-shot classification against a bank of class text prototypes, either
// from the embedding of a generated caption (text-text) or directly from the
// image embedding (image-text).

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clipdpo/embedding.hpp"
#include "clipdpo/encoder.hpp"

namespace clipdpo {

class ClassPrototypeBank {
 public:
  ClassPrototypeBank() = default;
  // Prototypes are normalized here. Throws DuplicateId, DimensionMismatch.
  ClassPrototypeBank(std::vector<std::string> names, std::vector<EmbeddingVector> prototypes);

  void add(std::string name, EmbeddingVector prototype);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  std::size_t dim() const noexcept { return prototypes_.empty() ? 0 : prototypes_.front().dim(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::span<const std::string> names() const noexcept { return names_; }
  std::span<const EmbeddingVector> prototypes() const noexcept { return prototypes_; }

 private:
  std::vector<std::string> names_;
  std::vector<EmbeddingVector> prototypes_;
};

// Both throw EmptyBank, DimensionMismatch, NotNormalized. Ties go to the
// earlier class.
const std::string& classify_by_caption(std::span<const float> caption_embedding,
                                       const ClassPrototypeBank& bank);
const std::string& classify_by_image(std::span<const float> image_embedding,
                                     const ClassPrototypeBank& bank);

struct Prediction {
  std::string image_id;
  std::string predicted;
  std::string gold;
};

// 100 * correct / total. Throws EmptyInput.
double top1_accuracy(std::span<const Prediction> predictions);
// Unweighted mean of per-dataset accuracies. Throws EmptyInput.
double mean_accuracy(std::span<const double> accuracies);

// `class_name` substituted for every "{class}".
std::string render_class_template(std::string_view tmpl, std::string_view class_name);

// The default template family used when a dataset ships none.
std::span<const std::string_view> default_class_templates() noexcept;

struct ClassTemplates {
  std::string class_name;
  std::vector<std::string> prompts;
};

// JSON object {"class name": ["prompt", ...], ...}, kept in file order; an
// empty list selects the default family. Throws IoError, SchemaError,
// DuplicateId.
std::vector<ClassTemplates> load_class_templates(const std::filesystem::path& path);

// Embeds every prompt of every class through `encoder` and builds one
// prototype per class.
ClassPrototypeBank build_class_bank(std::span<const ClassTemplates> classes, Encoder& encoder);

// JSON lines {"image_id", "predicted", "gold"}.
void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions);

// JSON lines {"image_id", "gold"}. Throws DuplicateId, SchemaError, IoError.
std::vector<std::pair<std::string, std::string>> load_gold_labels(
    const std::filesystem::path& path);

}  // namespace clipdpo
