// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// AMBER hallucination metrics over pre-extracted object sets and yes/no
// answers. All reported metrics are percentages in [0, 100].

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace clipdpo {

struct AmberAnnotation {
  std::string image_id;
  std::set<std::string> truth_objects;
  std::set<std::string> hallu_targets;
};

struct GenerativeResponse {
  std::string image_id;
  std::set<std::string> mentioned_objects;
};

struct DiscriminativeResponse {
  std::string question_id;
  bool predicted_yes = false;
  bool gold_yes = false;
};

struct GenerativeMetrics {
  double chair = 0.0;
  double cover = 0.0;
  double hal = 0.0;
  double cog = 0.0;
  std::size_t responses = 0;
};

struct DiscriminativeMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t responses = 0;
};

// Per-response terms, as fractions.
double response_chair(const std::set<std::string>& mentioned, const std::set<std::string>& truth);
double response_cover(const std::set<std::string>& mentioned, const std::set<std::string>& truth);
double response_cog(const std::set<std::string>& mentioned, const std::set<std::string>& hallu);
// The predicate counted by Hal.
bool is_hallucinated(double chair_fraction) noexcept;

// Throws MissingAnnotation, DuplicateId (annotations), EmptyInput.
GenerativeMetrics generative_metrics(std::span<const GenerativeResponse> responses,
                                     std::span<const AmberAnnotation> annotations);

// "yes" is the positive class. Throws EmptyInput.
DiscriminativeMetrics discriminative_metrics(std::span<const DiscriminativeResponse> responses);

// 2PR/(P+R), 0 when P+R is 0. Works in any common unit.
double f1_score(double precision, double recall) noexcept;

// ((100 - CHAIR) + F1) / 2 without rounding. Throws OutOfRange.
double amber_score_exact(double chair, double f1);
// amber_score_exact reported to one decimal, half-up.
double amber_score(double chair, double f1);
// One-decimal half-up rounding used by all reports.
double round1(double x) noexcept;

// Annotations: {"image_id", "truth_objects": [...], "hallu_targets": [...]}; the
// two sets must be disjoint. Generative responses: {"image_id",
// "mentioned_objects": [...]}. Discriminative: {"question_id", "predicted",
// "gold"} with "yes"/"no". Throws IoError, SchemaError, DuplicateId.
std::vector<AmberAnnotation> load_amber_annotations(const std::filesystem::path& path);
std::vector<GenerativeResponse> load_generative_responses(const std::filesystem::path& path);
std::vector<DiscriminativeResponse> load_discriminative_responses(const std::filesystem::path& path);

struct AmberReport {
  std::string label;
  std::optional<GenerativeMetrics> generative;
  std::optional<DiscriminativeMetrics> discriminative;
};

// Structured JSON summary (exact values plus rounded ones).
std::string to_json(const AmberReport& report);
// Tab-separated "label CHAIR Cover Hal Cog Acc P R F1 AMBER" with one decimal;
// absent sections print "-".
std::string table_header();
std::string to_table_row(const AmberReport& report);

}  // namespace clipdpo
