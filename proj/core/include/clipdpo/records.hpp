// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clipdpo/embedding.hpp"

namespace clipdpo {

struct DatasetEntry {
  std::string dataset_name;
  std::uint64_t image_count = 0;
  std::string uri_prefix;

  bool operator==(const DatasetEntry&) const = default;
};

struct DatasetManifest {
  std::vector<DatasetEntry> entries;

  std::uint64_t total_images() const noexcept;
};

struct ImageRecord {
  std::string image_id;
  std::string dataset;
  std::optional<Category> category;
  // Key of this image's row in the image embedding store.
  std::string embedding_ref;

  bool operator==(const ImageRecord&) const = default;
};

// Captions and QA records move strictly forward: raw -> scored -> terminal.
enum class CaptionStatus { raw, scored, dropped_score, dropped_length, kept };
enum class QAStatus { raw, scored, dropped_question, dropped_answer, kept };

std::string_view to_string(CaptionStatus s) noexcept;
std::string_view to_string(QAStatus s) noexcept;
std::optional<CaptionStatus> parse_caption_status(std::string_view s) noexcept;
std::optional<QAStatus> parse_qa_status(std::string_view s) noexcept;

bool is_terminal(CaptionStatus s) noexcept;
bool is_terminal(QAStatus s) noexcept;
// Re-asserting the current status is allowed; moving backward or sideways
// between terminal states throws InvalidTransition.
void advance(CaptionStatus& current, CaptionStatus next);
void advance(QAStatus& current, QAStatus next);

struct CaptionRecord {
  std::string caption_id;
  std::string image_id;
  std::string generator_id;
  std::string prompt_id;
  std::string text;
  std::size_t word_count = 0;
  std::optional<ClipScore> score;
  CaptionStatus status = CaptionStatus::raw;

  bool operator==(const CaptionRecord&) const = default;
};

struct QARecord {
  std::string qa_id;
  std::string image_id;
  std::string question;
  std::string positive;
  std::string negative;
  std::optional<ClipScore> question_score;
  std::optional<std::string> synthetic_caption;
  std::optional<ClipScore> synthetic_score;
  QAStatus status = QAStatus::raw;

  bool operator==(const QARecord&) const = default;
};

inline constexpr std::size_t kMaxQAPerImage = 2;

enum class PairSource { caption, qa };
std::string_view to_string(PairSource s) noexcept;
std::optional<PairSource> parse_pair_source(std::string_view s) noexcept;

struct PreferencePair {
  std::string pair_id;
  std::string image_id;
  std::string prompt;
  std::string chosen;
  std::string rejected;
  ClipScore chosen_score;
  ClipScore rejected_score;
  double margin = 0.0;
  PairSource source = PairSource::caption;

  bool operator==(const PreferencePair&) const = default;
};

// Number of whitespace-separated tokens.
std::size_t count_words(std::string_view text) noexcept;

CaptionRecord make_caption(std::string caption_id, std::string image_id,
                           std::string generator_id, std::string prompt_id, std::string text);

}  // namespace clipdpo
