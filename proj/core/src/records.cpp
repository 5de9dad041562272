// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/records.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "clipdpo/error.hpp"

namespace clipdpo {

std::uint64_t DatasetManifest::total_images() const noexcept {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.image_count;
  return total;
}

namespace {

constexpr std::array<std::pair<CaptionStatus, std::string_view>, 5> kCaptionStatusNames{{
    {CaptionStatus::raw, "raw"},
    {CaptionStatus::scored, "scored"},
    {CaptionStatus::dropped_score, "dropped_score"},
    {CaptionStatus::dropped_length, "dropped_length"},
    {CaptionStatus::kept, "kept"},
}};

constexpr std::array<std::pair<QAStatus, std::string_view>, 5> kQAStatusNames{{
    {QAStatus::raw, "raw"},
    {QAStatus::scored, "scored"},
    {QAStatus::dropped_question, "dropped_question"},
    {QAStatus::dropped_answer, "dropped_answer"},
    {QAStatus::kept, "kept"},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

int stage_of(CaptionStatus s) {
  switch (s) {
    case CaptionStatus::raw: return 0;
    case CaptionStatus::scored: return 1;
    default: return 2;
  }
}

int stage_of(QAStatus s) {
  switch (s) {
    case QAStatus::raw: return 0;
    case QAStatus::scored: return 1;
    default: return 2;
  }
}

template <typename Status>
void advance_impl(Status& current, Status next) {
  if (current == next) return;
  if (stage_of(next) <= stage_of(current)) {
    throw Error(ErrorCode::InvalidTransition, "status cannot move from " +
                                                  std::string(to_string(current)) + " to " +
                                                  std::string(to_string(next)));
  }
  current = next;
}

}  // namespace

std::string_view to_string(CaptionStatus s) noexcept { return name_of(kCaptionStatusNames, s); }
std::string_view to_string(QAStatus s) noexcept { return name_of(kQAStatusNames, s); }

std::optional<CaptionStatus> parse_caption_status(std::string_view s) noexcept {
  return lookup(kCaptionStatusNames, s);
}
std::optional<QAStatus> parse_qa_status(std::string_view s) noexcept {
  return lookup(kQAStatusNames, s);
}

bool is_terminal(CaptionStatus s) noexcept { return stage_of(s) == 2; }
bool is_terminal(QAStatus s) noexcept { return stage_of(s) == 2; }

void advance(CaptionStatus& current, CaptionStatus next) { advance_impl(current, next); }
void advance(QAStatus& current, QAStatus next) { advance_impl(current, next); }

std::string_view to_string(PairSource s) noexcept {
  return s == PairSource::caption ? "caption" : "qa";
}

std::optional<PairSource> parse_pair_source(std::string_view s) noexcept {
  if (s == "caption") return PairSource::caption;
  if (s == "qa") return PairSource::qa;
  return std::nullopt;
}

std::size_t count_words(std::string_view text) noexcept {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

CaptionRecord make_caption(std::string caption_id, std::string image_id,
                           std::string generator_id, std::string prompt_id, std::string text) {
  CaptionRecord c;
  c.caption_id = std::move(caption_id);
  c.image_id = std::move(image_id);
  c.generator_id = std::move(generator_id);
  c.prompt_id = std::move(prompt_id);
  c.word_count = count_words(text);
  c.text = std::move(text);
  return c;
}

}  // namespace clipdpo
