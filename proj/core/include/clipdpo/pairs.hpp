// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Pair filtering: one caption preference pair per image chosen by CLIP-score
// margin under a length-similarity gate, and QA pairs gated by the score of a
// synthetic caption built from the question and its positive answer.

#pragma once

#include <filesystem>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clipdpo/encoder.hpp"
#include "clipdpo/records.hpp"

namespace clipdpo {

struct PairConfig {
  double margin_min = 2.0;
  // max(word_count) / min(word_count) must not exceed this.
  double length_ratio_max = 1.5;
  double synthetic_score_min = 28.0;
  // "{question}" is replaced by the question text.
  std::string qa_prompt_template = "{question}";
  std::string caption_prompt_template = "Describe this image in detail.";

  // Throws InvalidConfig.
  void validate() const;
};

// True when the two word counts satisfy the length-similarity bound.
bool lengths_similar(std::size_t a_words, std::size_t b_words, double ratio_max) noexcept;

// Among all ordered pairs (hi, lo) with score(hi) - score(lo) > margin_min and
// similar lengths, returns the one with the largest margin; ties go to the
// smallest (chosen caption_id, rejected caption_id). nullopt when no pair
// qualifies. Captions must all be scored and belong to one image.
std::optional<PreferencePair> build_caption_pairs(std::span<const CaptionRecord> ranked,
                                                  const PairConfig& cfg);

struct QuestionRule {
  std::string pattern;
  // ECMAScript format string: $1, $2 ... refer to capture groups.
  std::string replacement;
  bool icase = false;
};

// Ordered regex rules turning a question into an image description. The
// first rule whose pattern matches the whole question wins.
class QuestionParser {
 public:
  // Throws InvalidPattern naming the offending rule.
  explicit QuestionParser(std::vector<QuestionRule> rules);

  // JSON lines: {"pattern": ..., "template": ..., "icase": bool?}.
  static QuestionParser from_file(const std::filesystem::path& path);

  std::optional<std::string> parse(std::string_view question) const;
  std::size_t size() const noexcept { return rules_.size(); }

 private:
  struct Compiled {
    QuestionRule rule;
    std::regex re;
  };
  std::vector<Compiled> rules_;
};

std::string synthetic_caption_text(std::string_view description, std::string_view positive);

// Parses the question and stores the synthetic caption on the record, or
// marks it dropped_answer when no rule matches. Returns the caption text.
// Throws InvalidTransition unless the record is scored.
std::optional<std::string> prepare_synthetic_caption(QARecord& qa, const QuestionParser& parser);

struct QAPairResult {
  QARecord record;
  std::optional<PreferencePair> pair;
};

// Applies the synthetic-score gate to a record carrying a synthetic caption:
// below synthetic_score_min -> dropped_answer, else kept with a pair whose
// chosen_score is the synthetic score and whose margin / rejected_score are 0.
QAPairResult gate_qa_pair(QARecord qa, ClipScore synthetic_score, const PairConfig& cfg);

// prepare_synthetic_caption + encoder lookup + gate_qa_pair for one record.
// Throws MissingEmbedding when the encoder cannot embed the caption.
QAPairResult build_qa_pair(QARecord qa, const QuestionParser& parser,
                           std::span<const float> image_embedding, Encoder& encoder,
                           const PairConfig& cfg);

std::string caption_pair_id(std::string_view image_id);
std::string qa_pair_id(std::string_view qa_id);

}  // namespace clipdpo
