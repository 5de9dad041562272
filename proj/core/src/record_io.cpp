// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/record_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"
#include "jsonl.hpp"

namespace clipdpo {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;
using namespace jsonl;

std::optional<ClipScore> get_opt_score(const json& o, const char* key, std::size_t line) {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return std::nullopt;
  return ClipScore{get_number(o, key, line)};
}

json score_json(const std::optional<ClipScore>& s) {
  return s ? json(s->value) : json(nullptr);
}

template <typename T>
void write_records(const std::filesystem::path& path, std::span<const T> records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json_line(r));
  write_lines(path, lines);
}

ImageRecord parse_image(const json& o, std::size_t line) {
  ImageRecord r;
  r.image_id = get_nonempty_string(o, "image_id", line);
  r.dataset = get_string(o, "dataset", line);
  if (auto cat = get_opt_string(o, "category", line)) {
    r.category = parse_category(*cat);
    if (!r.category) schema_fail("unknown category '" + *cat + "'", line);
  }
  r.embedding_ref = get_opt_string(o, "embedding_ref", line).value_or(r.image_id);
  if (r.embedding_ref.empty()) schema_fail("field 'embedding_ref' must be non-empty", line);
  return r;
}

CaptionRecord parse_caption(const json& o, std::size_t line) {
  CaptionRecord r;
  r.caption_id = get_nonempty_string(o, "caption_id", line);
  r.image_id = get_nonempty_string(o, "image_id", line);
  r.generator_id = get_string(o, "generator_id", line);
  r.prompt_id = get_string(o, "prompt_id", line);
  r.text = get_string(o, "text", line);
  const std::size_t words = count_words(r.text);
  if (words == 0) schema_fail("caption text is empty", line);
  if (auto it = o.find("word_count"); it != o.end() && !it->is_null()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() != words) {
      schema_fail("word_count does not match whitespace token count " + std::to_string(words), line);
    }
  }
  r.word_count = words;
  r.score = get_opt_score(o, "score", line);
  auto status = get_opt_string(o, "status", line).value_or("raw");
  auto parsed = parse_caption_status(status);
  if (!parsed) schema_fail("unknown caption status '" + status + "'", line);
  r.status = *parsed;
  if (r.status != CaptionStatus::raw && !r.score) schema_fail("non-raw caption without score", line);
  return r;
}

QARecord parse_qa(const json& o, std::size_t line) {
  QARecord r;
  r.qa_id = get_nonempty_string(o, "qa_id", line);
  r.image_id = get_nonempty_string(o, "image_id", line);
  r.question = get_nonempty_string(o, "question", line);
  r.positive = get_nonempty_string(o, "positive", line);
  r.negative = get_nonempty_string(o, "negative", line);
  if (r.positive == r.negative) schema_fail("positive and negative answers are identical", line);
  r.question_score = get_opt_score(o, "question_score", line);
  r.synthetic_caption = get_opt_string(o, "synthetic_caption", line);
  r.synthetic_score = get_opt_score(o, "synthetic_score", line);
  auto status = get_opt_string(o, "status", line).value_or("raw");
  auto parsed = parse_qa_status(status);
  if (!parsed) schema_fail("unknown qa status '" + status + "'", line);
  r.status = *parsed;
  return r;
}

PreferencePair parse_pair(const json& o, std::size_t line) {
  PreferencePair p;
  p.pair_id = get_nonempty_string(o, "pair_id", line);
  p.image_id = get_nonempty_string(o, "image_id", line);
  p.prompt = get_string(o, "prompt", line);
  p.chosen = get_string(o, "chosen", line);
  p.rejected = get_string(o, "rejected", line);
  p.chosen_score = ClipScore{get_number(o, "chosen_score", line)};
  p.rejected_score = ClipScore{get_number(o, "rejected_score", line)};
  p.margin = get_number(o, "margin", line);
  auto src = get_string(o, "source", line);
  auto parsed = parse_pair_source(src);
  if (!parsed) schema_fail("unknown pair source '" + src + "'", line);
  p.source = *parsed;
  return p;
}

template <typename T, typename Parse>
std::vector<T> load_all(const std::filesystem::path& path, Parse parse) {
  std::vector<T> out;
  for_each_line(path, [&](const json& o, std::size_t line) { out.push_back(parse(o, line)); });
  return out;
}

}  // namespace

std::vector<ImageRecord> load_image_records(const std::filesystem::path& path) {
  std::vector<ImageRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](const json& o, std::size_t line) {
    auto r = parse_image(o, line);
    if (!seen.insert(r.image_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate image_id", r.image_id, line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<CaptionRecord> load_caption_records(const std::filesystem::path& path) {
  std::vector<CaptionRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](const json& o, std::size_t line) {
    auto r = parse_caption(o, line);
    if (!seen.insert(r.caption_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate caption_id", r.caption_id, line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<QARecord> load_qa_records(const std::filesystem::path& path) {
  std::vector<QARecord> out;
  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, std::size_t> per_image;
  for_each_line(path, [&](const json& o, std::size_t line) {
    auto r = parse_qa(o, line);
    if (!seen.insert(r.qa_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate qa_id", r.qa_id, line);
    }
    if (++per_image[r.image_id] > kMaxQAPerImage) {
      throw Error(ErrorCode::SchemaError,
                  "more than " + std::to_string(kMaxQAPerImage) + " QA records for image " +
                      r.image_id,
                  r.qa_id, line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path& path) {
  return load_all<PreferencePair>(path, parse_pair);
}

RecordSet load_records(const std::filesystem::path& path, RecordKind kind) {
  switch (kind) {
    case RecordKind::image: return load_image_records(path);
    case RecordKind::caption: return load_caption_records(path);
    case RecordKind::qa: return load_qa_records(path);
  }
  throw Error(ErrorCode::SchemaError, "unknown record kind");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](const json& o, std::size_t line) {
    DatasetEntry e;
    e.dataset_name = get_nonempty_string(o, "dataset_name", line);
    auto it = o.find("image_count");
    if (it == o.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
      schema_fail("image_count must be a non-negative integer", line);
    }
    e.image_count = it->get<std::uint64_t>();
    e.uri_prefix = get_string(o, "uri_prefix", line);
    if (!seen.insert(e.dataset_name).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate dataset_name", e.dataset_name, line);
    }
    m.entries.push_back(std::move(e));
  });
  return m;
}

std::string to_json_line(const ImageRecord& r) {
  ojson o;
  o["image_id"] = r.image_id;
  o["dataset"] = r.dataset;
  o["category"] = r.category ? ojson(std::string(to_string(*r.category))) : ojson(nullptr);
  o["embedding_ref"] = r.embedding_ref;
  return o.dump();
}

std::string to_json_line(const CaptionRecord& r) {
  ojson o;
  o["caption_id"] = r.caption_id;
  o["image_id"] = r.image_id;
  o["generator_id"] = r.generator_id;
  o["prompt_id"] = r.prompt_id;
  o["text"] = r.text;
  o["word_count"] = r.word_count;
  o["score"] = score_json(r.score);
  o["status"] = std::string(to_string(r.status));
  return o.dump();
}

std::string to_json_line(const QARecord& r) {
  ojson o;
  o["qa_id"] = r.qa_id;
  o["image_id"] = r.image_id;
  o["question"] = r.question;
  o["positive"] = r.positive;
  o["negative"] = r.negative;
  o["question_score"] = score_json(r.question_score);
  o["synthetic_caption"] = r.synthetic_caption ? ojson(*r.synthetic_caption) : ojson(nullptr);
  o["synthetic_score"] = score_json(r.synthetic_score);
  o["status"] = std::string(to_string(r.status));
  return o.dump();
}

std::string to_json_line(const PreferencePair& p) {
  ojson o;
  o["pair_id"] = p.pair_id;
  o["image_id"] = p.image_id;
  o["prompt"] = p.prompt;
  o["chosen"] = p.chosen;
  o["rejected"] = p.rejected;
  o["chosen_score"] = p.chosen_score.value;
  o["rejected_score"] = p.rejected_score.value;
  o["margin"] = p.margin;
  o["source"] = std::string(to_string(p.source));
  return o.dump();
}

void write_image_records(const std::filesystem::path& path, std::span<const ImageRecord> records) {
  write_records(path, records);
}
void write_caption_records(const std::filesystem::path& path,
                           std::span<const CaptionRecord> records) {
  write_records(path, records);
}
void write_qa_records(const std::filesystem::path& path, std::span<const QARecord> records) {
  write_records(path, records);
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::vector<std::string> lines;
  for (const auto& e : manifest.entries) {
    ojson o;
    o["dataset_name"] = e.dataset_name;
    o["image_count"] = e.image_count;
    o["uri_prefix"] = e.uri_prefix;
    lines.push_back(o.dump());
  }
  write_lines(path, lines);
}

void validate_pair(const PreferencePair& pair, double margin_min) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvariantViolation, why, pair.pair_id);
  };
  if (pair.pair_id.empty() || pair.image_id.empty()) fail("pair_id and image_id are required");
  if (!std::isfinite(pair.chosen_score.value) || !std::isfinite(pair.rejected_score.value) ||
      !std::isfinite(pair.margin)) {
    fail("scores must be finite");
  }
  if (pair.chosen == pair.rejected) fail("chosen and rejected texts are identical");
  if (pair.source == PairSource::caption) {
    if (pair.margin != pair.chosen_score.value - pair.rejected_score.value) {
      fail("margin must equal chosen_score - rejected_score");
    }
    if (!(pair.margin > margin_min)) {
      fail("caption pair margin " + std::to_string(pair.margin) + " does not exceed " +
           std::to_string(margin_min));
    }
  } else if (pair.margin != 0.0 || pair.rejected_score.value != 0.0) {
    fail("qa pairs carry margin 0 and rejected_score 0");
  }
}

std::size_t emit_pairs(std::vector<PreferencePair> pairs, const std::filesystem::path& path,
                       double margin_min) {
  for (const auto& p : pairs) validate_pair(p, margin_min);
  std::sort(pairs.begin(), pairs.end(), [](const PreferencePair& a, const PreferencePair& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.pair_id < b.pair_id;
  });
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].pair_id == pairs[i - 1].pair_id && pairs[i].image_id == pairs[i - 1].image_id) {
      throw Error(ErrorCode::InvariantViolation, "duplicate pair_id", pairs[i].pair_id);
    }
  }
  std::vector<std::string> lines;
  lines.reserve(pairs.size());
  for (const auto& p : pairs) lines.push_back(to_json_line(p));
  write_lines(path, lines);
  return lines.size();
}

namespace {

template <typename Rec>
void check_refs(std::span<const Rec> recs, std::span<const ImageRecord> images,
                const std::string Rec::*id_field) {
  std::unordered_set<std::string_view> known;
  known.reserve(images.size());
  for (const auto& im : images) known.insert(im.image_id);
  for (const auto& r : recs) {
    if (!known.contains(r.image_id)) {
      throw Error(ErrorCode::UnknownImageId, "references unknown image '" + r.image_id + "'",
                  r.*id_field);
    }
  }
}

}  // namespace

void check_image_references(std::span<const CaptionRecord> captions,
                            std::span<const ImageRecord> images) {
  check_refs(captions, images, &CaptionRecord::caption_id);
}

void check_image_references(std::span<const QARecord> qas, std::span<const ImageRecord> images) {
  check_refs(qas, images, &QARecord::qa_id);
}

}  // namespace clipdpo
