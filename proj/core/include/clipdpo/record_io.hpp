// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Newline-delimited JSON record files. One object per line, UTF-8, fields
// written in a fixed order so that re-emitting a loaded file reproduces it
// byte-for-byte. Blank lines are ignored; every error carries its 1-based
// line number.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clipdpo/records.hpp"

namespace clipdpo {

enum class RecordKind { image, caption, qa };

using RecordSet =
    std::variant<std::vector<ImageRecord>, std::vector<CaptionRecord>, std::vector<QARecord>>;

// Throws IoError or SchemaError(line).
RecordSet load_records(const std::filesystem::path& path, RecordKind kind);
std::vector<ImageRecord> load_image_records(const std::filesystem::path& path);
std::vector<CaptionRecord> load_caption_records(const std::filesystem::path& path);
// Also rejects more than kMaxQAPerImage records for one image.
std::vector<QARecord> load_qa_records(const std::filesystem::path& path);
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_image_records(const std::filesystem::path& path, std::span<const ImageRecord> records);
void write_caption_records(const std::filesystem::path& path,
                           std::span<const CaptionRecord> records);
void write_qa_records(const std::filesystem::path& path, std::span<const QARecord> records);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

std::string to_json_line(const ImageRecord& r);
std::string to_json_line(const CaptionRecord& r);
std::string to_json_line(const QARecord& r);
std::string to_json_line(const PreferencePair& p);

// Throws InvariantViolation naming the pair_id:
//  caption pairs need margin == chosen_score - rejected_score and
//  margin > margin_min; qa pairs need chosen != rejected.
void validate_pair(const PreferencePair& pair, double margin_min);

// Validates every pair, sorts by (image_id, pair_id) and writes one line per
// pair. Returns the count written. Throws InvariantViolation or IoError.
std::size_t emit_pairs(std::vector<PreferencePair> pairs, const std::filesystem::path& path,
                       double margin_min);

// Throws UnknownImageId for the first caption / QA record whose image_id is
// not among `images`.
void check_image_references(std::span<const CaptionRecord> captions,
                            std::span<const ImageRecord> images);
void check_image_references(std::span<const QARecord> qas, std::span<const ImageRecord> images);

}  // namespace clipdpo
