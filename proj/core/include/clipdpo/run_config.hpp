// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration. Precedence is defaults < config file < dotted overrides
// ("curation.caption_score_min=27.5"), and the dotted names are exactly the
// JSON field paths.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clipdpo/curation.hpp"
#include "clipdpo/encoder.hpp"
#include "clipdpo/losses.hpp"
#include "clipdpo/pairs.hpp"

namespace clipdpo {

struct RunPaths {
  std::string manifest;
  std::string images;
  std::string captions;
  std::string qa;
  std::string image_store;
  // Keyed by caption_id, qa_id, and exact text for category descriptions.
  std::string text_store;
  std::string question_rules;
  std::string category_descriptions;
  std::string output_dir;
};

struct RunConfig {
  RunPaths paths;
  CurationConfig curation;
  PairConfig pairs;
  LossConfig loss;
  // Text encoder for synthetic captions and category descriptions. An empty
  // address on a file_stub endpoint means paths.text_store.
  EncoderEndpoint encoder;
  // Also the text down-sampling seed.
  std::uint64_t seed = 0;
  std::uint32_t shard_count = 16;
  std::uint32_t worker_count = 1;

  // Throws InvalidConfig.
  void validate() const;
  // Endpoint with the file_stub default applied.
  EncoderEndpoint effective_encoder() const;
  // curation with the run seed applied.
  CurationConfig effective_curation() const;
};

// Full JSON with every field, in a fixed order.
std::string to_json(const RunConfig& cfg, int indent = -1);

// Fields absent from `json_text` keep their values in `base`. Unknown keys
// and wrongly typed values throw InvalidConfig.
RunConfig merge_config_json(const RunConfig& base, std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});

// `key` is a dotted path such as "pairs.margin_min"; `value` is parsed as the
// field's type (null clears optional numbers). Throws InvalidConfig.
void apply_override(RunConfig& cfg, std::string_view key, std::string_view value);

// Every dotted key apply_override accepts, in JSON order.
std::vector<std::string> config_keys();

// JSON echoed into run summaries: the full config minus worker_count and
// output_dir, neither of which affects results.
std::string result_config_json(const RunConfig& cfg);
// fnv1a64 of result_config_json, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace clipdpo
