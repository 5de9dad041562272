// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Rank -> global filter -> pair stages over an in-memory corpus. Work is
// sharded by image_id hash and merged in a fixed order, so results do not
// depend on worker_count.

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clipdpo/curation.hpp"
#include "clipdpo/embedding.hpp"
#include "clipdpo/encoder.hpp"
#include "clipdpo/hashing.hpp"
#include "clipdpo/pairs.hpp"
#include "clipdpo/records.hpp"
#include "clipdpo/run_config.hpp"
#include "clipdpo/scoring_context.hpp"

namespace clipdpo {

struct StageCounts {
  std::string stage;
  std::size_t in = 0;
  std::size_t kept = 0;
  // Reason -> count, ordered by reason.
  std::map<std::string, std::size_t> dropped;

  std::size_t dropped_total() const noexcept;
  bool balanced() const noexcept { return in == kept + dropped_total(); }
};

struct CategoryStats {
  std::array<std::size_t, 4> counts{};
  double text_keep_ratio = 1.0;
};

struct RunSummary {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string config_json;
  std::vector<StageCounts> stages;
  std::optional<CategoryStats> categories;
  std::optional<std::size_t> caption_pairs;
  std::optional<std::size_t> qa_pairs;
};

// Throws InvariantViolation naming the first unbalanced stage.
void check_accounting(const RunSummary& s);
// Checks accounting, then renders one JSON object.
std::string to_json(const RunSummary& s, int indent = 2);
RunSummary make_summary(std::string command, const RunConfig& cfg);

// Runs fn(shard_index) for every shard on up to `workers` threads. If any
// call throws, the exception of the lowest failing shard is rethrown.
void for_each_shard(std::uint32_t shard_count, std::uint32_t workers,
                    const std::function<void(std::uint32_t)>& fn);

// Partitions `items` by shard_of(key(item)), preserving relative order.
template <typename T, typename Key>
std::vector<std::vector<std::size_t>> shard_indices(std::span<const T> items, Key key,
                                                    std::uint32_t shard_count) {
  std::vector<std::vector<std::size_t>> out(shard_count);
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[shard_of(key(items[i]), shard_count)].push_back(i);
  }
  return out;
}

struct Corpus {
  std::vector<ImageRecord> images;
  std::vector<CaptionRecord> captions;
  std::vector<QARecord> qas;
  std::vector<PreferencePair> pairs;
};

// {"text": [...], "people": [...], "objects": [...], "scenes": [...]}.
// Throws IoError, SchemaError.
std::array<std::vector<std::string>, 4> load_category_descriptions(
    const std::filesystem::path& path);
// One prototype per category from the encoded descriptions.
PrototypeSet build_prototype_set(const std::array<std::vector<std::string>, 4>& descriptions,
                                 Encoder& encoder);

// Scores and orders every caption. Output is grouped by image_id ascending,
// best caption first. Throws UnknownImageId, MissingEmbedding.
StageCounts rank_stage(Corpus& corpus, const ScoringContext& ctx, const RunConfig& cfg);

// Category assignment and text down-sampling, then the caption and question
// filters. Captions and questions of down-sampled images leave the corpus.
std::vector<StageCounts> filter_stage(Corpus& corpus, const PrototypeSet& protos,
                                      const ScoringContext& ctx, const RunConfig& cfg,
                                      CategoryStats* categories = nullptr);

// Caption pairs from kept captions, QA pairs from surviving questions.
// Synthetic captions are embedded with one batched encoder call per shard.
std::vector<StageCounts> pairs_stage(Corpus& corpus, const ScoringContext& ctx,
                                     const QuestionParser& parser, Encoder& text_encoder,
                                     const RunConfig& cfg);

// All three stages.
RunSummary run_pipeline(Corpus& corpus, const ScoringContext& ctx, const PrototypeSet& protos,
                        const QuestionParser& parser, Encoder& text_encoder,
                        const RunConfig& cfg);

}  // namespace clipdpo
