// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/probe.hpp"

#include <unordered_set>

#include "clipdpo/embedding.hpp"
#include "clipdpo/error.hpp"
#include "jsonl.hpp"

namespace clipdpo {

std::string_view to_string(HallucinationType t) noexcept {
  switch (t) {
    case HallucinationType::existence: return "existence";
    case HallucinationType::attribute: return "attribute";
    case HallucinationType::relationship: return "relationship";
  }
  return "existence";
}

std::optional<HallucinationType> parse_hallucination_type(std::string_view s) noexcept {
  for (auto t : kHallucinationTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

bool is_inverted(const ProbeRecord& r, HallucinationType t) noexcept {
  const auto& h = r.hallucinated[static_cast<std::size_t>(t)];
  return h && h->model_loglik > r.original.model_loglik;
}

TypeCounts likelihood_inversions(std::span<const ProbeRecord> records) {
  TypeCounts counts{};
  for (const auto& r : records) {
    for (auto t : kHallucinationTypes) {
      if (is_inverted(r, t)) ++counts[static_cast<std::size_t>(t)];
    }
  }
  return counts;
}

TypeRates clip_correction_rate(std::span<const ProbeRecord> records, const EmbeddingStore& images,
                               const EmbeddingStore& texts) {
  TypeCounts wins{};
  TypeCounts totals{};
  for (const auto& r : records) {
    std::optional<std::span<const float>> image;
    std::optional<double> original;
    for (auto t : kHallucinationTypes) {
      if (!is_inverted(r, t)) continue;
      if (!image) {
        image = images.row(r.image_id);
        original = clip_score(*image, texts.row(r.original.embedding_ref)).value;
      }
      const auto& h = *r.hallucinated[static_cast<std::size_t>(t)];
      const double hs = clip_score(*image, texts.row(h.embedding_ref)).value;
      const auto i = static_cast<std::size_t>(t);
      ++totals[i];
      if (*original > hs) ++wins[i];
    }
  }
  TypeRates rates;
  for (std::size_t i = 0; i < 3; ++i) {
    if (totals[i] > 0) {
      rates[i] = 100.0 * static_cast<double>(wins[i]) / static_cast<double>(totals[i]);
    }
  }
  return rates;
}

namespace {

using jsonl::json;

ProbeCaption parse_caption(const json& o, std::size_t line) {
  ProbeCaption c;
  c.text = jsonl::get_string(o, "text", line);
  c.model_loglik = jsonl::get_number(o, "model_loglik", line);
  c.embedding_ref = jsonl::get_nonempty_string(o, "embedding_ref", line);
  return c;
}

}  // namespace

std::vector<ProbeRecord> load_probe_records(const std::filesystem::path& path) {
  std::vector<ProbeRecord> out;
  std::unordered_set<std::string> seen;
  jsonl::for_each_line(path, [&](const json& o, std::size_t line) {
    ProbeRecord r;
    r.image_id = jsonl::get_nonempty_string(o, "image_id", line);
    auto orig = o.find("original");
    if (orig == o.end() || !orig->is_object()) {
      jsonl::schema_fail("field 'original' must be an object", line);
    }
    r.original = parse_caption(*orig, line);
    auto hal = o.find("hallucinated");
    if (hal == o.end() || !hal->is_array()) {
      jsonl::schema_fail("field 'hallucinated' must be an array", line);
    }
    for (const auto& h : *hal) {
      if (!h.is_object()) jsonl::schema_fail("hallucinated entries must be objects", line);
      const auto type_name = jsonl::get_string(h, "type", line);
      auto type = parse_hallucination_type(type_name);
      if (!type) jsonl::schema_fail("unknown hallucination type '" + type_name + "'", line);
      auto& slot = r.hallucinated[static_cast<std::size_t>(*type)];
      if (slot) jsonl::schema_fail("more than one '" + type_name + "' caption", line);
      slot = parse_caption(h, line);
    }
    if (!seen.insert(r.image_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate probe record", r.image_id, line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace clipdpo
