// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"
#include "clipdpo/hashing.hpp"

namespace clipdpo {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

ojson build_json(const RunConfig& c) {
  ojson j;
  j["paths"] = {{"manifest", c.paths.manifest},
                {"images", c.paths.images},
                {"captions", c.paths.captions},
                {"qa", c.paths.qa},
                {"image_store", c.paths.image_store},
                {"text_store", c.paths.text_store},
                {"question_rules", c.paths.question_rules},
                {"category_descriptions", c.paths.category_descriptions},
                {"output_dir", c.paths.output_dir}};
  j["curation"] = {{"caption_score_min", c.curation.caption_score_min},
                   {"question_score_min", c.curation.question_score_min},
                   {"caption_max_words", c.curation.caption_max_words},
                   {"text_cap_ratio", c.curation.text_cap_ratio ? ojson(*c.curation.text_cap_ratio)
                                                                : ojson(nullptr)}};
  j["pairs"] = {{"margin_min", c.pairs.margin_min},
                {"length_ratio_max", c.pairs.length_ratio_max},
                {"synthetic_score_min", c.pairs.synthetic_score_min},
                {"qa_prompt_template", c.pairs.qa_prompt_template},
                {"caption_prompt_template", c.pairs.caption_prompt_template}};
  j["loss"] = {{"variant", std::string(to_string(c.loss.variant))},
               {"beta", c.loss.beta},
               {"label_smoothing", c.loss.label_smoothing},
               {"slic_delta", c.loss.slic_delta},
               {"kto_lambda_pos", c.loss.kto_lambda_pos},
               {"kto_lambda_neg", c.loss.kto_lambda_neg}};
  j["encoder"] = {{"kind", std::string(to_string(c.encoder.kind))},
                  {"address", c.encoder.address},
                  {"model_tag", c.encoder.model_tag},
                  {"timeout_ms", c.encoder.timeout.count()},
                  {"expected_dim", c.encoder.expected_dim},
                  {"max_in_flight", c.encoder.max_in_flight}};
  j["seed"] = c.seed;
  j["shard_count"] = c.shard_count;
  j["worker_count"] = c.worker_count;
  return j;
}

std::string dotted(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Checks that `patch` only uses keys present in `schema` with compatible
// types, then writes it over `target`.
void merge_checked(ojson& target, const ojson& patch, const std::string& prefix) {
  if (!patch.is_object()) bad("'" + (prefix.empty() ? "<root>" : prefix) + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const auto name = dotted(prefix, key);
    auto it = target.find(key);
    if (it == target.end()) bad("unknown config key '" + name + "'");
    if (it->is_object()) {
      merge_checked(*it, value, name);
      continue;
    }
    const bool nullable = name == "curation.text_cap_ratio";
    const bool ok = (it->is_string() && value.is_string()) ||
                    (it->is_number() && value.is_number()) ||
                    (nullable && (value.is_null() || value.is_number()));
    if (!ok) bad("config key '" + name + "' has the wrong type");
    *it = value;
  }
}

template <typename T>
T get_uint(const ojson& v, const char* name) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    bad(std::string("config key '") + name + "' must be a non-negative integer");
  }
  const auto u = v.get<std::uint64_t>();
  if (u > std::numeric_limits<T>::max()) {
    bad(std::string("config key '") + name + "' is too large");
  }
  return static_cast<T>(u);
}

RunConfig from_json(const ojson& j) {
  RunConfig c;
  const auto& p = j["paths"];
  c.paths.manifest = p["manifest"].get<std::string>();
  c.paths.images = p["images"].get<std::string>();
  c.paths.captions = p["captions"].get<std::string>();
  c.paths.qa = p["qa"].get<std::string>();
  c.paths.image_store = p["image_store"].get<std::string>();
  c.paths.text_store = p["text_store"].get<std::string>();
  c.paths.question_rules = p["question_rules"].get<std::string>();
  c.paths.category_descriptions = p["category_descriptions"].get<std::string>();
  c.paths.output_dir = p["output_dir"].get<std::string>();

  const auto& cu = j["curation"];
  c.curation.caption_score_min = cu["caption_score_min"].get<double>();
  c.curation.question_score_min = cu["question_score_min"].get<double>();
  c.curation.caption_max_words = get_uint<std::size_t>(cu["caption_max_words"],
                                                       "curation.caption_max_words");
  if (cu["text_cap_ratio"].is_null()) {
    c.curation.text_cap_ratio.reset();
  } else {
    c.curation.text_cap_ratio = cu["text_cap_ratio"].get<double>();
  }

  const auto& pa = j["pairs"];
  c.pairs.margin_min = pa["margin_min"].get<double>();
  c.pairs.length_ratio_max = pa["length_ratio_max"].get<double>();
  c.pairs.synthetic_score_min = pa["synthetic_score_min"].get<double>();
  c.pairs.qa_prompt_template = pa["qa_prompt_template"].get<std::string>();
  c.pairs.caption_prompt_template = pa["caption_prompt_template"].get<std::string>();

  const auto& lo = j["loss"];
  const auto variant = lo["variant"].get<std::string>();
  auto v = parse_loss_variant(variant);
  if (!v) bad("unknown loss variant '" + variant + "'");
  c.loss.variant = *v;
  c.loss.beta = lo["beta"].get<double>();
  c.loss.label_smoothing = lo["label_smoothing"].get<double>();
  c.loss.slic_delta = lo["slic_delta"].get<double>();
  c.loss.kto_lambda_pos = lo["kto_lambda_pos"].get<double>();
  c.loss.kto_lambda_neg = lo["kto_lambda_neg"].get<double>();

  const auto& en = j["encoder"];
  const auto kind = en["kind"].get<std::string>();
  auto k = parse_encoder_kind(kind);
  if (!k) bad("unknown encoder kind '" + kind + "'");
  c.encoder.kind = *k;
  c.encoder.address = en["address"].get<std::string>();
  c.encoder.model_tag = en["model_tag"].get<std::string>();
  c.encoder.timeout = std::chrono::milliseconds(get_uint<std::uint32_t>(en["timeout_ms"],
                                                                        "encoder.timeout_ms"));
  c.encoder.expected_dim = get_uint<std::uint32_t>(en["expected_dim"], "encoder.expected_dim");
  c.encoder.max_in_flight = get_uint<unsigned>(en["max_in_flight"], "encoder.max_in_flight");

  c.seed = get_uint<std::uint64_t>(j["seed"], "seed");
  c.shard_count = get_uint<std::uint32_t>(j["shard_count"], "shard_count");
  c.worker_count = get_uint<std::uint32_t>(j["worker_count"], "worker_count");
  return c;
}

void collect_keys(const ojson& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const auto name = dotted(prefix, key);
    if (value.is_object()) {
      collect_keys(value, name, out);
    } else {
      out.push_back(name);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  curation.validate();
  pairs.validate();
  loss.validate();
  if (shard_count == 0) bad("shard_count must be >= 1");
  if (worker_count == 0) bad("worker_count must be >= 1");
  if (encoder.timeout.count() <= 0) bad("encoder.timeout_ms must be > 0");
  if (encoder.max_in_flight == 0) bad("encoder.max_in_flight must be >= 1");
  if (encoder.kind != EncoderKind::file_stub && encoder.address.empty()) {
    bad("encoder.address is required for " + std::string(to_string(encoder.kind)) + " encoders");
  }
}

EncoderEndpoint RunConfig::effective_encoder() const {
  EncoderEndpoint ep = encoder;
  if (ep.kind == EncoderKind::file_stub && ep.address.empty()) ep.address = paths.text_store;
  return ep;
}

CurationConfig RunConfig::effective_curation() const {
  CurationConfig c = curation;
  c.text_downsample_seed = seed;
  return c;
}

std::string to_json(const RunConfig& cfg, int indent) { return build_json(cfg).dump(indent); }

RunConfig merge_config_json(const RunConfig& base, std::string_view json_text) {
  ojson patch;
  try {
    patch = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  ojson merged = build_json(base);
  merge_checked(merged, patch, "");
  return from_json(merged);
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return merge_config_json(base, ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

void apply_override(RunConfig& cfg, std::string_view key, std::string_view value) {
  ojson j = build_json(cfg);
  // Walk to the leaf to learn its type.
  ojson* node = &j;
  std::string k(key);
  std::size_t start = 0;
  ojson patch;
  ojson* pnode = &patch;
  for (;;) {
    const auto dot = k.find('.', start);
    const auto part = k.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    auto it = node->find(part);
    if (part.empty() || it == node->end()) bad("unknown config key '" + k + "'");
    node = &*it;
    pnode = &(*pnode)[part];
    if (dot == std::string::npos) break;
    if (!node->is_object()) bad("unknown config key '" + k + "'");
    start = dot + 1;
  }
  if (node->is_object()) bad("config key '" + k + "' is a section, not a field");

  const std::string v(value);
  if (node->is_string()) {
    *pnode = v;
  } else if (k == "curation.text_cap_ratio" && (v == "null" || v.empty())) {
    *pnode = nullptr;
  } else {
    ojson parsed;
    try {
      parsed = ojson::parse(v);
    } catch (const nlohmann::json::parse_error&) {
      bad("config key '" + k + "' expects a number, got '" + v + "'");
    }
    if (!parsed.is_number()) bad("config key '" + k + "' expects a number, got '" + v + "'");
    *pnode = parsed;
  }
  merge_checked(j, patch, "");
  cfg = from_json(j);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  collect_keys(build_json(RunConfig{}), "", out);
  return out;
}

std::string result_config_json(const RunConfig& cfg) {
  ojson j = build_json(cfg);
  j.erase("worker_count");
  j["paths"].erase("output_dir");
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(result_config_json(cfg))));
  return buf;
}

}  // namespace clipdpo
