// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"
#include "clipdpo/record_io.hpp"

namespace clipdpo {

std::size_t StageCounts::dropped_total() const noexcept {
  std::size_t n = 0;
  for (const auto& [reason, count] : dropped) n += count;
  return n;
}

void check_accounting(const RunSummary& s) {
  for (const auto& st : s.stages) {
    if (!st.balanced()) {
      throw Error(ErrorCode::InvariantViolation,
                  "stage '" + st.stage + "': in " + std::to_string(st.in) + " != kept " +
                      std::to_string(st.kept) + " + dropped " + std::to_string(st.dropped_total()));
    }
  }
}

std::string to_json(const RunSummary& s, int indent) {
  check_accounting(s);
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["command"] = s.command;
  j["seed"] = s.seed;
  j["config_hash"] = s.config_hash;
  j["config"] = s.config_json.empty() ? ojson(nullptr) : ojson::parse(s.config_json);
  ojson stages = ojson::array();
  for (const auto& st : s.stages) {
    ojson o;
    o["stage"] = st.stage;
    o["in"] = st.in;
    o["kept"] = st.kept;
    ojson dropped = ojson::object();
    for (const auto& [reason, count] : st.dropped) dropped[reason] = count;
    o["dropped"] = dropped;
    o["balanced"] = st.balanced();
    stages.push_back(std::move(o));
  }
  j["stages"] = stages;
  if (s.categories) {
    ojson c;
    for (auto cat : kCategories) {
      c[std::string(to_string(cat))] = s.categories->counts[static_cast<std::size_t>(cat)];
    }
    c["text_keep_ratio"] = s.categories->text_keep_ratio;
    j["categories"] = c;
  }
  if (s.caption_pairs || s.qa_pairs) {
    const std::size_t cp = s.caption_pairs.value_or(0);
    const std::size_t qp = s.qa_pairs.value_or(0);
    j["pairs"] = {{"caption", cp}, {"qa", qp}, {"total", cp + qp}};
  }
  return j.dump(indent);
}

RunSummary make_summary(std::string command, const RunConfig& cfg) {
  RunSummary s;
  s.command = std::move(command);
  s.seed = cfg.seed;
  s.config_hash = config_hash(cfg);
  s.config_json = result_config_json(cfg);
  return s;
}

void for_each_shard(std::uint32_t shard_count, std::uint32_t workers,
                    const std::function<void(std::uint32_t)>& fn) {
  workers = std::max<std::uint32_t>(1, std::min(workers, shard_count));
  std::vector<std::exception_ptr> errors(shard_count);
  if (workers == 1) {
    for (std::uint32_t s = 0; s < shard_count; ++s) {
      try {
        fn(s);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::uint32_t> next{0};
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::uint32_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::uint32_t s = next++; s < shard_count; s = next++) {
            try {
              fn(s);
            } catch (...) {
              errors[s] = std::current_exception();
            }
          }
        });
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::array<std::vector<std::string>, 4> load_category_descriptions(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed description file: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "description file must be an object");
  std::array<std::vector<std::string>, 4> out;
  for (const auto& [key, value] : j.items()) {
    auto cat = parse_category(key);
    if (!cat) throw Error(ErrorCode::SchemaError, "unknown category '" + key + "'");
    if (!value.is_array() || value.empty()) {
      throw Error(ErrorCode::SchemaError, "category '" + key + "' needs a non-empty list");
    }
    for (const auto& d : value) {
      if (!d.is_string() || d.get<std::string>().empty()) {
        throw Error(ErrorCode::SchemaError, "descriptions must be non-empty strings", key);
      }
      out[static_cast<std::size_t>(*cat)].push_back(d.get<std::string>());
    }
  }
  for (auto cat : kCategories) {
    if (out[static_cast<std::size_t>(cat)].empty()) {
      throw Error(ErrorCode::SchemaError,
                  "category '" + std::string(to_string(cat)) + "' has no descriptions");
    }
  }
  return out;
}

PrototypeSet build_prototype_set(const std::array<std::vector<std::string>, 4>& descriptions,
                                 Encoder& encoder) {
  std::vector<EmbeddingVector> protos;
  for (const auto& list : descriptions) protos.push_back(build_prototype(encoder.embed_texts(list)));
  return PrototypeSet(std::move(protos[0]), std::move(protos[1]), std::move(protos[2]),
                      std::move(protos[3]));
}

namespace {

// Indices of `items` grouped by image_id, groups in ascending image_id order
// and members in input order.
template <typename T>
std::vector<std::pair<std::string_view, std::vector<std::size_t>>> group_by_image(
    std::span<const T> items) {
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].image_id < items[b].image_id;
  });
  std::vector<std::pair<std::string_view, std::vector<std::size_t>>> groups;
  for (std::size_t i : order) {
    if (groups.empty() || groups.back().first != items[i].image_id) {
      groups.emplace_back(items[i].image_id, std::vector<std::size_t>{});
    }
    groups.back().second.push_back(i);
  }
  return groups;
}

template <typename Group>
std::vector<std::vector<std::size_t>> shard_groups(const std::vector<Group>& groups,
                                                   std::uint32_t shard_count) {
  std::vector<std::vector<std::size_t>> out(shard_count);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out[shard_of(groups[g].first, shard_count)].push_back(g);
  }
  return out;
}

StageCounts count_caption_statuses(std::string stage, std::span<const CaptionRecord> captions,
                                   std::size_t downsampled) {
  StageCounts st;
  st.stage = std::move(stage);
  st.in = captions.size() + downsampled;
  st.dropped["image_downsampled"] = downsampled;
  st.dropped["dropped_score"] = 0;
  st.dropped["dropped_length"] = 0;
  for (const auto& c : captions) {
    if (c.status == CaptionStatus::kept) {
      ++st.kept;
    } else {
      ++st.dropped[std::string(to_string(c.status))];
    }
  }
  return st;
}

}  // namespace

StageCounts rank_stage(Corpus& corpus, const ScoringContext& ctx, const RunConfig& cfg) {
  check_image_references(std::span<const CaptionRecord>(corpus.captions), corpus.images);
  std::unordered_map<std::string_view, const ImageRecord*> images;
  for (const auto& im : corpus.images) images.emplace(im.image_id, &im);

  const std::span<const CaptionRecord> captions(corpus.captions);
  const auto groups = group_by_image(captions);
  const auto shards = shard_groups(groups, cfg.shard_count);
  std::vector<std::vector<CaptionRecord>> ranked(groups.size());
  for_each_shard(cfg.shard_count, cfg.worker_count, [&](std::uint32_t s) {
    for (std::size_t g : shards[s]) {
      std::vector<CaptionRecord> members;
      members.reserve(groups[g].second.size());
      for (std::size_t i : groups[g].second) members.push_back(captions[i]);
      ranked[g] = rank_captions(*images.at(groups[g].first), std::move(members), ctx);
    }
  });

  std::vector<CaptionRecord> out;
  out.reserve(corpus.captions.size());
  for (auto& r : ranked) {
    for (auto& c : r) out.push_back(std::move(c));
  }
  corpus.captions = std::move(out);

  StageCounts st;
  st.stage = "rank";
  st.in = st.kept = corpus.captions.size();
  return st;
}

std::vector<StageCounts> filter_stage(Corpus& corpus, const PrototypeSet& protos,
                                      const ScoringContext& ctx, const RunConfig& cfg,
                                      CategoryStats* categories) {
  check_image_references(std::span<const CaptionRecord>(corpus.captions), corpus.images);
  check_image_references(std::span<const QARecord>(corpus.qas), corpus.images);
  const CurationConfig ccfg = cfg.effective_curation();
  std::vector<StageCounts> stages;

  const std::size_t images_in = corpus.images.size();
  auto ds = categorize_and_downsample(std::move(corpus.images), protos, ccfg, ctx,
                                      cfg.worker_count);
  std::unordered_set<std::string_view> dropped_images;
  for (const auto& im : ds.dropped) dropped_images.insert(im.image_id);
  {
    StageCounts st;
    st.stage = "categorize";
    st.in = images_in;
    st.kept = ds.kept.size();
    st.dropped["text_downsampled"] = ds.dropped.size();
    stages.push_back(std::move(st));
  }
  if (categories) *categories = {ds.category_counts, ds.text_keep_ratio};

  std::vector<CaptionRecord> captions;
  std::size_t captions_downsampled = 0;
  for (auto& c : corpus.captions) {
    if (dropped_images.count(c.image_id)) {
      ++captions_downsampled;
    } else {
      captions.push_back(std::move(c));
    }
  }
  captions = filter_captions(std::move(captions), ccfg);
  stages.push_back(count_caption_statuses("caption_filter", captions, captions_downsampled));

  std::vector<QARecord> qas;
  std::size_t qas_downsampled = 0;
  for (auto& q : corpus.qas) {
    if (dropped_images.count(q.image_id)) {
      ++qas_downsampled;
    } else {
      qas.push_back(std::move(q));
    }
  }
  const auto qa_shards = shard_indices(std::span<const QARecord>(qas),
                                       [](const QARecord& q) -> std::string_view { return q.image_id; },
                                       cfg.shard_count);
  for_each_shard(cfg.shard_count, cfg.worker_count, [&](std::uint32_t s) {
    std::vector<QARecord> part;
    part.reserve(qa_shards[s].size());
    for (std::size_t i : qa_shards[s]) part.push_back(qas[i]);
    part = filter_questions(std::move(part), ctx, ccfg);
    for (std::size_t k = 0; k < part.size(); ++k) qas[qa_shards[s][k]] = std::move(part[k]);
  });
  {
    StageCounts st;
    st.stage = "question_filter";
    st.in = qas.size() + qas_downsampled;
    st.dropped["image_downsampled"] = qas_downsampled;
    st.dropped["dropped_question"] = 0;
    for (const auto& q : qas) {
      if (q.status == QAStatus::scored || q.status == QAStatus::kept) {
        ++st.kept;
      } else {
        ++st.dropped[std::string(to_string(q.status))];
      }
    }
    stages.push_back(std::move(st));
  }

  corpus.images = std::move(ds.kept);
  corpus.captions = std::move(captions);
  corpus.qas = std::move(qas);
  return stages;
}

namespace {

// Embeds `texts` in one call; on UnknownText, finds the record to blame.
std::vector<EmbeddingVector> embed_synthetic(Encoder& encoder, const std::vector<std::string>& texts,
                                             const std::vector<std::string>& owners) {
  try {
    return encoder.embed_texts(texts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnknownText) throw;
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      encoder.embed_texts(std::span<const std::string>(&texts[i], 1));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnknownText) throw;
      throw Error(ErrorCode::MissingEmbedding, "no embedding for synthetic caption '" + texts[i] + "'",
                  owners[i]);
    }
  }
  throw Error(ErrorCode::TransportError, "encoder rejected a batch it accepts item by item");
}

}  // namespace

std::vector<StageCounts> pairs_stage(Corpus& corpus, const ScoringContext& ctx,
                                     const QuestionParser& parser, Encoder& text_encoder,
                                     const RunConfig& cfg) {
  cfg.pairs.validate();
  std::vector<StageCounts> stages;

  // Caption pairs.
  const auto kept = kept_captions(corpus.captions);
  const std::span<const CaptionRecord> kept_span(kept);
  const auto groups = group_by_image(kept_span);
  const auto cap_shards = shard_groups(groups, cfg.shard_count);
  std::vector<std::optional<PreferencePair>> cap_pairs(groups.size());
  for_each_shard(cfg.shard_count, cfg.worker_count, [&](std::uint32_t s) {
    for (std::size_t g : cap_shards[s]) {
      std::vector<CaptionRecord> members;
      members.reserve(groups[g].second.size());
      for (std::size_t i : groups[g].second) members.push_back(kept_span[i]);
      cap_pairs[g] = build_caption_pairs(members, cfg.pairs);
    }
  });

  // QA pairs: only records that passed the question filter and have not
  // been gated yet.
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < corpus.qas.size(); ++i) {
    if (corpus.qas[i].status == QAStatus::scored) pending.push_back(i);
  }
  std::vector<std::vector<std::size_t>> qa_shards(cfg.shard_count);
  for (std::size_t i : pending) {
    qa_shards[shard_of(corpus.qas[i].image_id, cfg.shard_count)].push_back(i);
  }
  std::vector<std::optional<PreferencePair>> qa_pairs(corpus.qas.size());
  std::vector<char> unparsed(corpus.qas.size(), 0);
  for_each_shard(cfg.shard_count, cfg.worker_count, [&](std::uint32_t s) {
    std::vector<std::size_t> parsed;
    std::vector<std::string> texts;
    std::vector<std::string> owners;
    std::unordered_map<std::string, std::size_t> text_index;
    for (std::size_t i : qa_shards[s]) {
      auto& qa = corpus.qas[i];
      auto text = prepare_synthetic_caption(qa, parser);
      if (!text) {
        unparsed[i] = 1;
        continue;
      }
      parsed.push_back(i);
      if (text_index.emplace(*text, texts.size()).second) {
        texts.push_back(*text);
        owners.push_back(qa.qa_id);
      }
    }
    if (parsed.empty()) return;
    const auto emb = embed_synthetic(text_encoder, texts, owners);
    for (std::size_t i : parsed) {
      auto& qa = corpus.qas[i];
      const auto& v = emb[text_index.at(*qa.synthetic_caption)];
      const ClipScore score = clip_score(ctx.image(qa.image_id), v.values());
      auto result = gate_qa_pair(std::move(qa), score, cfg.pairs);
      qa = std::move(result.record);
      qa_pairs[i] = std::move(result.pair);
    }
  });

  StageCounts cst;
  cst.stage = "caption_pairs";
  cst.in = groups.size();
  cst.dropped["no_qualifying_pair"] = 0;
  StageCounts qst;
  qst.stage = "qa_pairs";
  qst.in = pending.size();
  qst.dropped["unparsed_question"] = 0;
  qst.dropped["synthetic_score"] = 0;

  std::vector<PreferencePair> pairs;
  for (auto& p : cap_pairs) {
    if (p) {
      ++cst.kept;
      pairs.push_back(std::move(*p));
    } else {
      ++cst.dropped["no_qualifying_pair"];
    }
  }
  for (std::size_t i : pending) {
    if (qa_pairs[i]) {
      ++qst.kept;
      pairs.push_back(std::move(*qa_pairs[i]));
    } else if (unparsed[i]) {
      ++qst.dropped["unparsed_question"];
    } else {
      ++qst.dropped["synthetic_score"];
    }
  }
  for (const auto& p : pairs) validate_pair(p, cfg.pairs.margin_min);
  // Pairs from an earlier pairs run stay in place.
  for (auto& p : corpus.pairs) pairs.push_back(std::move(p));
  std::sort(pairs.begin(), pairs.end(), [](const PreferencePair& a, const PreferencePair& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.pair_id < b.pair_id;
  });
  corpus.pairs = std::move(pairs);

  stages.push_back(std::move(cst));
  stages.push_back(std::move(qst));
  return stages;
}

RunSummary run_pipeline(Corpus& corpus, const ScoringContext& ctx, const PrototypeSet& protos,
                        const QuestionParser& parser, Encoder& text_encoder,
                        const RunConfig& cfg) {
  cfg.validate();
  RunSummary s = make_summary("pipeline", cfg);
  corpus.pairs.clear();
  s.stages.push_back(rank_stage(corpus, ctx, cfg));
  CategoryStats cats;
  for (auto& st : filter_stage(corpus, protos, ctx, cfg, &cats)) s.stages.push_back(std::move(st));
  s.categories = cats;
  for (auto& st : pairs_stage(corpus, ctx, parser, text_encoder, cfg)) {
    s.stages.push_back(std::move(st));
  }
  std::size_t cp = 0, qp = 0;
  for (const auto& p : corpus.pairs) (p.source == PairSource::caption ? cp : qp)++;
  s.caption_pairs = cp;
  s.qa_pairs = qp;
  check_accounting(s);
  return s;
}

}  // namespace clipdpo
