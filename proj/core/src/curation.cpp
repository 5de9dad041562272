// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/curation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "clipdpo/error.hpp"
#include "clipdpo/hashing.hpp"

namespace clipdpo {

void CurationConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (!std::isfinite(caption_score_min) || caption_score_min < 0.0) {
    bad("curation.caption_score_min must be finite and >= 0");
  }
  if (!std::isfinite(question_score_min) || question_score_min < 0.0) {
    bad("curation.question_score_min must be finite and >= 0");
  }
  if (caption_max_words == 0) bad("curation.caption_max_words must be positive");
  if (text_cap_ratio && !(*text_cap_ratio > 0.0 && *text_cap_ratio <= 1.0)) {
    bad("curation.text_cap_ratio must be in (0, 1]");
  }
}

std::vector<CaptionRecord> rank_captions(const ImageRecord& image,
                                         std::vector<CaptionRecord> captions,
                                         const ScoringContext& ctx) {
  const auto image_vec = ctx.image(image.image_id);
  for (auto& c : captions) {
    if (c.image_id != image.image_id) {
      throw Error(ErrorCode::UnknownImageId,
                  "caption belongs to '" + c.image_id + "', not '" + image.image_id + "'",
                  c.caption_id);
    }
    auto row = ctx.text_store().find(c.caption_id);
    if (!row) throw Error(ErrorCode::MissingEmbedding, "no caption embedding", c.caption_id);
    c.score = clip_score(image_vec, ctx.text_store().row(*row));
    advance(c.status, CaptionStatus::scored);
  }
  std::sort(captions.begin(), captions.end(), [](const CaptionRecord& a, const CaptionRecord& b) {
    if (a.score->value != b.score->value) return a.score->value > b.score->value;
    return a.caption_id < b.caption_id;
  });
  return captions;
}

double auto_text_cap_ratio(const std::array<std::size_t, 4>& counts) noexcept {
  const std::size_t text = counts[static_cast<std::size_t>(Category::text)];
  if (text == 0) return 1.0;
  const double others = static_cast<double>(counts[1] + counts[2] + counts[3]) / 3.0;
  return std::min(1.0, others / static_cast<double>(text));
}

bool keep_text_image(std::uint64_t seed, std::string_view image_id, double ratio) noexcept {
  if (ratio >= 1.0) return true;
  return keyed_uniform(seed, image_id) < ratio;
}

DownsampleResult categorize_and_downsample(std::vector<ImageRecord> images,
                                           const PrototypeSet& protos, const CurationConfig& cfg,
                                           const ScoringContext& ctx, unsigned workers) {
  cfg.validate();
  std::vector<Category> cats(images.size());
  auto assign = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      cats[i] = assign_category(ctx.image(images[i].image_id), protos);
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(workers == 0 ? 1 : workers, 1, std::max<std::size_t>(1, images.size()));
  if (n_workers <= 1) {
    assign(0, images.size());
  } else {
    // Exceptions from worker threads are captured and rethrown in index order.
    std::vector<std::exception_ptr> errors(n_workers);
    const std::size_t chunk = (images.size() + n_workers - 1) / n_workers;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n_workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(images.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
          try {
            assign(begin, end);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  DownsampleResult out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    images[i].category = cats[i];
    ++out.category_counts[static_cast<std::size_t>(cats[i])];
  }
  out.text_keep_ratio = cfg.text_cap_ratio.value_or(auto_text_cap_ratio(out.category_counts));
  for (auto& im : images) {
    const bool keep = *im.category != Category::text ||
                      keep_text_image(cfg.text_downsample_seed, im.image_id, out.text_keep_ratio);
    (keep ? out.kept : out.dropped).push_back(std::move(im));
  }
  return out;
}

std::vector<CaptionRecord> filter_captions(std::vector<CaptionRecord> captions,
                                           const CurationConfig& cfg) {
  for (auto& c : captions) {
    if (c.status == CaptionStatus::raw || !c.score) {
      throw Error(ErrorCode::UnscoredCaption, "caption has not been ranked", c.caption_id);
    }
    if (is_terminal(c.status)) continue;
    CaptionStatus next = CaptionStatus::kept;
    if (c.score->value < cfg.caption_score_min) {
      next = CaptionStatus::dropped_score;
    } else if (c.word_count > cfg.caption_max_words) {
      next = CaptionStatus::dropped_length;
    }
    advance(c.status, next);
  }
  return captions;
}

std::vector<QARecord> filter_questions(std::vector<QARecord> qas, const ScoringContext& ctx,
                                       const CurationConfig& cfg) {
  for (auto& q : qas) {
    if (is_terminal(q.status)) continue;
    if (!q.question_score) {
      auto row = ctx.text_store().find(q.qa_id);
      if (!row) throw Error(ErrorCode::MissingEmbedding, "no question embedding", q.qa_id);
      q.question_score = clip_score(ctx.image(q.image_id), ctx.text_store().row(*row));
    }
    advance(q.status, q.question_score->value < cfg.question_score_min ? QAStatus::dropped_question
                                                                        : QAStatus::scored);
  }
  return qas;
}

std::vector<CaptionRecord> kept_captions(std::span<const CaptionRecord> captions) {
  std::vector<CaptionRecord> out;
  for (const auto& c : captions) {
    if (c.status == CaptionStatus::kept) out.push_back(c);
  }
  return out;
}

std::vector<QARecord> surviving_questions(std::span<const QARecord> qas) {
  std::vector<QARecord> out;
  for (const auto& q : qas) {
    if (q.status == QAStatus::scored || q.status == QAStatus::kept) out.push_back(q);
  }
  return out;
}

}  // namespace clipdpo
