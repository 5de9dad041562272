// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"

namespace clipdpo {

void PairConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (!(margin_min > 0.0) || !std::isfinite(margin_min)) bad("pairs.margin_min must be > 0");
  if (!(length_ratio_max >= 1.0) || !std::isfinite(length_ratio_max)) {
    bad("pairs.length_ratio_max must be >= 1");
  }
  if (!std::isfinite(synthetic_score_min)) bad("pairs.synthetic_score_min must be finite");
}

bool lengths_similar(std::size_t a_words, std::size_t b_words, double ratio_max) noexcept {
  const auto [lo, hi] = std::minmax(a_words, b_words);
  if (lo == 0) return hi == 0;
  return static_cast<double>(hi) / static_cast<double>(lo) <= ratio_max;
}

std::string caption_pair_id(std::string_view image_id) {
  return std::string(image_id) + "#caption";
}

std::string qa_pair_id(std::string_view qa_id) { return std::string(qa_id) + "#qa"; }

std::optional<PreferencePair> build_caption_pairs(std::span<const CaptionRecord> ranked,
                                                  const PairConfig& cfg) {
  if (ranked.empty()) return std::nullopt;
  for (const auto& c : ranked) {
    if (!c.score) throw Error(ErrorCode::UnscoredCaption, "caption has no score", c.caption_id);
    if (c.image_id != ranked.front().image_id) {
      throw Error(ErrorCode::InvariantViolation, "captions from more than one image", c.caption_id);
    }
  }

  // Pointers sorted by (score desc, caption_id asc); callers normally pass
  // this order already.
  std::vector<const CaptionRecord*> order;
  order.reserve(ranked.size());
  for (const auto& c : ranked) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const CaptionRecord* a, const CaptionRecord* b) {
    if (a->score->value != b->score->value) return a->score->value > b->score->value;
    return a->caption_id < b->caption_id;
  });

  const std::size_t n = order.size();
  const double lowest = order.back()->score->value;
  const CaptionRecord* best_hi = nullptr;
  const CaptionRecord* best_lo = nullptr;
  double best_margin = 0.0;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hi_score = order[i]->score->value;
    const double ceiling = hi_score - lowest;
    if (!(ceiling > cfg.margin_min)) break;
    if (best_hi && ceiling < best_margin) break;

    // Walk upward from the lowest score; the first compatible caption gives
    // this chosen caption's largest margin. Keep walking while the margin is
    // unchanged to find the smallest rejected id.
    const CaptionRecord* lo = nullptr;
    double margin = 0.0;
    for (std::size_t j = n - 1; j > i; --j) {
      const double m = hi_score - order[j]->score->value;
      if (lo && m != margin) break;
      if (!(m > cfg.margin_min)) break;
      if (!lengths_similar(order[i]->word_count, order[j]->word_count, cfg.length_ratio_max)) {
        continue;
      }
      if (!lo || order[j]->caption_id < lo->caption_id) {
        lo = order[j];
        margin = m;
      }
    }
    if (!lo) continue;

    const bool better =
        !best_hi || margin > best_margin ||
        (margin == best_margin &&
         (order[i]->caption_id < best_hi->caption_id ||
          (order[i]->caption_id == best_hi->caption_id && lo->caption_id < best_lo->caption_id)));
    if (better) {
      best_hi = order[i];
      best_lo = lo;
      best_margin = margin;
    }
  }

  if (!best_hi) return std::nullopt;
  PreferencePair p;
  p.pair_id = caption_pair_id(best_hi->image_id);
  p.image_id = best_hi->image_id;
  p.prompt = cfg.caption_prompt_template;
  p.chosen = best_hi->text;
  p.rejected = best_lo->text;
  p.chosen_score = *best_hi->score;
  p.rejected_score = *best_lo->score;
  p.margin = best_margin;
  p.source = PairSource::caption;
  return p;
}

QuestionParser::QuestionParser(std::vector<QuestionRule> rules) {
  rules_.reserve(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto flags = std::regex::ECMAScript;
    if (rules[i].icase) flags |= std::regex::icase;
    try {
      std::regex re(rules[i].pattern, flags);
      rules_.push_back({std::move(rules[i]), std::move(re)});
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::InvalidPattern,
                  "rule " + std::to_string(i + 1) + " '" + rules[i].pattern + "': " + e.what());
    }
  }
}

QuestionParser QuestionParser::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open rule file '" + path.string() + "'");
  std::vector<QuestionRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json o;
    try {
      o = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SchemaError, std::string("malformed rule: ") + e.what(), {}, line_no);
    }
    if (!o.is_object() || !o.contains("pattern") || !o["pattern"].is_string() ||
        !o.contains("template") || !o["template"].is_string()) {
      throw Error(ErrorCode::SchemaError, "rule needs string 'pattern' and 'template'", {}, line_no);
    }
    rules.push_back({o["pattern"].get<std::string>(), o["template"].get<std::string>(),
                     o.value("icase", false)});
  }
  return QuestionParser(std::move(rules));
}

std::optional<std::string> QuestionParser::parse(std::string_view question) const {
  const std::string q(question);
  for (const auto& r : rules_) {
    std::smatch m;
    if (std::regex_match(q, m, r.re)) return m.format(r.rule.replacement);
  }
  return std::nullopt;
}

std::string synthetic_caption_text(std::string_view description, std::string_view positive) {
  std::string out(description);
  out += ' ';
  out += positive;
  return out;
}

std::optional<std::string> prepare_synthetic_caption(QARecord& qa, const QuestionParser& parser) {
  if (qa.status != QAStatus::scored) {
    throw Error(ErrorCode::InvalidTransition,
                "qa record must be scored, is " + std::string(to_string(qa.status)), qa.qa_id);
  }
  auto description = parser.parse(qa.question);
  if (!description) {
    advance(qa.status, QAStatus::dropped_answer);
    return std::nullopt;
  }
  qa.synthetic_caption = synthetic_caption_text(*description, qa.positive);
  return qa.synthetic_caption;
}

namespace {

std::string render_qa_prompt(const std::string& tmpl, const std::string& question) {
  static constexpr std::string_view kSlot = "{question}";
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto at = tmpl.find(kSlot, pos);
    if (at == std::string::npos) break;
    out.append(tmpl, pos, at - pos);
    out += question;
    pos = at + kSlot.size();
  }
  out.append(tmpl, pos);
  return out;
}

}  // namespace

QAPairResult gate_qa_pair(QARecord qa, ClipScore synthetic_score, const PairConfig& cfg) {
  if (!qa.synthetic_caption) {
    throw Error(ErrorCode::InvariantViolation, "qa record has no synthetic caption", qa.qa_id);
  }
  qa.synthetic_score = synthetic_score;
  if (synthetic_score.value < cfg.synthetic_score_min) {
    advance(qa.status, QAStatus::dropped_answer);
    return {std::move(qa), std::nullopt};
  }
  advance(qa.status, QAStatus::kept);
  PreferencePair p;
  p.pair_id = qa_pair_id(qa.qa_id);
  p.image_id = qa.image_id;
  p.prompt = render_qa_prompt(cfg.qa_prompt_template, qa.question);
  p.chosen = qa.positive;
  p.rejected = qa.negative;
  p.chosen_score = synthetic_score;
  p.rejected_score = ClipScore{0.0};
  p.margin = 0.0;
  p.source = PairSource::qa;
  return {std::move(qa), std::move(p)};
}

QAPairResult build_qa_pair(QARecord qa, const QuestionParser& parser,
                           std::span<const float> image_embedding, Encoder& encoder,
                           const PairConfig& cfg) {
  auto text = prepare_synthetic_caption(qa, parser);
  if (!text) return {std::move(qa), std::nullopt};
  std::vector<EmbeddingVector> emb;
  try {
    emb = encoder.embed_texts(std::span<const std::string>(&*text, 1));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownText) {
      throw Error(ErrorCode::MissingEmbedding, "no embedding for synthetic caption '" + *text + "'",
                  qa.qa_id);
    }
    throw;
  }
  const ClipScore score = clip_score(image_embedding, emb.front().values());
  return gate_qa_pair(std::move(qa), score, cfg);
}

}  // namespace clipdpo
