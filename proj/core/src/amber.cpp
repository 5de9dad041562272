// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/amber.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"
#include "jsonl.hpp"

namespace clipdpo {

namespace {

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double response_chair(const std::set<std::string>& mentioned, const std::set<std::string>& truth) {
  if (mentioned.empty()) return 0.0;
  return 1.0 - ratio(intersection_size(mentioned, truth), mentioned.size());
}

double response_cover(const std::set<std::string>& mentioned, const std::set<std::string>& truth) {
  return ratio(intersection_size(mentioned, truth), truth.size());
}

double response_cog(const std::set<std::string>& mentioned, const std::set<std::string>& hallu) {
  return ratio(intersection_size(mentioned, hallu), mentioned.size());
}

bool is_hallucinated(double chair_fraction) noexcept { return chair_fraction > 0.0; }

GenerativeMetrics generative_metrics(std::span<const GenerativeResponse> responses,
                                     std::span<const AmberAnnotation> annotations) {
  if (responses.empty()) throw Error(ErrorCode::EmptyInput, "no generative responses");
  std::unordered_map<std::string_view, const AmberAnnotation*> by_id;
  for (const auto& a : annotations) {
    if (!by_id.emplace(a.image_id, &a).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate annotation", a.image_id);
    }
  }
  double chair = 0.0, cover = 0.0, hal = 0.0, cog = 0.0;
  for (const auto& r : responses) {
    auto it = by_id.find(r.image_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::MissingAnnotation, "no annotation for response", r.image_id);
    }
    const double c = response_chair(r.mentioned_objects, it->second->truth_objects);
    chair += c;
    cover += response_cover(r.mentioned_objects, it->second->truth_objects);
    hal += is_hallucinated(c) ? 1.0 : 0.0;
    cog += response_cog(r.mentioned_objects, it->second->hallu_targets);
  }
  const double n = static_cast<double>(responses.size());
  return {100.0 * chair / n, 100.0 * cover / n, 100.0 * hal / n, 100.0 * cog / n,
          responses.size()};
}

double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

DiscriminativeMetrics discriminative_metrics(std::span<const DiscriminativeResponse> responses) {
  if (responses.empty()) throw Error(ErrorCode::EmptyInput, "no discriminative responses");
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (const auto& r : responses) {
    if (r.predicted_yes == r.gold_yes) ++correct;
    if (r.predicted_yes && r.gold_yes) ++tp;
    if (r.predicted_yes && !r.gold_yes) ++fp;
    if (!r.predicted_yes && r.gold_yes) ++fn;
  }
  DiscriminativeMetrics m;
  m.responses = responses.size();
  m.accuracy = 100.0 * ratio(correct, responses.size());
  const double p = ratio(tp, tp + fp);
  const double rec = ratio(tp, tp + fn);
  m.precision = 100.0 * p;
  m.recall = 100.0 * rec;
  m.f1 = 100.0 * f1_score(p, rec);
  return m;
}

double round1(double x) noexcept {
  // The epsilon keeps decimal halves such as 85.35 (stored slightly low)
  // rounding up.
  return std::floor(x * 10.0 + 0.5 + 1e-9) / 10.0;
}

double amber_score_exact(double chair, double f1) {
  if (!(chair >= 0.0 && chair <= 100.0) || !(f1 >= 0.0 && f1 <= 100.0)) {
    throw Error(ErrorCode::OutOfRange, "CHAIR and F1 must lie in [0, 100]");
  }
  return ((100.0 - chair) + f1) / 2.0;
}

double amber_score(double chair, double f1) { return round1(amber_score_exact(chair, f1)); }

namespace {

using jsonl::json;
using jsonl::schema_fail;

std::set<std::string> get_string_set(const json& o, const char* key, std::size_t line) {
  auto it = o.find(key);
  if (it == o.end()) schema_fail(std::string("missing field '") + key + "'", line);
  if (!it->is_array()) schema_fail(std::string("field '") + key + "' must be an array", line);
  std::set<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) schema_fail(std::string("field '") + key + "' must hold strings", line);
    out.insert(v.get<std::string>());
  }
  return out;
}

bool get_yes_no(const json& o, const char* key, std::size_t line) {
  const auto s = jsonl::get_string(o, key, line);
  if (s == "yes") return true;
  if (s == "no") return false;
  schema_fail(std::string("field '") + key + "' must be \"yes\" or \"no\"", line);
}

}  // namespace

std::vector<AmberAnnotation> load_amber_annotations(const std::filesystem::path& path) {
  std::vector<AmberAnnotation> out;
  std::unordered_map<std::string, std::size_t> seen;
  jsonl::for_each_line(path, [&](const json& o, std::size_t line) {
    AmberAnnotation a;
    a.image_id = jsonl::get_nonempty_string(o, "image_id", line);
    a.truth_objects = get_string_set(o, "truth_objects", line);
    a.hallu_targets = get_string_set(o, "hallu_targets", line);
    for (const auto& h : a.hallu_targets) {
      if (a.truth_objects.count(h)) {
        throw Error(ErrorCode::SchemaError, "object '" + h + "' is both truth and distractor",
                    a.image_id, line);
      }
    }
    if (!seen.emplace(a.image_id, line).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate annotation", a.image_id, line);
    }
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<GenerativeResponse> load_generative_responses(const std::filesystem::path& path) {
  std::vector<GenerativeResponse> out;
  jsonl::for_each_line(path, [&](const json& o, std::size_t line) {
    GenerativeResponse r;
    r.image_id = jsonl::get_nonempty_string(o, "image_id", line);
    r.mentioned_objects = get_string_set(o, "mentioned_objects", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<DiscriminativeResponse> load_discriminative_responses(
    const std::filesystem::path& path) {
  std::vector<DiscriminativeResponse> out;
  jsonl::for_each_line(path, [&](const json& o, std::size_t line) {
    DiscriminativeResponse r;
    r.question_id = jsonl::get_nonempty_string(o, "question_id", line);
    r.predicted_yes = get_yes_no(o, "predicted", line);
    r.gold_yes = get_yes_no(o, "gold", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::string to_json(const AmberReport& report) {
  nlohmann::ordered_json j;
  j["label"] = report.label;
  if (report.generative) {
    const auto& g = *report.generative;
    j["generative"] = {{"responses", g.responses}, {"chair", g.chair}, {"cover", g.cover},
                       {"hal", g.hal}, {"cog", g.cog}};
  } else {
    j["generative"] = nullptr;
  }
  if (report.discriminative) {
    const auto& d = *report.discriminative;
    j["discriminative"] = {{"responses", d.responses}, {"accuracy", d.accuracy},
                           {"precision", d.precision}, {"recall", d.recall}, {"f1", d.f1}};
  } else {
    j["discriminative"] = nullptr;
  }
  if (report.generative && report.discriminative) {
    const double exact = amber_score_exact(report.generative->chair, report.discriminative->f1);
    j["amber_exact"] = exact;
    j["amber"] = round1(exact);
  } else {
    j["amber"] = nullptr;
  }
  return j.dump();
}

std::string table_header() { return "label\tCHAIR\tCover\tHal\tCog\tAcc\tP\tR\tF1\tAMBER"; }

std::string to_table_row(const AmberReport& report) {
  auto cell = [](std::optional<double> v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round1(*v));
    return std::string(buf);
  };
  const auto& g = report.generative;
  const auto& d = report.discriminative;
  std::optional<double> amber;
  if (g && d) amber = amber_score_exact(g->chair, d->f1);
  std::string row = report.label;
  for (auto v : {g ? std::optional(g->chair) : std::nullopt, g ? std::optional(g->cover) : std::nullopt,
                 g ? std::optional(g->hal) : std::nullopt, g ? std::optional(g->cog) : std::nullopt,
                 d ? std::optional(d->accuracy) : std::nullopt,
                 d ? std::optional(d->precision) : std::nullopt,
                 d ? std::optional(d->recall) : std::nullopt, d ? std::optional(d->f1) : std::nullopt,
                 amber}) {
    row += '\t';
    row += cell(v);
  }
  return row;
}

}  // namespace clipdpo
