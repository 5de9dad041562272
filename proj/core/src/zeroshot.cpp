// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/zeroshot.hpp"

#include <array>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clipdpo/error.hpp"
#include "jsonl.hpp"

namespace clipdpo {

ClassPrototypeBank::ClassPrototypeBank(std::vector<std::string> names,
                                       std::vector<EmbeddingVector> prototypes) {
  if (names.size() != prototypes.size()) {
    throw Error(ErrorCode::InvariantViolation, "class names and prototypes differ in count");
  }
  for (std::size_t i = 0; i < names.size(); ++i) add(std::move(names[i]), std::move(prototypes[i]));
}

void ClassPrototypeBank::add(std::string name, EmbeddingVector prototype) {
  for (const auto& n : names_) {
    if (n == name) throw Error(ErrorCode::DuplicateId, "duplicate class name", name);
  }
  if (!prototypes_.empty() && prototype.dim() != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "class prototype dim " +
                                                  std::to_string(prototype.dim()) + " != " +
                                                  std::to_string(dim()),
                name);
  }
  prototypes_.push_back(normalize(prototype));
  names_.push_back(std::move(name));
}

namespace {

const std::string& classify(std::span<const float> query, const ClassPrototypeBank& bank) {
  if (bank.empty()) throw Error(ErrorCode::EmptyBank, "class prototype bank is empty");
  return bank.name(argmax_score(query, bank.prototypes()));
}

}  // namespace

// Text-text and image-text scoring are the same arithmetic; the two entry
// points exist so callers state which protocol they run.
const std::string& classify_by_caption(std::span<const float> caption_embedding,
                                       const ClassPrototypeBank& bank) {
  return classify(caption_embedding, bank);
}

const std::string& classify_by_image(std::span<const float> image_embedding,
                                     const ClassPrototypeBank& bank) {
  return classify(image_embedding, bank);
}

double top1_accuracy(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  std::size_t correct = 0;
  for (const auto& p : predictions) correct += p.predicted == p.gold ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double mean_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw Error(ErrorCode::EmptyInput, "no accuracies to average");
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  return sum / static_cast<double>(accuracies.size());
}

std::string render_class_template(std::string_view tmpl, std::string_view class_name) {
  static constexpr std::string_view kSlot = "{class}";
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto at = tmpl.find(kSlot, pos);
    if (at == std::string_view::npos) break;
    out.append(tmpl.substr(pos, at - pos));
    out.append(class_name);
    pos = at + kSlot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::span<const std::string_view> default_class_templates() noexcept {
  static constexpr std::array<std::string_view, 4> kTemplates{
      "a photo of a {class}.", "a photo of the {class}.", "a close-up photo of a {class}.",
      "a good photo of a {class}."};
  return kTemplates;
}

std::vector<ClassTemplates> load_class_templates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed class template file: ") + e.what());
  }
  if (!j.is_object() || j.empty()) {
    throw Error(ErrorCode::SchemaError, "class template file must be a non-empty object");
  }
  std::vector<ClassTemplates> out;
  for (const auto& [name, prompts] : j.items()) {
    if (name.empty()) throw Error(ErrorCode::SchemaError, "empty class name");
    if (!prompts.is_array()) {
      throw Error(ErrorCode::SchemaError, "prompts must be an array of strings", name);
    }
    ClassTemplates c{name, {}};
    for (const auto& p : prompts) {
      if (!p.is_string() || p.get<std::string>().empty()) {
        throw Error(ErrorCode::SchemaError, "prompts must be non-empty strings", name);
      }
      c.prompts.push_back(render_class_template(p.get<std::string>(), name));
    }
    if (c.prompts.empty()) {
      for (auto t : default_class_templates()) c.prompts.push_back(render_class_template(t, name));
    }
    out.push_back(std::move(c));
  }
  return out;
}

ClassPrototypeBank build_class_bank(std::span<const ClassTemplates> classes, Encoder& encoder) {
  ClassPrototypeBank bank;
  for (const auto& c : classes) {
    auto emb = encoder.embed_texts(c.prompts);
    bank.add(c.class_name, build_prototype(emb));
  }
  return bank;
}

void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions) {
  std::vector<std::string> lines;
  lines.reserve(predictions.size());
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["image_id"] = p.image_id;
    j["predicted"] = p.predicted;
    j["gold"] = p.gold;
    lines.push_back(j.dump());
  }
  jsonl::write_lines(path, lines);
}

std::vector<std::pair<std::string, std::string>> load_gold_labels(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::unordered_set<std::string> seen;
  jsonl::for_each_line(path, [&](const jsonl::json& o, std::size_t line) {
    auto id = jsonl::get_nonempty_string(o, "image_id", line);
    auto gold = jsonl::get_nonempty_string(o, "gold", line);
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate image_id", id);
    out.emplace_back(std::move(id), std::move(gold));
  });
  return out;
}

}  // namespace clipdpo
