// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clipdpo/amber.hpp"
#include "clipdpo/embedding_store.hpp"
#include "clipdpo/encoder.hpp"
#include "clipdpo/error.hpp"
#include "clipdpo/losses.hpp"
#include "clipdpo/pipeline.hpp"
#include "clipdpo/probe.hpp"
#include "clipdpo/record_io.hpp"
#include "clipdpo/run_config.hpp"
#include "clipdpo/scoring_context.hpp"
#include "clipdpo/zeroshot.hpp"

namespace clipdpo::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

const std::string& require_path(const std::string& value, const char* key) {
  if (value.empty()) invalid(std::string(key) + " is required for this command");
  if (!fs::exists(value)) invalid(std::string(key) + " '" + value + "' does not exist");
  return value;
}

fs::path output_dir(const RunConfig& cfg) {
  if (cfg.paths.output_dir.empty()) invalid("paths.output_dir is required for this command");
  fs::path dir(cfg.paths.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text << '\n';
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

// Image store plus the text side. With the default file_stub endpoint over
// paths.text_store the store is loaded once and shared with the encoder.
struct Embeddings {
  std::optional<EmbeddingStore> images;
  std::optional<EmbeddingStore> texts_owned;
  std::unique_ptr<Encoder> encoder;
  const EmbeddingStore* texts = nullptr;
};

Embeddings open_embeddings(const RunConfig& cfg, bool need_images) {
  Embeddings e;
  if (need_images) e.images.emplace(EmbeddingStore::load(require_path(cfg.paths.image_store,
                                                                      "paths.image_store")));
  const auto ep = cfg.effective_encoder();
  const auto& text_path = require_path(cfg.paths.text_store, "paths.text_store");
  if (ep.kind == EncoderKind::file_stub && ep.address == text_path) {
    auto stub = std::make_unique<FileStubEncoder>(ep, EmbeddingStore::load(text_path));
    e.texts = &stub->store();
    e.encoder = std::move(stub);
  } else {
    e.texts_owned.emplace(EmbeddingStore::load(text_path));
    e.texts = &*e.texts_owned;
    e.encoder = make_encoder(ep);
  }
  return e;
}

// ---- stage commands ----

ojson parse_json(const std::string& s) { return ojson::parse(s); }

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  ojson report;
  report["command"] = "validate";
  report["config_hash"] = config_hash(cfg);
  if (!cfg.paths.manifest.empty()) {
    const auto m = load_manifest(require_path(cfg.paths.manifest, "paths.manifest"));
    report["manifest"] = {{"datasets", m.entries.size()}, {"images", m.total_images()}};
  }
  const auto images = load_image_records(require_path(cfg.paths.images, "paths.images"));
  report["images"] = images.size();
  std::vector<CaptionRecord> captions;
  std::vector<QARecord> qas;
  if (!cfg.paths.captions.empty()) {
    captions = load_caption_records(require_path(cfg.paths.captions, "paths.captions"));
    check_image_references(std::span<const CaptionRecord>(captions), images);
    report["captions"] = captions.size();
  }
  if (!cfg.paths.qa.empty()) {
    qas = load_qa_records(require_path(cfg.paths.qa, "paths.qa"));
    check_image_references(std::span<const QARecord>(qas), images);
    report["qa"] = qas.size();
  }
  if (!cfg.paths.image_store.empty() || !cfg.paths.text_store.empty()) {
    const auto image_store = EmbeddingStore::load(require_path(cfg.paths.image_store,
                                                               "paths.image_store"));
    const auto text_store = EmbeddingStore::load(require_path(cfg.paths.text_store,
                                                              "paths.text_store"));
    const ScoringContext ctx(image_store, text_store, images);
    for (const auto& c : captions) (void)ctx.text(c.caption_id);
    for (const auto& q : qas) (void)ctx.text(q.qa_id);
    report["dim"] = image_store.dim();
  }
  if (!cfg.paths.question_rules.empty()) {
    report["question_rules"] =
        QuestionParser::from_file(require_path(cfg.paths.question_rules, "paths.question_rules"))
            .size();
  }
  if (!cfg.paths.category_descriptions.empty()) {
    const auto d = load_category_descriptions(
        require_path(cfg.paths.category_descriptions, "paths.category_descriptions"));
    std::size_t n = 0;
    for (const auto& l : d) n += l.size();
    report["category_descriptions"] = n;
  }
  report["ok"] = true;
  out << report.dump(2) << '\n';
  return kExitOk;
}

Corpus load_corpus(const RunConfig& cfg, bool captions, bool qas) {
  Corpus c;
  c.images = load_image_records(require_path(cfg.paths.images, "paths.images"));
  if (captions) c.captions = load_caption_records(require_path(cfg.paths.captions, "paths.captions"));
  if (qas && !cfg.paths.qa.empty()) c.qas = load_qa_records(require_path(cfg.paths.qa, "paths.qa"));
  return c;
}

void finish_stage(const RunSummary& s, const fs::path& dir, std::ostream& out) {
  const auto text = to_json(s);
  write_text(dir / "summary.json", text);
  out << text << '\n';
}

int cmd_rank(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  auto corpus = load_corpus(cfg, true, false);
  auto emb = open_embeddings(cfg, true);
  const ScoringContext ctx(*emb.images, *emb.texts, corpus.images);
  auto s = make_summary("rank", cfg);
  s.stages.push_back(rank_stage(corpus, ctx, cfg));
  write_caption_records(dir / "captions.jsonl", corpus.captions);
  finish_stage(s, dir, out);
  return kExitOk;
}

PrototypeSet load_prototypes(const RunConfig& cfg, Encoder& encoder) {
  return build_prototype_set(
      load_category_descriptions(
          require_path(cfg.paths.category_descriptions, "paths.category_descriptions")),
      encoder);
}

int cmd_filter(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  auto corpus = load_corpus(cfg, true, true);
  auto emb = open_embeddings(cfg, true);
  const ScoringContext ctx(*emb.images, *emb.texts, corpus.images);
  const auto protos = load_prototypes(cfg, *emb.encoder);
  auto s = make_summary("filter", cfg);
  CategoryStats cats;
  s.stages = filter_stage(corpus, protos, ctx, cfg, &cats);
  s.categories = cats;
  write_image_records(dir / "images.jsonl", corpus.images);
  write_caption_records(dir / "captions.jsonl", corpus.captions);
  write_qa_records(dir / "qa.jsonl", corpus.qas);
  finish_stage(s, dir, out);
  return kExitOk;
}

void count_pairs(RunSummary& s, std::span<const PreferencePair> pairs) {
  std::size_t cp = 0, qp = 0;
  for (const auto& p : pairs) (p.source == PairSource::caption ? cp : qp)++;
  s.caption_pairs = cp;
  s.qa_pairs = qp;
}

int cmd_pairs(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  auto corpus = load_corpus(cfg, true, true);
  auto emb = open_embeddings(cfg, true);
  const ScoringContext ctx(*emb.images, *emb.texts, corpus.images);
  const auto parser =
      QuestionParser::from_file(require_path(cfg.paths.question_rules, "paths.question_rules"));
  auto s = make_summary("pairs", cfg);
  s.stages = pairs_stage(corpus, ctx, parser, *emb.encoder, cfg);
  count_pairs(s, corpus.pairs);
  emit_pairs(corpus.pairs, dir / "pairs.jsonl", cfg.pairs.margin_min);
  write_qa_records(dir / "qa.jsonl", corpus.qas);
  finish_stage(s, dir, out);
  return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  auto corpus = load_corpus(cfg, true, true);
  auto emb = open_embeddings(cfg, true);
  const ScoringContext ctx(*emb.images, *emb.texts, corpus.images);
  const auto protos = load_prototypes(cfg, *emb.encoder);
  const auto parser =
      QuestionParser::from_file(require_path(cfg.paths.question_rules, "paths.question_rules"));
  const auto s = run_pipeline(corpus, ctx, protos, parser, *emb.encoder, cfg);
  write_image_records(dir / "images.jsonl", corpus.images);
  write_caption_records(dir / "captions.jsonl", corpus.captions);
  write_qa_records(dir / "qa.jsonl", corpus.qas);
  emit_pairs(corpus.pairs, dir / "pairs.jsonl", cfg.pairs.margin_min);
  finish_stage(s, dir, out);
  return kExitOk;
}

// ---- evaluators ----

void emit_report(const ojson& report, const std::string& out_path, std::ostream& out) {
  const auto text = report.dump(2);
  if (!out_path.empty()) write_text(out_path, text);
  out << text << '\n';
}

struct LossArgs {
  std::string samples;
  std::optional<double> kto_z;
  std::string per_sample;
  std::string out;
};

int cmd_loss_eval(const RunConfig& cfg, const LossArgs& a, std::ostream& out) {
  cfg.loss.validate();
  const auto records = load_preference_samples(require_path(a.samples, "--samples"));
  std::vector<PreferenceSample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) samples.push_back(r.sample);
  const auto result = batch_loss(samples, cfg.loss, a.kto_z);

  std::array<double, 4> mean_grad{};
  double mean_margin = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) mean_grad[k] += result.per_sample[i].grad[k];
    mean_margin += implicit_reward_margin(samples[i]);
  }
  const double n = static_cast<double>(samples.size());
  for (auto& g : mean_grad) g /= n;
  mean_margin /= n;

  ojson report;
  report["command"] = "loss-eval";
  report["variant"] = std::string(to_string(cfg.loss.variant));
  report["beta"] = cfg.loss.beta;
  report["label_smoothing"] = cfg.loss.label_smoothing;
  report["slic_delta"] = cfg.loss.slic_delta;
  report["kto_lambda_pos"] = cfg.loss.kto_lambda_pos;
  report["kto_lambda_neg"] = cfg.loss.kto_lambda_neg;
  report["kto_reference_point"] = a.kto_z.value_or(0.0);
  report["samples"] = samples.size();
  report["mean_loss"] = result.mean_loss;
  report["mean_reward_margin"] = mean_margin;
  report["mean_grad"] = {{"logp_pol_pos", mean_grad[0]},
                         {"logp_pol_neg", mean_grad[1]},
                         {"logp_ref_pos", mean_grad[2]},
                         {"logp_ref_neg", mean_grad[3]}};
  if (!a.per_sample.empty()) {
    std::ofstream f(a.per_sample, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + a.per_sample + "' for writing");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& o = result.per_sample[i];
      ojson j;
      j["sample_id"] = records[i].sample_id;
      j["loss"] = o.loss;
      j["grad"] = o.grad;
      f << j.dump() << '\n';
    }
    if (!f.flush()) throw Error(ErrorCode::IoError, "write failed for '" + a.per_sample + "'");
  }
  emit_report(report, a.out, out);
  return kExitOk;
}

struct AmberArgs {
  std::string annotations;
  std::string generative;
  std::string discriminative;
  std::string label = "run";
  std::string format = "json";
  std::string out;
};

int cmd_eval_amber(const AmberArgs& a, std::ostream& out) {
  if (a.generative.empty() && a.discriminative.empty()) {
    invalid("eval-amber needs --generative and/or --discriminative");
  }
  AmberReport r;
  r.label = a.label;
  if (!a.generative.empty()) {
    const auto ann = load_amber_annotations(require_path(a.annotations, "--annotations"));
    const auto resp = load_generative_responses(require_path(a.generative, "--generative"));
    r.generative = generative_metrics(resp, ann);
  }
  if (!a.discriminative.empty()) {
    const auto resp = load_discriminative_responses(require_path(a.discriminative,
                                                                 "--discriminative"));
    r.discriminative = discriminative_metrics(resp);
  }
  std::string text;
  if (a.format == "table") {
    text = table_header() + "\n" + to_table_row(r);
  } else if (a.format == "json") {
    text = parse_json(to_json(r)).dump(2);
  } else {
    invalid("--format must be json or table");
  }
  if (!a.out.empty()) write_text(a.out, text);
  out << text << '\n';
  return kExitOk;
}

struct ZeroshotArgs {
  std::string classes;
  std::string gold;
  std::string queries;
  std::string mode = "caption";
  std::string predictions;
  std::string out;
};

int cmd_eval_zeroshot(const RunConfig& cfg, const ZeroshotArgs& a, std::ostream& out) {
  if (a.mode != "caption" && a.mode != "image") invalid("--mode must be caption or image");
  const auto templates = load_class_templates(require_path(a.classes, "--classes"));
  const auto gold = load_gold_labels(require_path(a.gold, "--gold"));
  const auto queries = EmbeddingStore::load(require_path(a.queries, "--queries"));
  auto encoder = make_encoder(cfg.effective_encoder());
  const auto bank = build_class_bank(templates, *encoder);
  if (queries.dim() != bank.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query dim " + std::to_string(queries.dim()) +
                                                  " != class prototype dim " +
                                                  std::to_string(bank.dim()));
  }
  std::vector<Prediction> preds;
  preds.reserve(gold.size());
  for (const auto& [image_id, label] : gold) {
    const auto q = queries.row(image_id);
    const auto& predicted =
        a.mode == "caption" ? classify_by_caption(q, bank) : classify_by_image(q, bank);
    preds.push_back({image_id, predicted, label});
  }
  if (!a.predictions.empty()) write_predictions(a.predictions, preds);
  ojson report;
  report["command"] = "eval-zeroshot";
  report["mode"] = a.mode;
  report["classes"] = bank.size();
  report["images"] = preds.size();
  const double acc = top1_accuracy(preds);
  report["top1"] = acc;
  report["top1_reported"] = round1(acc);
  emit_report(report, a.out, out);
  return kExitOk;
}

struct ProbeArgs {
  std::string records;
  std::string out;
};

int cmd_probe(const RunConfig& cfg, const ProbeArgs& a, std::ostream& out) {
  const auto records = load_probe_records(require_path(a.records, "--records"));
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no probe records");
  const auto images = EmbeddingStore::load(require_path(cfg.paths.image_store,
                                                        "paths.image_store"));
  const auto texts = EmbeddingStore::load(require_path(cfg.paths.text_store, "paths.text_store"));
  const auto inversions = likelihood_inversions(records);
  const auto rates = clip_correction_rate(records, images, texts);
  ojson report;
  report["command"] = "probe";
  report["records"] = records.size();
  ojson types;
  for (auto t : kHallucinationTypes) {
    const auto i = static_cast<std::size_t>(t);
    std::size_t present = 0;
    for (const auto& r : records) present += r.hallucinated[i] ? 1 : 0;
    types[std::string(to_string(t))] = {
        {"captions", present},
        {"inversions", inversions[i]},
        {"clip_correction_rate", rates[i] ? ojson(*rates[i]) : ojson(nullptr)}};
  }
  report["types"] = types;
  emit_report(report, a.out, out);
  return kExitOk;
}

struct StatsArgs {
  std::string run_dir;
  std::string out;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const fs::path dir(require_path(a.run_dir, "--run-dir"));
  ojson report;
  report["command"] = "stats";
  if (fs::exists(dir / "images.jsonl")) {
    const auto images = load_image_records(dir / "images.jsonl");
    std::array<std::size_t, 4> counts{};
    std::size_t uncategorized = 0;
    for (const auto& im : images) {
      if (im.category) {
        ++counts[static_cast<std::size_t>(*im.category)];
      } else {
        ++uncategorized;
      }
    }
    ojson c;
    for (auto cat : kCategories) c[std::string(to_string(cat))] = counts[static_cast<std::size_t>(cat)];
    c["uncategorized"] = uncategorized;
    report["images"] = {{"total", images.size()}, {"categories", c}};
  }
  if (fs::exists(dir / "captions.jsonl")) {
    const auto captions = load_caption_records(dir / "captions.jsonl");
    std::map<std::string, std::size_t> by_status;
    for (const auto& c : captions) ++by_status[std::string(to_string(c.status))];
    report["captions"] = {{"total", captions.size()}, {"status", by_status}};
  }
  if (fs::exists(dir / "qa.jsonl")) {
    const auto qas = load_qa_records(dir / "qa.jsonl");
    std::map<std::string, std::size_t> by_status;
    for (const auto& q : qas) ++by_status[std::string(to_string(q.status))];
    report["qa"] = {{"total", qas.size()}, {"status", by_status}};
  }
  if (fs::exists(dir / "pairs.jsonl")) {
    const auto pairs = load_pairs(dir / "pairs.jsonl");
    std::size_t cp = 0, qp = 0;
    double margin = 0.0;
    for (const auto& p : pairs) {
      if (p.source == PairSource::caption) {
        ++cp;
        margin += p.margin;
      } else {
        ++qp;
      }
    }
    report["pairs"] = {{"caption", cp},
                       {"qa", qp},
                       {"total", pairs.size()},
                       {"mean_caption_margin", cp ? ojson(margin / static_cast<double>(cp))
                                                  : ojson(nullptr)}};
  }
  if (fs::exists(dir / "summary.json")) {
    std::ifstream in(dir / "summary.json");
    report["summary"] = ojson::parse(in);
  }
  emit_report(report, a.out, out);
  return kExitOk;
}

// ---- error reporting ----

void report_error(std::ostream& err, const std::string& command, const std::string& code,
                  const std::string& message, const std::string& record_id, std::size_t line) {
  ojson j;
  j["error"] = code;
  j["stage"] = command;
  j["message"] = message;
  j["record_id"] = record_id.empty() ? ojson(nullptr) : ojson(record_id);
  j["line"] = line == 0 ? ojson(nullptr) : ojson(line);
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CLIP-score preference data curation and evaluation", "clipdpo"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> overrides;
    std::string config;
  };
  std::map<std::string, Sub> subs;
  const auto keys = config_keys();
  auto add = [&](const std::string& name, const std::string& help, bool with_config) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, help);
    if (with_config) {
      s.app->add_option("--config", s.config, "run config JSON file");
      for (const auto& k : keys) {
        s.app->add_option("--" + k, s.overrides[k], "override " + k)->group("Config overrides");
      }
    }
    return s.app;
  };

  add("validate", "schema and embedding cross-checks", true);
  add("rank", "score and order captions per image", true);
  add("filter", "categorize, down-sample, and apply caption / question filters", true);
  add("pairs", "build caption and QA preference pairs", true);
  add("pipeline", "rank, filter and pairs in one run", true);

  LossArgs loss_args;
  auto* loss = add("loss-eval", "batch loss and gradient report over a sample file", true);
  loss->add_option("--samples", loss_args.samples, "JSON-lines preference samples")->required();
  loss->add_option("--kto-z", loss_args.kto_z, "KTO reference point (default 0)");
  loss->add_option("--per-sample", loss_args.per_sample, "write per-sample losses here");
  loss->add_option("--out", loss_args.out, "also write the report here");

  AmberArgs amber_args;
  auto* amber = add("eval-amber", "AMBER generative and discriminative metrics", false);
  amber->add_option("--annotations", amber_args.annotations, "annotation JSON lines");
  amber->add_option("--generative", amber_args.generative, "generative responses");
  amber->add_option("--discriminative", amber_args.discriminative, "yes/no responses");
  amber->add_option("--label", amber_args.label, "row label");
  amber->add_option("--format", amber_args.format, "json or table");
  amber->add_option("--out", amber_args.out, "also write the report here");

  ZeroshotArgs zs_args;
  auto* zs = add("eval-zeroshot", "zero-shot top-1 accuracy against class prototypes", true);
  zs->add_option("--classes", zs_args.classes, "class template JSON")->required();
  zs->add_option("--gold", zs_args.gold, "JSON lines {image_id, gold}")->required();
  zs->add_option("--queries", zs_args.queries,
                 "embedding store keyed by image_id (caption or image embeddings)")
      ->required();
  zs->add_option("--mode", zs_args.mode, "caption or image");
  zs->add_option("--predictions", zs_args.predictions, "prediction dump");
  zs->add_option("--out", zs_args.out, "also write the report here");

  ProbeArgs probe_args;
  auto* probe = add("probe", "likelihood inversions and CLIP correction rates", true);
  probe->add_option("--records", probe_args.records, "probe JSON lines")->required();
  probe->add_option("--out", probe_args.out, "also write the report here");

  StatsArgs stats_args;
  auto* stats = add("stats", "category, status and pair counts of a run directory", false);
  stats->add_option("--run-dir", stats_args.run_dir, "output_dir of a run")->required();
  stats->add_option("--out", stats_args.out, "also write the report here");

  std::string command = "clipdpo";
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    for (auto& [name, s] : subs) {
      if (s.app->parsed()) command = name;
    }
    report_error(err, command, "UsageError", e.what(), {}, 0);
    return kExitValidation;
  }

  for (auto& [name, s] : subs) {
    if (s.app->parsed()) command = name;
  }
  auto& sub = subs.at(command);
  try {
    RunConfig cfg;
    if (!sub.config.empty()) cfg = load_run_config(sub.config);
    for (const auto& k : keys) {
      auto* opt = sub.app->get_option_no_throw("--" + k);
      if (opt && opt->count() > 0) apply_override(cfg, k, sub.overrides[k]);
    }
    if (command == "validate") return cmd_validate(cfg, out);
    if (command == "rank") return cmd_rank(cfg, out);
    if (command == "filter") return cmd_filter(cfg, out);
    if (command == "pairs") return cmd_pairs(cfg, out);
    if (command == "pipeline") return cmd_pipeline(cfg, out);
    if (command == "loss-eval") return cmd_loss_eval(cfg, loss_args, out);
    if (command == "eval-amber") return cmd_eval_amber(amber_args, out);
    if (command == "eval-zeroshot") return cmd_eval_zeroshot(cfg, zs_args, out);
    if (command == "probe") return cmd_probe(cfg, probe_args, out);
    if (command == "stats") return cmd_stats(stats_args, out);
    report_error(err, command, "UsageError", "unknown command", {}, 0);
    return kExitValidation;
  } catch (const Error& e) {
    report_error(err, command, std::string(to_string(e.code())), e.message(), e.record_id(),
                 e.line());
    return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const nlohmann::json::exception& e) {
    report_error(err, command, "SchemaError", e.what(), {}, 0);
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, command, "InternalError", e.what(), {}, 0);
    return kExitRuntime;
  }
}

}  // namespace clipdpo::cli
