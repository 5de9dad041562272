// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "clipdpo/embedding_store.hpp"
#include "test_support.hpp"

namespace clipdpo {
namespace {

using nlohmann::json;
using testing::read_file;
using testing::run_cli;
using testing::write_file;

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Cli, HelpAndUsage) {
  auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
  r = run_cli({"pipeline", "--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("--curation.caption_score_min"), std::string::npos);

  r = run_cli({});
  EXPECT_EQ(r.code, cli::kExitValidation);
  r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  r = run_cli({"rank", "--no-such-flag", "1"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_EQ(json::parse(r.err)["error"], "UsageError");
}

TEST(Cli, ErrorsAreJsonWithExitCodes) {
  testing::TempDir dir;
  auto r = run_cli({"rank", "--paths.images", (dir / "missing.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  auto e = json::parse(r.err);
  EXPECT_EQ(e["error"], "InvalidConfig");
  EXPECT_EQ(e["stage"], "rank");

  write_file(dir / "images.jsonl", "{\"image_id\":\"a\",\"dataset\":\"x\"}\n{oops\n");
  r = run_cli({"validate", "--paths.images", (dir / "images.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  e = json::parse(r.err);
  EXPECT_EQ(e["error"], "SchemaError");
  EXPECT_EQ(e["line"], 2);

  // A runtime failure: encoder sidecar that never answers.
  const auto c = testing::make_corpus(dir / "c", 20, 1, 8);
  r = run_cli(cat({"pipeline", "--encoder.kind", "local_process", "--encoder.address", "sleep 3",
                   "--encoder.timeout_ms", "200"},
                  testing::path_args(c, dir / "out")));
  EXPECT_EQ(r.code, cli::kExitRuntime);
  EXPECT_EQ(json::parse(r.err)["error"], "Timeout");

  r = run_cli({"validate", "--shard_count", "0"});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST(Cli, ValidateReportsCounts) {
  testing::TempDir dir;
  const auto c = testing::make_corpus(dir / "c", 30, 2, 8);
  auto r = run_cli(cat({"validate", "--paths.manifest",
                        (testing::source_dir() / "data/manifests/sft_pool.jsonl").string()},
                       testing::path_args(c, dir / "out")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["images"], 30);
  EXPECT_EQ(j["dim"], 8);
  EXPECT_EQ(j["manifest"]["datasets"], 12);
  EXPECT_EQ(j["ok"], true);
}

TEST(Cli, StagesChainToThePipelineResult) {
  testing::TempDir dir;
  const auto c = testing::make_corpus(dir / "c", 150, 3, 8);
  const auto full = dir / "full";
  auto r = run_cli(cat({"pipeline"}, testing::path_args(c, full)));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_file(full / "summary.json"));

  r = run_cli(cat({"rank"}, testing::path_args(c, dir / "s1")));
  ASSERT_EQ(r.code, 0) << r.err;
  auto stage2 = c;
  stage2.captions = dir / "s1/captions.jsonl";
  r = run_cli(cat({"filter"}, testing::path_args(stage2, dir / "s2")));
  ASSERT_EQ(r.code, 0) << r.err;
  auto stage3 = c;
  stage3.images = dir / "s2/images.jsonl";
  stage3.captions = dir / "s2/captions.jsonl";
  stage3.qa = dir / "s2/qa.jsonl";
  r = run_cli(cat({"pairs"}, testing::path_args(stage3, dir / "s3")));
  ASSERT_EQ(r.code, 0) << r.err;

  EXPECT_EQ(read_file(full / "pairs.jsonl"), read_file(dir / "s3/pairs.jsonl"));
  EXPECT_EQ(read_file(full / "qa.jsonl"), read_file(dir / "s3/qa.jsonl"));
  EXPECT_EQ(read_file(full / "captions.jsonl"), read_file(dir / "s2/captions.jsonl"));
  EXPECT_EQ(read_file(full / "images.jsonl"), read_file(dir / "s2/images.jsonl"));

  const auto summary = json::parse(read_file(full / "summary.json"));
  for (const auto& st : summary["stages"]) EXPECT_TRUE(st["balanced"].get<bool>());

  r = run_cli({"stats", "--run-dir", full.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = json::parse(r.out);
  EXPECT_EQ(stats["pairs"]["total"], summary["pairs"]["total"]);
}

TEST(Cli, ConfigFileAndOverridePrecedence) {
  testing::TempDir dir;
  const auto c = testing::make_corpus(dir / "c", 80, 4, 8);
  write_file(dir / "cfg.json", R"({"curation": {"caption_score_min": 100.0}, "seed": 5})");
  auto r = run_cli(cat({"pipeline", "--config", (dir / "cfg.json").string()},
                       testing::path_args(c, dir / "a")));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["pairs"]["caption"], 0);  // nothing clears a score of 100

  r = run_cli(cat({"pipeline", "--config", (dir / "cfg.json").string(),
                   "--curation.caption_score_min", "20"},
                  testing::path_args(c, dir / "b")));
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_GT(j["pairs"]["caption"].get<int>(), 0);
  EXPECT_EQ(j["config"]["curation"]["caption_score_min"], 20.0);
}

TEST(Cli, LossEval) {
  testing::TempDir dir;
  write_file(dir / "s.jsonl",
             "{\"sample_id\":\"a\",\"logp_pol_pos\":-3,\"logp_pol_neg\":-4,\"logp_ref_pos\":-3,"
             "\"logp_ref_neg\":-4}\n");
  auto r = run_cli({"loss-eval", "--samples", (dir / "s.jsonl").string(), "--per-sample",
                    (dir / "per.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["mean_loss"].get<double>(), std::log(2.0), 1e-12);
  EXPECT_EQ(j["variant"], "dpo");
  EXPECT_NE(read_file(dir / "per.jsonl").find("\"sample_id\":\"a\""), std::string::npos);

  r = run_cli({"loss-eval", "--samples", (dir / "s.jsonl").string(), "--loss.variant", "ipo",
               "--loss.beta", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["mean_loss"].get<double>(), 1.0, 1e-12);

  write_file(dir / "empty.jsonl", "");
  r = run_cli({"loss-eval", "--samples", (dir / "empty.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_EQ(json::parse(r.err)["error"], "EmptyBatch");
}

TEST(Cli, EvalAmber) {
  testing::TempDir dir;
  write_file(dir / "a.jsonl",
             "{\"image_id\":\"1\",\"truth_objects\":[\"dog\"],\"hallu_targets\":[\"cat\"]}\n");
  write_file(dir / "g.jsonl", "{\"image_id\":\"1\",\"mentioned_objects\":[\"dog\",\"cat\"]}\n");
  write_file(dir / "d.jsonl", "{\"question_id\":\"q\",\"predicted\":\"yes\",\"gold\":\"yes\"}\n");
  auto r = run_cli({"eval-amber", "--annotations", (dir / "a.jsonl").string(), "--generative",
                    (dir / "g.jsonl").string(), "--discriminative", (dir / "d.jsonl").string(),
                    "--label", "m"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["generative"]["chair"].get<double>(), 50.0);
  EXPECT_DOUBLE_EQ(j["amber"].get<double>(), 75.0);  // (50 + 100) / 2

  r = run_cli({"eval-amber", "--discriminative", (dir / "d.jsonl").string(), "--format", "table"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 5), "label");

  r = run_cli({"eval-amber", "--label", "x"});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST(Cli, EvalZeroshot) {
  testing::TempDir dir;
  write_file(dir / "classes.json", R"({"cat": ["a cat"], "dog": ["a dog"]})");
  testing::write_store(dir / "texts.emb", 2, {"a cat", "a dog"}, {{1.f, 0.f}, {0.f, 1.f}});
  testing::write_store(dir / "queries.emb", 2, {"1", "2", "3"},
                       {{0.9f, 0.1f}, {0.2f, 0.8f}, {0.7f, 0.3f}});
  write_file(dir / "gold.jsonl", "{\"image_id\":\"1\",\"gold\":\"cat\"}\n"
                                 "{\"image_id\":\"2\",\"gold\":\"dog\"}\n"
                                 "{\"image_id\":\"3\",\"gold\":\"dog\"}\n");
  auto r = run_cli({"eval-zeroshot", "--classes", (dir / "classes.json").string(), "--gold",
                    (dir / "gold.jsonl").string(), "--queries", (dir / "queries.emb").string(),
                    "--encoder.address", (dir / "texts.emb").string(), "--predictions",
                    (dir / "pred.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["top1"].get<double>(), 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(j["top1_reported"].get<double>(), 66.7);
  EXPECT_NE(read_file(dir / "pred.jsonl").find("\"predicted\":\"cat\",\"gold\":\"dog\""),
            std::string::npos);
}

TEST(Cli, Probe) {
  testing::TempDir dir;
  testing::write_store(dir / "images.emb", 2, {"i1"}, {{1.f, 0.f}});
  testing::write_store(dir / "texts.emb", 2, {"o", "h"}, {{0.9f, 0.1f}, {0.1f, 0.9f}});
  write_file(dir / "p.jsonl",
             R"({"image_id":"i1","original":{"text":"a dog","model_loglik":-5,"embedding_ref":"o"},)"
             R"("hallucinated":[{"type":"existence","text":"a dog and a cat","model_loglik":-4,"embedding_ref":"h"}]})"
             "\n");
  auto r = run_cli({"probe", "--records", (dir / "p.jsonl").string(), "--paths.image_store",
                    (dir / "images.emb").string(), "--paths.text_store",
                    (dir / "texts.emb").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["types"]["existence"]["inversions"], 1);
  EXPECT_DOUBLE_EQ(j["types"]["existence"]["clip_correction_rate"].get<double>(), 100.0);
  EXPECT_TRUE(j["types"]["attribute"]["clip_correction_rate"].is_null());
}

}  // namespace
}  // namespace clipdpo
