// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Frozen fixture: inputs and expected outputs produced by an independent
// Python reference (tests/fixtures/make_fixture.py).

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace clipdpo {
namespace {

using testing::read_file;

TEST(Golden, PipelineMatchesFrozenOutputs) {
  const testing::fs::path golden(CLIPDPO_GOLDEN_DIR);
  const auto in = golden / "input";
  testing::TempDir dir;
  for (std::uint32_t workers : {1u, 4u}) {
    const auto out = dir / ("w" + std::to_string(workers));
    const auto r = testing::run_cli({
        "pipeline",
        "--config", (in / "config.json").string(),
        "--worker_count", std::to_string(workers),
        "--paths.images", (in / "images.jsonl").string(),
        "--paths.captions", (in / "captions.jsonl").string(),
        "--paths.qa", (in / "qa.jsonl").string(),
        "--paths.image_store", (in / "image_store.emb").string(),
        "--paths.text_store", (in / "text_store.emb").string(),
        "--paths.question_rules",
        (testing::source_dir() / "data/rules/question_rules.jsonl").string(),
        "--paths.category_descriptions",
        (testing::source_dir() / "data/categories/descriptions.json").string(),
        "--paths.output_dir", out.string(),
    });
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* name : {"images.jsonl", "captions.jsonl", "qa.jsonl", "pairs.jsonl"}) {
      EXPECT_EQ(read_file(out / name), read_file(golden / "expected" / name))
          << name << " with " << workers << " workers";
    }
  }
}

}  // namespace
}  // namespace clipdpo
