// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "clipdpo/pairs.hpp"

namespace {

void BM_CaptionPairs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> score(20.0, 40.0);
  std::uniform_int_distribution<std::size_t> words(5, 60);
  std::vector<clipdpo::CaptionRecord> captions;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = clipdpo::make_caption("c" + std::to_string(i), "img", "g", "1", "text");
    c.word_count = words(rng);
    c.score = clipdpo::ClipScore{score(rng)};
    c.status = clipdpo::CaptionStatus::kept;
    captions.push_back(std::move(c));
  }
  const clipdpo::PairConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(clipdpo::build_caption_pairs(captions, cfg));
}
BENCHMARK(BM_CaptionPairs)->Arg(5)->Arg(10)->Arg(50);

}  // namespace
