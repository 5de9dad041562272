// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion. Two published-table checks are
// known to fail on the printed numbers themselves; they are reported as FAIL
// and pinned below, and the exit status is nonzero only when a criterion
// outside that list fails or a pinned one stops failing the way it should.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clipdpo/amber.hpp"
#include "clipdpo/curation.hpp"
#include "clipdpo/embedding.hpp"
#include "clipdpo/embedding_store.hpp"
#include "clipdpo/losses.hpp"
#include "clipdpo/pairs.hpp"
#include "clipdpo/probe.hpp"
#include "clipdpo/scoring_context.hpp"
#include "reference_tables.hpp"
#include "test_support.hpp"

namespace clipdpo::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

// Printed values carry one decimal; "within 0.05" is a rounding bound, and the
// 1e-9 absorbs binary representation of exact halves such as 85.35.
constexpr double kRoundTol = 0.05 + 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failing;  // row or case identifiers
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// ---- published tables ----

Outcome amber_arithmetic() {
  Outcome o;
  double worst = 0.0;
  for (const auto& r : amber_rows()) {
    const double exact = amber_score_exact(r.chair, r.f1);
    worst = std::max(worst, std::abs(exact - r.amber));
    if (std::abs(exact - r.amber) > kRoundTol) o.failing.emplace_back(r.model);
  }
  // The two highlighted rows, by value.
  const bool hi1 = std::abs(amber_score_exact(3.7, 82.9) - 89.6) <= kRoundTol;
  const bool hi2 = std::abs(amber_score_exact(3.8, 66.5) - 81.4) <= kRoundTol;
  o.pass = o.failing.empty() && hi1 && hi2;
  o.detail = std::to_string(amber_rows().size()) + " rows, max |diff| " +
             fmt("%.4f", worst, 0);
  return o;
}

Outcome f1_consistency() {
  Outcome o;
  std::ostringstream d;
  for (const auto& r : amber_rows()) {
    const double f1 = 100.0 * f1_score(r.precision / 100.0, r.recall / 100.0);
    if (std::abs(f1 - r.f1) > kRoundTol) {
      o.failing.emplace_back(r.model);
      d << r.model << " 2PR/(P+R)=" << fmt("%.4f printed %.1f", f1, r.f1) << "; ";
    }
  }
  o.pass = o.failing.empty();
  o.detail = std::to_string(amber_rows().size() - o.failing.size()) + "/" +
             std::to_string(amber_rows().size()) + " rows within 0.05. " + d.str();
  return o;
}

Outcome zeroshot_avg_consistency() {
  Outcome o;
  std::ostringstream d;
  for (const auto& r : zeroshot_rows()) {
    double sum = 0.0;
    for (double a : r.accuracy) sum += a;
    const double mean = sum / static_cast<double>(r.accuracy.size());
    if (std::abs(mean - r.avg) > kRoundTol) {
      o.failing.emplace_back(r.model);
      d << r.model << " mean=" << fmt("%.4f printed %.1f", mean, r.avg) << "; ";
    }
  }
  o.pass = o.failing.empty();
  o.detail = std::to_string(zeroshot_rows().size() - o.failing.size()) + "/" +
             std::to_string(zeroshot_rows().size()) + " rows within 0.05. " + d.str();
  return o;
}

// ---- loss kernels ----

double& coord(PreferenceSample& s, int i) { return i == 0 ? s.logp_pol_pos : s.logp_pol_neg; }

Outcome loss_kernels() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(20260);
  std::uniform_real_distribution<double> u(-60.0, -1.0);
  std::normal_distribution<double> d(0.0, 8.0);
  std::uniform_real_distribution<double> beta(0.05, 1.0);
  auto sample = [&] {
    const double pos = u(rng), neg = u(rng);
    return PreferenceSample{pos + d(rng), neg + d(rng), pos, neg};
  };
  constexpr double kStep = 1e-5;
  constexpr int kSamples = 1000;
  double worst_rel = 0.0;
  std::size_t checked = 0;
  for (auto v : {LossVariant::dpo, LossVariant::ipo, LossVariant::kto, LossVariant::slic,
                 LossVariant::cdpo}) {
    LossConfig cfg;
    cfg.variant = v;
    int n = 0;
    while (n < kSamples) {
      cfg.beta = beta(rng);
      const auto s = sample();
      // The hinge is not differentiable at its kink; draw again there.
      if (v == LossVariant::slic &&
          std::abs(cfg.slic_delta - cfg.beta * implicit_reward_margin(s)) < 1e-3) {
        continue;
      }
      const auto g = loss(s, cfg).grad;
      if (g[2] != 0.0 || g[3] != 0.0) o.failing.push_back(std::string(to_string(v)) + " ref grad");
      for (int k = 0; k < 2; ++k) {
        auto hi = s, lo = s;
        coord(hi, k) += kStep;
        coord(lo, k) -= kStep;
        const double fd = (loss(hi, cfg).loss - loss(lo, cfg).loss) / (2 * kStep);
        const double rel = std::abs(g[k] - fd) / std::max({1.0, std::abs(fd), std::abs(g[k])});
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-6) o.failing.push_back(std::string(to_string(v)) + " fd");
      }
      ++n;
      ++checked;
    }
  }
  const double ln2 = loss(PreferenceSample{-7.0, -9.0, -7.0, -9.0}, LossConfig{}).loss;
  if (std::abs(ln2 - std::log(2.0)) > 1e-12) o.failing.emplace_back("dpo(h=0)");
  LossConfig dpo, cdpo;
  cdpo.variant = LossVariant::cdpo;
  cdpo.label_smoothing = 0.0;
  double worst_cdpo = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    dpo.beta = cdpo.beta = beta(rng);
    const auto s = sample();
    const auto a = loss(s, dpo), b = loss(s, cdpo);
    worst_cdpo = std::max({worst_cdpo, std::abs(a.loss - b.loss), std::abs(a.grad[0] - b.grad[0]),
                           std::abs(a.grad[1] - b.grad[1])});
  }
  if (worst_cdpo > 1e-12) o.failing.emplace_back("cdpo(LS=0) != dpo");
  const double secs = seconds_since(t0);
  if (secs >= 5.0) o.failing.emplace_back("runtime");
  o.pass = o.failing.empty();
  o.detail = std::to_string(checked) + " samples x 2 policy coords, max rel err " +
             fmt("%.2e; |dpo(0) - ln2| %.1e", worst_rel, std::abs(ln2 - std::log(2.0))) +
             fmt("; max |cdpo - dpo| %.1e; %.2fs", worst_cdpo, secs);
  return o;
}

// ---- curation ----

Outcome pair_oracle() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(77);
  const PairConfig cfg;
  std::size_t images = 0, pairs = 0, captions = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto group = testing::random_caption_group(rng, "img" + std::to_string(i), 10);
    ++images;
    captions += group.size();
    const auto got = build_caption_pairs(group, cfg);
    const auto want = testing::brute_force_caption_pair(group, cfg);
    if (got != want) {
      o.failing.push_back("img" + std::to_string(i));
      continue;
    }
    if (!got) continue;
    ++pairs;
    std::map<std::string, std::size_t> words;
    for (const auto& c : group) words[c.text] = c.word_count;
    const bool margin_ok = got->margin > cfg.margin_min &&
                           got->margin == got->chosen_score.value - got->rejected_score.value;
    const bool length_ok =
        lengths_similar(words.at(got->chosen), words.at(got->rejected), cfg.length_ratio_max);
    if (!margin_ok || !length_ok) o.failing.push_back("img" + std::to_string(i) + " bounds");
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) o.failing.emplace_back("runtime");
  o.pass = o.failing.empty();
  o.detail = std::to_string(images) + " images, " + std::to_string(captions) + " captions, " +
             std::to_string(pairs) + " pairs, " + std::to_string(o.failing.size()) +
             " mismatches" + fmt("; %.2fs", secs, 0);
  return o;
}

Outcome filter_boundaries() {
  Outcome o;
  auto caption = [](std::string id, double score) {
    CaptionRecord c;
    c.caption_id = std::move(id);
    c.image_id = "img";
    c.word_count = 10;
    c.score = ClipScore{score};
    c.status = CaptionStatus::scored;
    return c;
  };
  auto question = [](std::string id, double score) {
    QARecord q;
    q.qa_id = std::move(id);
    q.image_id = "img";
    q.question = "Is there a dog?";
    q.positive = "dog";
    q.question_score = ClipScore{score};
    q.status = QAStatus::scored;
    return q;
  };
  const CurationConfig cfg;
  const auto caps = filter_captions({caption("28.0", 28.0), caption("27.99", 27.99)}, cfg);
  if (caps[0].status != CaptionStatus::kept) o.failing.emplace_back("caption 28.0");
  if (caps[1].status != CaptionStatus::dropped_score) o.failing.emplace_back("caption 27.99");
  const EmbeddingStore empty(1, {}, {});
  const ScoringContext ctx(empty, empty, {});
  const auto qs = filter_questions({question("25.0", 25.0), question("24.99", 24.99)}, ctx, cfg);
  if (qs[0].status != QAStatus::scored) o.failing.emplace_back("question 25.0");
  if (qs[1].status != QAStatus::dropped_question) o.failing.emplace_back("question 24.99");
  o.pass = o.failing.empty();
  o.detail = "caption 28.0 kept, 27.99 dropped; question 25.0 kept, 24.99 dropped";
  if (!o.pass) o.detail = "wrong outcome at a boundary";
  return o;
}

Outcome pipeline_determinism() {
  const auto t0 = Clock::now();
  Outcome o;
  testing::TempDir dir;
  const auto corpus = testing::make_corpus(dir / "corpus", 1000, 4242, 16);
  std::vector<std::string> outputs;
  for (const char* workers : {"1", "8"}) {
    const auto out = dir / (std::string("w") + workers);
    std::vector<std::string> args{"pipeline", "--worker_count", workers, "--shard_count", "16"};
    const auto paths = testing::path_args(corpus, out);
    args.insert(args.end(), paths.begin(), paths.end());
    const auto r = testing::run_cli(args);
    if (r.code != 0) {
      o.pass = false;
      o.detail = "pipeline exited " + std::to_string(r.code) + ": " + r.err;
      return o;
    }
    outputs.push_back(testing::read_file(out / "pairs.jsonl"));
    outputs.push_back(testing::read_file(out / "summary.json"));
  }
  const auto lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
  if (outputs[0] != outputs[2]) o.failing.emplace_back("pairs.jsonl");
  if (outputs[1] != outputs[3]) o.failing.emplace_back("summary.json");
  if (lines == 0) o.failing.emplace_back("no pairs");
  const double secs = seconds_since(t0);
  if (secs >= 30.0) o.failing.emplace_back("runtime");
  o.pass = o.failing.empty();
  o.detail = "1000 images, " + std::to_string(lines) + " pairs, workers 1 vs 8: " +
             (o.failing.empty() ? std::string("byte-identical") : "differs") +
             fmt("; %.2fs", secs, 0);
  return o;
}

// ---- probe ----

Outcome probe_harness() {
  Outcome o;
  constexpr auto kE = static_cast<std::size_t>(HallucinationType::existence);
  constexpr auto kA = static_cast<std::size_t>(HallucinationType::attribute);
  constexpr auto kR = static_cast<std::size_t>(HallucinationType::relationship);
  auto pc = [](std::string ref, double ll) { return ProbeCaption{"text " + ref, ll, ref}; };
  // All images point along (1, 0); "worse" is orthogonal to them, "better"
  // beats orig1 and "same" ties orig2 exactly.
  const EmbeddingStore images(2, {"i1", "i2", "i3"}, {1.f, 0.f, 1.f, 0.f, 1.f, 0.f});
  const EmbeddingStore texts(2, {"orig1", "orig2", "orig3", "worse", "better", "same"},
                             {0.9f, 0.1f, 0.6f, 0.8f, 1.f, 0.f, 0.f, 1.f, 1.f, 0.05f, 0.6f, 0.8f});
  std::vector<ProbeRecord> r(3);
  r[0].image_id = "i1";
  r[0].original = pc("orig1", -10.0);
  r[0].hallucinated[kE] = pc("worse", -9.0);
  r[0].hallucinated[kA] = pc("better", -8.0);
  r[0].hallucinated[kR] = pc("worse", -10.0);
  r[1].image_id = "i2";
  r[1].original = pc("orig2", -5.0);
  r[1].hallucinated[kE] = pc("worse", -1.0);
  r[1].hallucinated[kA] = pc("same", -2.0);
  r[2].image_id = "i3";
  r[2].original = pc("orig3", -1.0);
  r[2].hallucinated[kE] = pc("worse", -3.0);

  // Hand oracle: inversions E=2, A=2, R=0; corrected E 2/2, A 0/2, R undefined.
  const auto inv = likelihood_inversions(r);
  const auto rate = clip_correction_rate(r, images, texts);
  if (inv[kE] != 2 || inv[kA] != 2 || inv[kR] != 0) o.failing.emplace_back("inversions");
  if (!rate[kE] || *rate[kE] != 100.0) o.failing.emplace_back("existence rate");
  if (!rate[kA] || *rate[kA] != 0.0) o.failing.emplace_back("attribute rate");
  if (rate[kR]) o.failing.emplace_back("relationship rate");
  o.pass = o.failing.empty();
  o.detail =
      "fixture oracle match (inversions 2/2/0, correction 100%/0%/n.a.); the published "
      "counts and rates need model-generated captions and likelihoods and are not reproduced";
  return o;
}

Outcome full_scale_counts() {
  Outcome o;
  const fs::path golden(CLIPDPO_GOLDEN_DIR);
  const auto in = golden / "input";
  testing::TempDir dir;
  const auto r = testing::run_cli({
      "pipeline",
      "--config", (in / "config.json").string(),
      "--paths.images", (in / "images.jsonl").string(),
      "--paths.captions", (in / "captions.jsonl").string(),
      "--paths.qa", (in / "qa.jsonl").string(),
      "--paths.image_store", (in / "image_store.emb").string(),
      "--paths.text_store", (in / "text_store.emb").string(),
      "--paths.question_rules",
      (testing::source_dir() / "data/rules/question_rules.jsonl").string(),
      "--paths.category_descriptions",
      (testing::source_dir() / "data/categories/descriptions.json").string(),
      "--paths.output_dir", dir.path().string(),
  });
  if (r.code != 0) {
    o.pass = false;
    o.detail = "golden pipeline exited " + std::to_string(r.code) + ": " + r.err;
    return o;
  }
  for (const char* name : {"images.jsonl", "captions.jsonl", "qa.jsonl", "pairs.jsonl"}) {
    if (testing::read_file(dir / name) != testing::read_file(golden / "expected" / name)) {
      o.failing.emplace_back(name);
    }
  }
  o.pass = o.failing.empty();
  o.detail =
      "full-scale pair counts and model-quality tables need LVLM training and are not "
      "reproduced; substitute: golden 20-image end-to-end run " +
      std::string(o.pass ? "matches" : "differs") + " plus the invariant checks above";
  return o;
}

// ---- embeddings ----

Outcome store_roundtrip_and_score_matrix() {
  const auto t0 = Clock::now();
  Outcome o;
  testing::TempDir dir;
  std::mt19937_64 rng(64);
  constexpr std::uint32_t kDim = 48;
  std::vector<std::string> ids;
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < 128; ++i) {
    ids.push_back("e" + std::to_string(i));
    rows.push_back(testing::random_unit(rng, kDim));
  }
  testing::write_store(dir / "a.emb", kDim, ids, rows);
  const auto a = EmbeddingStore::load(dir / "a.emb");
  a.save(dir / "b.emb");
  const auto b = EmbeddingStore::load(dir / "b.emb");
  b.save(dir / "c.emb");
  if (a.ids() != ids || b.ids() != ids) o.failing.emplace_back("ids");
  for (const auto& id : ids) {
    const auto ra = a.row(id), rb = b.row(id);
    if (!std::equal(ra.begin(), ra.end(), rb.begin(), rb.end())) o.failing.push_back(id);
  }
  if (testing::read_file(dir / "b.emb") != testing::read_file(dir / "c.emb")) {
    o.failing.emplace_back("save bytes");
  }

  std::vector<EmbeddingVector> img, txt;
  for (int i = 0; i < 64; ++i) img.push_back(b.vector(ids[i]));
  for (int i = 64; i < 128; ++i) txt.push_back(b.vector(ids[i]));
  std::size_t mismatches = 0;
  for (unsigned workers : {1u, 4u}) {
    const auto m = score_matrix(img, txt, workers);
    for (std::size_t i = 0; i < 64; ++i) {
      for (std::size_t j = 0; j < 64; ++j) {
        if (m.at(i, j).value != clip_score(img[i], txt[j]).value) ++mismatches;
      }
    }
  }
  if (mismatches) o.failing.emplace_back("score_matrix");
  const double secs = seconds_since(t0);
  if (secs >= 5.0) o.failing.emplace_back("runtime");
  o.pass = o.failing.empty();
  o.detail = "128-row store save/load exact; 64x64 matrix vs scalar, workers 1 and 4: " +
             std::to_string(mismatches) + " mismatches" + fmt("; %.2fs", secs, 0);
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  // Rows expected to fail because the printed values are inconsistent.
  std::set<std::string> known_red;
};

}  // namespace
}  // namespace clipdpo::acceptance

int main() {
  using namespace clipdpo::acceptance;
  const std::vector<Criterion> criteria{
      {"amber_arithmetic", amber_arithmetic, {}},
      {"f1_consistency", f1_consistency, {"LLaVA-1.5 7B"}},
      {"zeroshot_avg_consistency",
       zeroshot_avg_consistency,
       {"LLaVA-1.5", "LLaVA-1.5 + HA-DPO", "LLaVA-1.5 + clipdpo", "MobileVLM-v2 1.7B",
        "MobileVLM-v2 3B"}},
      {"loss_kernels", loss_kernels, {}},
      {"pair_oracle", pair_oracle, {}},
      {"filter_boundaries", filter_boundaries, {}},
      {"pipeline_determinism", pipeline_determinism, {}},
      {"probe_harness", probe_harness, {}},
      {"full_scale_counts", full_scale_counts, {}},
      {"store_roundtrip_and_score_matrix", store_roundtrip_and_score_matrix, {}},
  };
  int unexpected = 0, passed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    if (o.pass) {
      ++passed;
      if (!c.known_red.empty()) {
        std::printf("  unexpected: pinned failures no longer reproduce\n");
        ++unexpected;
      }
      continue;
    }
    const std::set<std::string> got(o.failing.begin(), o.failing.end());
    if (c.known_red.empty() || got != c.known_red) {
      ++unexpected;
    } else {
      std::printf("  known: the printed table values are not mutually consistent\n");
    }
  }
  std::printf("%d/%zu criteria pass, %d unexpected\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
