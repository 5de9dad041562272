// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/losses.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "clipdpo/error.hpp"
#include "test_support.hpp"

namespace clipdpo {
namespace {

constexpr LossVariant kAll[] = {LossVariant::dpo, LossVariant::ipo, LossVariant::kto,
                                LossVariant::slic, LossVariant::cdpo};

PreferenceSample random_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-60.0, -1.0);
  std::normal_distribution<double> d(0.0, 8.0);
  const double pos = u(rng), neg = u(rng);
  return {pos + d(rng), neg + d(rng), pos, neg};
}

double& field(PreferenceSample& s, int i) {
  switch (i) {
    case 0: return s.logp_pol_pos;
    case 1: return s.logp_pol_neg;
    case 2: return s.logp_ref_pos;
    default: return s.logp_ref_neg;
  }
}

TEST(Losses, DpoAtZeroMarginIsLn2) {
  const PreferenceSample s{-10.0, -12.0, -10.0, -12.0};
  EXPECT_NEAR(loss(s, LossConfig{}).loss, std::log(2.0), 1e-12);
  const auto g = loss(s, LossConfig{}).grad;
  EXPECT_NEAR(g[0], -0.05, 1e-15);
  EXPECT_NEAR(g[1], 0.05, 1e-15);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_EQ(g[3], 0.0);
}

TEST(Losses, HandComputedValues) {
  // h = (-1 - -2) - (-5 - -3) = 3
  const PreferenceSample s{-1.0, -5.0, -2.0, -3.0};
  EXPECT_DOUBLE_EQ(implicit_reward_margin(s), 3.0);
  LossConfig c;
  c.beta = 0.5;
  c.variant = LossVariant::dpo;
  EXPECT_NEAR(loss(s, c).loss, std::log1p(std::exp(-1.5)), 1e-15);
  c.variant = LossVariant::ipo;
  EXPECT_NEAR(loss(s, c).loss, 4.0, 1e-15);  // (3 - 1)^2
  c.variant = LossVariant::slic;
  EXPECT_EQ(loss(s, c).loss, 0.0);  // max(0, 1 - 1.5)
  c.slic_delta = 2.0;
  EXPECT_NEAR(loss(s, c).loss, 0.5, 1e-15);
  c.variant = LossVariant::kto;
  // r+ = 1, r- = -2; z = 0
  const double want = 1.0 - sigmoid(0.5) + 1.0 - sigmoid(1.0);
  EXPECT_NEAR(loss(s, c).loss, want, 1e-15);
  c.variant = LossVariant::cdpo;
  c.label_smoothing = 0.2;
  EXPECT_NEAR(loss(s, c).loss, 0.8 * softplus(-1.5) + 0.2 * softplus(1.5), 1e-15);
}

TEST(Losses, CdpoWithoutSmoothingIsDpo) {
  std::mt19937_64 rng(2);
  LossConfig dpo, cdpo;
  cdpo.variant = LossVariant::cdpo;
  cdpo.label_smoothing = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_sample(rng);
    const auto a = loss(s, dpo), b = loss(s, cdpo);
    EXPECT_NEAR(a.loss, b.loss, 1e-12);
    EXPECT_NEAR(a.grad[0], b.grad[0], 1e-12);
  }
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  constexpr double kStep = 1e-5;
  for (auto v : kAll) {
    LossConfig cfg;
    cfg.variant = v;
    cfg.beta = 0.3;
    for (int i = 0; i < 300; ++i) {
      auto s = random_sample(rng);
      if (v == LossVariant::slic &&
          std::abs(cfg.slic_delta - cfg.beta * implicit_reward_margin(s)) < 1e-3) {
        continue;  // hinge kink
      }
      const auto g = loss(s, cfg).grad;
      // The reference policy is frozen, so only the policy entries are differentiated.
      for (int k = 0; k < 2; ++k) {
        auto hi = s, lo = s;
        field(hi, k) += kStep;
        field(lo, k) -= kStep;
        const double fd = (loss(hi, cfg).loss - loss(lo, cfg).loss) / (2 * kStep);
        EXPECT_NEAR(g[k], fd, 1e-6 * std::max(1.0, std::abs(fd)))
            << to_string(v) << " sample " << i << " coord " << k;
      }
      EXPECT_EQ(g[2], 0.0);
      EXPECT_EQ(g[3], 0.0);
    }
  }
}

TEST(Losses, PairwiseVariantsDependOnlyOnMargin) {
  std::mt19937_64 rng(4);
  for (auto v : {LossVariant::dpo, LossVariant::ipo, LossVariant::slic, LossVariant::cdpo}) {
    LossConfig cfg;
    cfg.variant = v;
    for (int i = 0; i < 100; ++i) {
      auto s = random_sample(rng);
      auto shifted = s;
      shifted.logp_pol_pos += 3.0;
      shifted.logp_ref_pos += 3.0;
      EXPECT_NEAR(loss(s, cfg).loss, loss(shifted, cfg).loss, 1e-12);
      EXPECT_DOUBLE_EQ(loss(s, cfg).grad[0], -loss(s, cfg).grad[1]);
    }
  }
}

TEST(Losses, DpoDecreasesWithMargin) {
  LossConfig cfg;
  double prev = INFINITY;
  for (double h = -50; h <= 50; h += 0.5) {
    const double l = loss({h, 0.0, 0.0, 0.0}, cfg).loss;
    EXPECT_LT(l, prev);
    EXPECT_GT(l, 0.0);
    prev = l;
  }
  // Stable at extreme margins.
  EXPECT_NEAR(loss({-1e5, 0, 0, 0}, cfg).loss, 1e4, 1e-6);
  EXPECT_GE(loss({1e5, 0, 0, 0}, cfg).loss, 0.0);  // underflows to 0, never negative
}

TEST(Losses, BatchMeanAndKtoReference) {
  std::mt19937_64 rng(5);
  std::vector<PreferenceSample> s;
  for (int i = 0; i < 17; ++i) s.push_back(random_sample(rng));
  LossConfig cfg;
  cfg.variant = LossVariant::kto;
  const auto b = batch_loss(s, cfg);
  double sum = 0.0;
  for (const auto& x : s) sum += loss(x, cfg).loss;
  EXPECT_DOUBLE_EQ(b.mean_loss, sum / 17.0);
  EXPECT_EQ(b.per_sample.size(), 17u);
  EXPECT_NE(batch_loss(s, cfg, 1.5).mean_loss, b.mean_loss);
  EXPECT_DOUBLE_EQ(batch_loss(s, cfg, 0.0).mean_loss, b.mean_loss);
  EXPECT_THROW(batch_loss({}, cfg), Error);
}

TEST(Losses, ConfigAndInputValidation) {
  LossConfig cfg;
  cfg.beta = 0.0;
  EXPECT_THROW(loss({}, cfg), Error);
  cfg = {};
  cfg.label_smoothing = 0.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  EXPECT_THROW(loss({NAN, 0, 0, 0}, cfg), Error);
  EXPECT_THROW(loss({INFINITY, 0, 0, 0}, cfg), Error);
  for (auto v : kAll) EXPECT_EQ(parse_loss_variant(to_string(v)), v);
  EXPECT_FALSE(parse_loss_variant("orpo"));
}

TEST(Losses, LoadSamples) {
  testing::TempDir dir;
  testing::write_file(dir / "s.jsonl",
                      "{\"sample_id\":\"a\",\"logp_pol_pos\":-1,\"logp_pol_neg\":-2,"
                      "\"logp_ref_pos\":-1.5,\"logp_ref_neg\":-2.5}\n"
                      "{\"logp_pol_pos\":-1,\"logp_pol_neg\":-2,\"logp_ref_pos\":-1,"
                      "\"logp_ref_neg\":-2}\n");
  const auto r = load_preference_samples(dir / "s.jsonl");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].sample_id, "a");
  EXPECT_EQ(r[1].sample_id, "");
  EXPECT_DOUBLE_EQ(r[0].sample.logp_ref_neg, -2.5);
  testing::write_file(dir / "bad.jsonl", "{\"logp_pol_pos\":-1}\n");
  EXPECT_THROW(load_preference_samples(dir / "bad.jsonl"), Error);
}

}  // namespace
}  // namespace clipdpo
