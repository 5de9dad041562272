// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Preference-optimisation loss kernels over caller-supplied sequence
// log-probabilities, with analytic gradients.
//
// With h = (logp_pol_pos - logp_ref_pos) - (logp_pol_neg - logp_ref_neg):
//
//   dpo   -log sigmoid(beta h)                              Rafailov et al. 2023
//   cdpo  (1-ls)(-log sigmoid(beta h)) + ls(-log sigmoid(-beta h))
//                                                           Mitchell 2023 (conservative DPO)
//   ipo   (h - 1/(2 beta))^2                                Azar et al. 2023
//   slic  max(0, delta - beta h)                            Zhao et al. 2023 (SLiC-HF hinge)
//   kto   l+ (1 - sigmoid(beta (r+ - z))) + l- (1 - sigmoid(beta (z - r-)))
//         with r+/- the policy/reference log-ratios and     Ethayarajh et al. 2024
//         reference point z (0 for a single pair)
//
// The reference policy is frozen: its gradient entries are always zero.
// All arithmetic is double precision.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clipdpo {

// Sequence-level log-likelihoods. Any finite values are accepted; sums of
// token log-probs are <= 0 in practice but that is not enforced.
struct PreferenceSample {
  double logp_pol_pos = 0.0;
  double logp_pol_neg = 0.0;
  double logp_ref_pos = 0.0;
  double logp_ref_neg = 0.0;
};

enum class LossVariant { dpo, ipo, kto, slic, cdpo };

std::string_view to_string(LossVariant v) noexcept;
std::optional<LossVariant> parse_loss_variant(std::string_view s) noexcept;

struct LossConfig {
  LossVariant variant = LossVariant::dpo;
  double beta = 0.1;
  double label_smoothing = 0.1;
  double slic_delta = 1.0;
  double kto_lambda_pos = 1.0;
  double kto_lambda_neg = 1.0;

  // Throws InvalidConfig.
  void validate() const;
};

struct LossOutput {
  double loss = 0.0;
  // d loss / d (logp_pol_pos, logp_pol_neg, logp_ref_pos, logp_ref_neg).
  std::array<double, 4> grad{};
};

// Throws NonFinite.
double implicit_reward_margin(const PreferenceSample& s);

// Throws NonFinite or InvalidConfig. KTO uses z = 0.
LossOutput loss(const PreferenceSample& s, const LossConfig& cfg);

struct BatchLoss {
  double mean_loss = 0.0;
  std::vector<LossOutput> per_sample;
};

// Mean of per-sample losses accumulated in index order. `kto_reference_point`
// overrides z for the KTO variant. Throws EmptyBatch, NonFinite, InvalidConfig.
BatchLoss batch_loss(std::span<const PreferenceSample> samples, const LossConfig& cfg,
                     std::optional<double> kto_reference_point = std::nullopt);

struct SampleRecord {
  std::string sample_id;  // empty when the file omits it
  PreferenceSample sample;
};

// JSON lines with logp_pol_pos, logp_pol_neg, logp_ref_pos, logp_ref_neg and
// an optional sample_id. Throws IoError, SchemaError, NonFinite.
std::vector<SampleRecord> load_preference_samples(const std::filesystem::path& path);

// Numerically stable helpers, exposed for tests and reports.
double sigmoid(double x) noexcept;
double softplus(double x) noexcept;  // log(1 + exp(x))

}  // namespace clipdpo
