// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/losses.hpp"

#include <cmath>
#include <string>

#include "clipdpo/error.hpp"
#include "jsonl.hpp"

namespace clipdpo {

std::string_view to_string(LossVariant v) noexcept {
  switch (v) {
    case LossVariant::dpo: return "dpo";
    case LossVariant::ipo: return "ipo";
    case LossVariant::kto: return "kto";
    case LossVariant::slic: return "slic";
    case LossVariant::cdpo: return "cdpo";
  }
  return "dpo";
}

std::optional<LossVariant> parse_loss_variant(std::string_view s) noexcept {
  for (auto v : {LossVariant::dpo, LossVariant::ipo, LossVariant::kto, LossVariant::slic,
                 LossVariant::cdpo}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void LossConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (!(beta > 0.0) || !std::isfinite(beta)) bad("loss.beta must be a positive finite number");
  if (!(label_smoothing >= 0.0 && label_smoothing < 0.5)) {
    bad("loss.label_smoothing must be in [0, 0.5)");
  }
  if (!(slic_delta > 0.0) || !std::isfinite(slic_delta)) bad("loss.slic_delta must be > 0");
  if (!(kto_lambda_pos > 0.0) || !(kto_lambda_neg > 0.0) || !std::isfinite(kto_lambda_pos) ||
      !std::isfinite(kto_lambda_neg)) {
    bad("loss.kto_lambda_pos / kto_lambda_neg must be > 0");
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

namespace {

void check_finite(const PreferenceSample& s) {
  if (!std::isfinite(s.logp_pol_pos) || !std::isfinite(s.logp_pol_neg) ||
      !std::isfinite(s.logp_ref_pos) || !std::isfinite(s.logp_ref_neg)) {
    throw Error(ErrorCode::NonFinite, "preference sample has a non-finite log-probability");
  }
}

// sigma'(x) = sigma(x) (1 - sigma(x)) = sigma(x) sigma(-x)
double sigmoid_slope(double x) noexcept { return sigmoid(x) * sigmoid(-x); }

LossOutput evaluate(const PreferenceSample& s, const LossConfig& cfg, double kto_z) {
  check_finite(s);
  const double h = implicit_reward_margin(s);
  const double b = cfg.beta;
  LossOutput out;
  // Pairwise variants depend on the sample only through h, with
  // dh/dlogp_pol_pos = 1 and dh/dlogp_pol_neg = -1.
  double dl_dh = 0.0;
  switch (cfg.variant) {
    case LossVariant::dpo:
      out.loss = softplus(-b * h);
      dl_dh = -b * sigmoid(-b * h);
      break;
    case LossVariant::cdpo: {
      const double ls = cfg.label_smoothing;
      out.loss = (1.0 - ls) * softplus(-b * h) + ls * softplus(b * h);
      dl_dh = -(1.0 - ls) * b * sigmoid(-b * h) + ls * b * sigmoid(b * h);
      break;
    }
    case LossVariant::ipo: {
      const double d = h - 1.0 / (2.0 * b);
      out.loss = d * d;
      dl_dh = 2.0 * d;
      break;
    }
    case LossVariant::slic: {
      const double slack = cfg.slic_delta - b * h;
      out.loss = std::max(0.0, slack);
      dl_dh = slack > 0.0 ? -b : 0.0;
      break;
    }
    case LossVariant::kto: {
      const double r_pos = s.logp_pol_pos - s.logp_ref_pos;
      const double r_neg = s.logp_pol_neg - s.logp_ref_neg;
      const double x_pos = b * (r_pos - kto_z);
      const double x_neg = b * (kto_z - r_neg);
      out.loss = cfg.kto_lambda_pos * sigmoid(-x_pos) + cfg.kto_lambda_neg * sigmoid(-x_neg);
      out.grad[0] = -cfg.kto_lambda_pos * b * sigmoid_slope(x_pos);
      out.grad[1] = cfg.kto_lambda_neg * b * sigmoid_slope(x_neg);
      break;
    }
  }
  if (cfg.variant != LossVariant::kto) {
    out.grad[0] = dl_dh;
    out.grad[1] = -dl_dh;
  }
  if (!std::isfinite(out.loss) || !std::isfinite(out.grad[0]) || !std::isfinite(out.grad[1])) {
    throw Error(ErrorCode::NonFinite, "loss evaluated to a non-finite value");
  }
  return out;
}

}  // namespace

double implicit_reward_margin(const PreferenceSample& s) {
  check_finite(s);
  const double h = (s.logp_pol_pos - s.logp_ref_pos) - (s.logp_pol_neg - s.logp_ref_neg);
  if (!std::isfinite(h)) throw Error(ErrorCode::NonFinite, "reward margin overflowed");
  return h;
}

LossOutput loss(const PreferenceSample& s, const LossConfig& cfg) {
  cfg.validate();
  return evaluate(s, cfg, 0.0);
}

BatchLoss batch_loss(std::span<const PreferenceSample> samples, const LossConfig& cfg,
                     std::optional<double> kto_reference_point) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "batch_loss needs at least one sample");
  cfg.validate();
  const double z = kto_reference_point.value_or(0.0);
  if (!std::isfinite(z)) throw Error(ErrorCode::NonFinite, "KTO reference point must be finite");
  BatchLoss out;
  out.per_sample.reserve(samples.size());
  double sum = 0.0;
  for (const auto& s : samples) {
    out.per_sample.push_back(evaluate(s, cfg, z));
    sum += out.per_sample.back().loss;
  }
  out.mean_loss = sum / static_cast<double>(samples.size());
  return out;
}

std::vector<SampleRecord> load_preference_samples(const std::filesystem::path& path) {
  using namespace jsonl;
  std::vector<SampleRecord> out;
  for_each_line(path, [&](const json& o, std::size_t line) {
    SampleRecord r;
    r.sample_id = get_opt_string(o, "sample_id", line).value_or("");
    auto field = [&](const char* key) {
      auto it = o.find(key);
      if (it == o.end()) schema_fail(std::string("missing field '") + key + "'", line);
      if (!it->is_number()) schema_fail(std::string("field '") + key + "' must be a number", line);
      return it->get<double>();
    };
    r.sample = {field("logp_pol_pos"), field("logp_pol_neg"), field("logp_ref_pos"),
                field("logp_ref_neg")};
    check_finite(r.sample);
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace clipdpo
