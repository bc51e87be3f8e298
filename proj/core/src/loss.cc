// Copyright 2026 The keycov Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "keycov/loss.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "keycov/errors.h"

namespace keycov {

LossConfig LossConfig::Extraction() { return LossConfig{}; }

LossConfig LossConfig::Canonicalization() {
  LossConfig c;
  c.epsilon = 0.1;
  c.margin = 0.15;
  c.margin_weight = 0.05;
  c.short_weight = 2.5;
  c.task = LossTask::kCanonicalization;
  return c;
}

LossConfig LossConfig::ForTask(LossTask task) {
  return task == LossTask::kCanonicalization ? Canonicalization() : Extraction();
}

void LossConfig::Validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("loss: epsilon must lie in [0, 1]");
  if (!(margin >= 0.0)) throw ConfigError("loss: margin must be non-negative");
  if (!(margin_weight >= 0.0 && length_weight >= 0.0)) {
    throw ConfigError("loss: term weights must be non-negative");
  }
  if (!(length_scale > 0.0)) throw ConfigError("loss: length_scale must be positive");
  if (!(short_weight > 0.0)) throw ConfigError("loss: short_weight must be positive");
  if (short_threshold < 0) throw ConfigError("loss: short_threshold must be non-negative");
}

std::string_view LossTaskName(LossTask task) {
  return task == LossTask::kCanonicalization ? "canonicalization" : "extraction";
}

namespace {

std::vector<double> Softmax(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

double Softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void RequireFinite(const ChunkLogits& logits) {
  if (logits.start_logits.size() != logits.end_logits.size()) {
    throw ValidationError("start and end logits differ in length");
  }
  logits.Validate(logits.start_logits.size());
}

}  // namespace

ScalarWithGrad SmoothedSpanCe(const std::vector<double>& logits, int64_t gold, double epsilon) {
  const auto len = static_cast<int64_t>(logits.size());
  if (gold < 0 || gold >= len) {
    throw ValidationError("gold index " + std::to_string(gold) + " outside " +
                          std::to_string(len) + " logits");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - peak);
  const double log_z = peak + std::log(z);

  ScalarWithGrad out;
  out.grad.resize(len);
  const double uniform = epsilon / static_cast<double>(len);
  for (int64_t i = 0; i < len; ++i) {
    const double target = uniform + (i == gold ? 1.0 - epsilon : 0.0);
    const double log_p = logits[i] - log_z;
    out.value -= target * log_p;
    out.grad[i] = std::exp(log_p) - target;
  }
  return out;
}

BestSpan BestSpanScore(const std::vector<double>& start_logits,
                       const std::vector<double>& end_logits) {
  const auto len = static_cast<int64_t>(start_logits.size());
  if (len == 0 || end_logits.size() != start_logits.size()) {
    throw ValidationError("best span needs equal, non-empty logit vectors");
  }
  // Quadratic scan; L is small for every caller that needs runner_up_gap.
  BestSpan best;
  best.score = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (int64_t s = 0; s < len; ++s) {
    for (int64_t e = s; e < len; ++e) {
      const double score = start_logits[s] + end_logits[e];
      if (score > best.score) {
        second = best.score;
        best.score = score;
        best.start = s;
        best.end_inclusive = e;
      } else if (score > second) {
        second = score;
      }
    }
  }
  best.runner_up_gap = best.score - second;
  return best;
}

MarginResult NoAnswerMargin(const ChunkLogits& logits, const std::optional<Span>& gold,
                            double margin) {
  const auto len = static_cast<int64_t>(logits.start_logits.size());
  MarginResult out;
  out.grad_start.assign(len, 0.0);
  out.grad_end.assign(len, 0.0);
  if (gold) {
    if (gold->start < 0 || gold->end > len || gold->start >= gold->end) {
      throw ValidationError("gold span outside logits");
    }
    const int64_t s = gold->start;
    const int64_t e = gold->end - 1;
    out.slack = margin - (logits.start_logits[s] + logits.end_logits[e] - logits.null_score);
    if (out.slack > 0) {
      out.value = out.slack;
      out.grad_start[s] -= 1.0;
      out.grad_end[e] -= 1.0;
      out.grad_null += 1.0;
    }
    return out;
  }
  if (len == 0) {
    out.slack = -std::numeric_limits<double>::infinity();
    return out;
  }
  const BestSpan best = BestSpanScore(logits.start_logits, logits.end_logits);
  out.slack = margin - (logits.null_score - best.score);
  if (out.slack > 0) {
    out.value = out.slack;
    out.grad_start[best.start] += 1.0;
    out.grad_end[best.end_inclusive] += 1.0;
    out.grad_null -= 1.0;
  }
  return out;
}

LengthResult LengthPenalty(const std::vector<double>& start_logits,
                           const std::vector<double>& end_logits, double gold_length,
                           double scale) {
  const size_t len = start_logits.size();
  LengthResult out;
  out.grad_start.assign(len, 0.0);
  out.grad_end.assign(len, 0.0);
  if (len == 0) return out;
  const std::vector<double> p = Softmax(start_logits);
  const std::vector<double> q = Softmax(end_logits);
  double e_start = 0.0;
  double e_end = 0.0;
  for (size_t i = 0; i < len; ++i) {
    e_start += p[i] * static_cast<double>(i);
    e_end += q[i] * static_cast<double>(i);
  }
  out.expected_length = e_end - e_start + 1.0;
  const double x = (out.expected_length - gold_length) / scale;
  out.value = Softplus(x);
  const double dx = Sigmoid(x) / scale;
  for (size_t i = 0; i < len; ++i) {
    const double pos = static_cast<double>(i);
    out.grad_end[i] = dx * q[i] * (pos - e_end);
    out.grad_start[i] = -dx * p[i] * (pos - e_start);
  }
  return out;
}

double ExampleWeight(const std::optional<Span>& gold, int short_threshold, double short_weight) {
  if (gold && gold->length() <= short_threshold) return short_weight;
  return 1.0;
}

LossBreakdown TotalLoss(const ChunkLogits& logits, const std::optional<Span>& gold,
                        const LossConfig& config) {
  RequireFinite(logits);
  const auto len = static_cast<int64_t>(logits.start_logits.size());
  if (gold && (gold->start < 0 || gold->end > len || gold->start >= gold->end)) {
    throw ValidationError("gold span [" + std::to_string(gold->start) + "," +
                          std::to_string(gold->end) + ") outside " + std::to_string(len) +
                          " logits");
  }

  std::vector<double> aug_start;
  std::vector<double> aug_end;
  aug_start.reserve(len + 1);
  aug_end.reserve(len + 1);
  aug_start.push_back(logits.null_score);
  aug_end.push_back(logits.null_score);
  aug_start.insert(aug_start.end(), logits.start_logits.begin(), logits.start_logits.end());
  aug_end.insert(aug_end.end(), logits.end_logits.begin(), logits.end_logits.end());

  const ScalarWithGrad ce_s = SmoothedSpanCe(aug_start, gold ? gold->start + 1 : 0, config.epsilon);
  const ScalarWithGrad ce_e = SmoothedSpanCe(aug_end, gold ? gold->end : 0, config.epsilon);
  const MarginResult m = NoAnswerMargin(logits, gold, config.margin);
  LengthResult lp;
  if (gold) {
    lp = LengthPenalty(logits.start_logits, logits.end_logits,
                       static_cast<double>(gold->length()), config.length_scale);
  } else {
    lp.grad_start.assign(len, 0.0);
    lp.grad_end.assign(len, 0.0);
  }

  LossBreakdown out;
  out.ce_start = ce_s.value;
  out.ce_end = ce_e.value;
  out.margin_term = m.value;
  out.length_term = lp.value;
  out.weight_factor = ExampleWeight(gold, config.short_threshold, config.short_weight);
  out.total = out.weight_factor * (out.ce_start + out.ce_end) + config.margin_weight * m.value +
              config.length_weight * lp.value;
  out.grad_start.resize(len);
  out.grad_end.resize(len);
  for (int64_t i = 0; i < len; ++i) {
    out.grad_start[i] = out.weight_factor * ce_s.grad[i + 1] +
                        config.margin_weight * m.grad_start[i] +
                        config.length_weight * lp.grad_start[i];
    out.grad_end[i] = out.weight_factor * ce_e.grad[i + 1] + config.margin_weight * m.grad_end[i] +
                      config.length_weight * lp.grad_end[i];
  }
  out.grad_null =
      out.weight_factor * (ce_s.grad[0] + ce_e.grad[0]) + config.margin_weight * m.grad_null;
  return out;
}

GradCheckResult GradCheck(const LossInstance& instance, const LossConfig& config, double h) {
  GradCheckResult result;
  const ChunkLogits& base = instance.logits;
  const MarginResult m = NoAnswerMargin(base, instance.gold, config.margin);
  if (std::abs(m.slack) < kKinkTolerance) {
    result.skipped = true;
    return result;
  }
  if (!instance.gold && m.slack > 0 && !base.start_logits.empty()) {
    const BestSpan best = BestSpanScore(base.start_logits, base.end_logits);
    if (best.runner_up_gap < kKinkTolerance) {
      result.skipped = true;
      return result;
    }
  }

  const LossBreakdown analytic = TotalLoss(base, instance.gold, config);
  auto loss_at = [&](const ChunkLogits& l) { return TotalLoss(l, instance.gold, config).total; };
  auto check = [&](double a, double n) {
    const double denom = std::max({std::abs(a), std::abs(n), kRelativeErrorFloor});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - n) / denom);
    ++result.coordinates_checked;
  };

  ChunkLogits probe = base;
  for (size_t i = 0; i < base.start_logits.size(); ++i) {
    probe.start_logits[i] = base.start_logits[i] + h;
    const double up = loss_at(probe);
    probe.start_logits[i] = base.start_logits[i] - h;
    const double down = loss_at(probe);
    probe.start_logits[i] = base.start_logits[i];
    check(analytic.grad_start[i], (up - down) / (2 * h));
  }
  for (size_t i = 0; i < base.end_logits.size(); ++i) {
    probe.end_logits[i] = base.end_logits[i] + h;
    const double up = loss_at(probe);
    probe.end_logits[i] = base.end_logits[i] - h;
    const double down = loss_at(probe);
    probe.end_logits[i] = base.end_logits[i];
    check(analytic.grad_end[i], (up - down) / (2 * h));
  }
  probe.null_score = base.null_score + h;
  const double up = loss_at(probe);
  probe.null_score = base.null_score - h;
  const double down = loss_at(probe);
  check(analytic.grad_null, (up - down) / (2 * h));
  return result;
}

LossInstance RandomLossInstance(Rng& rng, int max_len, double scale, double null_probability) {
  LossInstance inst;
  const auto len = rng.UniformInt(1, std::max(1, max_len));
  inst.logits.start_logits.resize(len);
  inst.logits.end_logits.resize(len);
  for (auto& x : inst.logits.start_logits) x = scale * rng.Normal();
  for (auto& x : inst.logits.end_logits) x = scale * rng.Normal();
  inst.logits.null_score = scale * rng.Normal();
  if (!rng.Bernoulli(null_probability)) {
    const int64_t s = rng.UniformInt(0, len - 1);
    const int64_t e = rng.UniformInt(s + 1, len);
    inst.gold = Span{s, e};
  }
  return inst;
}

}  // namespace keycov
