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

// Span extraction loss on raw logits: label-smoothed start/end
// cross-entropy, a no-answer hinge margin, an expected-length penalty and
// short-span weighting, with analytic gradients.
//
// For the cross-entropy terms a virtual null position is prepended to both
// logit vectors (index 0, logit = null_score); unanswerable examples put the
// gold target there, answerable ones at 1 + position.

#ifndef KEYCOV_LOSS_H_
#define KEYCOV_LOSS_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "keycov/backend.h"
#include "keycov/corpus.h"
#include "keycov/random.h"

namespace keycov {

enum class LossTask { kExtraction, kCanonicalization };

struct LossConfig {
  double epsilon = 0.08;
  double margin = 0.10;
  double margin_weight = 0.01;
  double length_weight = 0.1;
  double length_scale = 2.0;
  double short_weight = 2.0;
  int short_threshold = 10;
  LossTask task = LossTask::kExtraction;

  static LossConfig Extraction();
  static LossConfig Canonicalization();
  static LossConfig ForTask(LossTask task);
  void Validate() const;
};

struct ScalarWithGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// Cross-entropy between softmax(logits) and a target with 1 - epsilon on
// gold plus epsilon / L on every position. Gradient is softmax - target.
ScalarWithGrad SmoothedSpanCe(const std::vector<double>& logits, int64_t gold, double epsilon);

struct MarginResult {
  double value = 0.0;
  std::vector<double> grad_start;
  std::vector<double> grad_end;
  double grad_null = 0.0;
  // margin - (separation); the hinge is active when slack > 0.
  double slack = 0.0;
};

// gold is [start, end) with end exclusive; nullopt means unanswerable.
// Answerable: max(0, margin - (start[s] + end[e-1] - null)). Unanswerable:
// max(0, margin - (null - best span score over s <= e)).
MarginResult NoAnswerMargin(const ChunkLogits& logits, const std::optional<Span>& gold,
                            double margin);

// Best start[s] + end[e] over s <= e, with its argmax (first in row-major
// order). Requires non-empty logits.
struct BestSpan {
  int64_t start = 0;
  int64_t end_inclusive = 0;
  double score = 0.0;
  double runner_up_gap = 0.0;  // best minus second-best score (inf if none)
};
BestSpan BestSpanScore(const std::vector<double>& start_logits,
                       const std::vector<double>& end_logits);

struct LengthResult {
  double value = 0.0;
  std::vector<double> grad_start;
  std::vector<double> grad_end;
  double expected_length = 0.0;
};

// softplus((E[end] - E[start] + 1 - gold_length) / scale) with E under
// independent softmaxes of start and end logits.
LengthResult LengthPenalty(const std::vector<double>& start_logits,
                           const std::vector<double>& end_logits, double gold_length,
                           double scale);

double ExampleWeight(const std::optional<Span>& gold, int short_threshold, double short_weight);

struct LossBreakdown {
  double ce_start = 0.0;
  double ce_end = 0.0;
  double margin_term = 0.0;
  double length_term = 0.0;
  double weight_factor = 1.0;
  double total = 0.0;
  std::vector<double> grad_start;
  std::vector<double> grad_end;
  double grad_null = 0.0;
};

// total = weight_factor * (ce_start + ce_end) + margin_weight * margin_term
//         + length_weight * length_term.
// The length term is zero for unanswerable examples. Throws ValidationError
// for non-finite logits or a gold span outside the logits.
LossBreakdown TotalLoss(const ChunkLogits& logits, const std::optional<Span>& gold,
                        const LossConfig& config);

struct LossInstance {
  ChunkLogits logits;
  std::optional<Span> gold;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  int64_t coordinates_checked = 0;
  bool skipped = false;  // instance sits within kink_tolerance of a kink
};

inline constexpr double kKinkTolerance = 1e-3;
// Relative error is |a - n| / max(|a|, |n|, kRelativeErrorFloor).
inline constexpr double kRelativeErrorFloor = 1e-4;

// Compares TotalLoss gradients with central differences on every logit and
// the null score.
GradCheckResult GradCheck(const LossInstance& instance, const LossConfig& config,
                          double h = 1e-5);

// Random instance: L uniform in [1, max_len], logits N(0, scale^2), gold
// unanswerable with probability null_probability.
LossInstance RandomLossInstance(Rng& rng, int max_len, double scale = 2.0,
                                double null_probability = 0.25);

std::string_view LossTaskName(LossTask task);

}  // namespace keycov

#endif  // KEYCOV_LOSS_H_
