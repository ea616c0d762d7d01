/*
 * Copyright 2026 The selqa Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Source selection and evaluation metrics.
//
// All sorts break confidence ties by record id, then by input position, so
// every metric is a deterministic function of its input.

#ifndef SELQA_SELECT_EVAL_H_
#define SELQA_SELECT_EVAL_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selqa/qa_core.h"

namespace selqa {

// One scored prediction for calibration metrics.
struct Outcome {
  double confidence = 0.0;
  bool correct = false;
  std::string id;  // tie-break key
};

enum class Criterion { kLikelihood, kAnswerability, kConsistency, kEnsemble };

inline constexpr Criterion kAllCriteria[] = {
    Criterion::kLikelihood, Criterion::kAnswerability,
    Criterion::kConsistency, Criterion::kEnsemble};

std::string_view CriterionName(Criterion criterion);  // "likelihood", ...
Criterion ParseCriterion(std::string_view name);

// Per-criterion confidences of one prediction; a criterion is absent when the
// inputs it needs were not supplied.
struct CriterionScores {
  std::optional<double> likelihood;
  std::optional<double> answerability;
  std::optional<double> consistency;
  std::optional<double> ensemble;

  std::optional<double> Find(Criterion criterion) const;
  // Throws ValidationError when the criterion has no score.
  double Get(Criterion criterion) const;
};

struct ScoredPrediction {
  std::string answer;
  CriterionScores scores;
  bool correct = false;
};

struct PairedPrediction {
  Question question;
  ScoredPrediction doc;
  ScoredPrediction qa;
};

struct Selection {
  KnowledgeSource source = KnowledgeSource::kDocument;
  std::string answer;
  bool correct = false;
};

// QA-history wins ties: conf_k >= conf_d picks it.
Selection SelectAnswer(const PairedPrediction& pair, Criterion criterion);

// Accuracy of SelectAnswer over all pairs.
double SelectionAccuracy(std::span<const PairedPrediction> pairs,
                         Criterion criterion);

struct ReliabilityBin {
  int index = 0;
  size_t count = 0;
  double mean_confidence = 0.0;
  double mean_accuracy = 0.0;
};

// Equal-count bins over predictions sorted by ascending confidence; the first
// n mod M bins hold one extra prediction. Throws when M < 1 or M > n.
std::vector<ReliabilityBin> DensityBins(std::span<const Outcome> predictions,
                                        int bins);

// Density-based ECE: (1/M) * sum |Acc(B_m) - Conf(B_m)|.
double Ece(std::span<const Outcome> predictions, int bins = 10);

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
};

// Predictions sorted by descending confidence; point k is (k/n, error rate of
// the top k).
std::vector<RiskCoveragePoint> RiskCoverage(
    std::span<const Outcome> predictions);

// Mean risk over the coverage grid.
double Auc(std::span<const RiskCoveragePoint> points);

// Fraction of pairs where either source is correct.
double OracleUpperBound(std::span<const PairedPrediction> pairs);

struct SubsetRatio {
  size_t n = 0;
  double document = 0.0;
  double qa_history = 0.0;
};

struct SelectionRatioReport {
  // Keys: all, question_overlap, no_overlap, case1 (doc right, qa wrong),
  // case2 (doc wrong, qa right). Empty subsets are omitted.
  std::map<std::string, SubsetRatio> subsets;
  // Share of case2 routed to Document: errors a better selector could fix.
  std::optional<double> case2_residual_error;
};

SelectionRatioReport SelectionRatio(std::span<const PairedPrediction> pairs,
                                    Criterion criterion);

struct Retrieval {
  std::vector<std::string> ranked_contexts;
  std::vector<std::string> golds;
};

struct RecallResult {
  double recall = 0.0;
  // Questions with fewer than K contexts; scored on what they have.
  size_t short_lists = 0;
};

// Fraction of questions whose top-K contexts contain a gold answer.
RecallResult RecallAtK(std::span<const Retrieval> retrievals, int k);

}  // namespace selqa

#endif  // SELQA_SELECT_EVAL_H_
