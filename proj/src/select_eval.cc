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

#include "selqa/select_eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "selqa/kernels.h"

namespace selqa {
namespace {

// Indices ordered by confidence, ties by id then input position.
std::vector<size_t> SortedOrder(std::span<const Outcome> predictions,
                                bool descending) {
  std::vector<size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Outcome& x = predictions[a];
    const Outcome& y = predictions[b];
    if (x.confidence != y.confidence) {
      return descending ? x.confidence > y.confidence
                        : x.confidence < y.confidence;
    }
    return x.id < y.id;
  });
  return order;
}

void RequireFinite(std::span<const Outcome> predictions) {
  for (const auto& p : predictions) {
    if (!std::isfinite(p.confidence)) {
      throw ValidationError("confidence of '" + p.id + "' is not finite");
    }
  }
}

}  // namespace

std::string_view CriterionName(Criterion criterion) {
  switch (criterion) {
    case Criterion::kLikelihood:
      return "likelihood";
    case Criterion::kAnswerability:
      return "answerability";
    case Criterion::kConsistency:
      return "consistency";
    case Criterion::kEnsemble:
      return "ensemble";
  }
  return "ensemble";
}

Criterion ParseCriterion(std::string_view name) {
  for (const Criterion c : kAllCriteria) {
    if (CriterionName(c) == name) return c;
  }
  throw ValidationError("unknown criterion '" + std::string(name) + "'");
}

std::optional<double> CriterionScores::Find(Criterion criterion) const {
  switch (criterion) {
    case Criterion::kLikelihood:
      return likelihood;
    case Criterion::kAnswerability:
      return answerability;
    case Criterion::kConsistency:
      return consistency;
    case Criterion::kEnsemble:
      return ensemble;
  }
  return std::nullopt;
}

double CriterionScores::Get(Criterion criterion) const {
  const auto value = Find(criterion);
  if (!value) {
    throw ValidationError("missing " + std::string(CriterionName(criterion)) +
                          " score");
  }
  return *value;
}

Selection SelectAnswer(const PairedPrediction& pair, Criterion criterion) {
  const double conf_d = pair.doc.scores.Get(criterion);
  const double conf_k = pair.qa.scores.Get(criterion);
  if (conf_k >= conf_d) {
    return {KnowledgeSource::kQAHistory, pair.qa.answer, pair.qa.correct};
  }
  return {KnowledgeSource::kDocument, pair.doc.answer, pair.doc.correct};
}

double SelectionAccuracy(std::span<const PairedPrediction> pairs,
                         Criterion criterion) {
  if (pairs.empty()) throw ValidationError("no paired predictions");
  size_t correct = 0;
  for (const auto& pair : pairs) {
    if (SelectAnswer(pair, criterion).correct) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

std::vector<ReliabilityBin> DensityBins(std::span<const Outcome> predictions,
                                        int bins) {
  const size_t n = predictions.size();
  if (n == 0) throw ValidationError("no predictions to bin");
  if (bins < 1) throw ValidationError("bin count must be at least 1");
  if (static_cast<size_t>(bins) > n) {
    throw ValidationError("bin count " + std::to_string(bins) +
                          " exceeds prediction count " + std::to_string(n));
  }
  RequireFinite(predictions);
  const std::vector<size_t> order = SortedOrder(predictions, false);
  std::vector<ReliabilityBin> out(bins);
  const size_t base = n / bins;
  const size_t extra = n % bins;
  size_t pos = 0;
  for (int m = 0; m < bins; ++m) {
    const size_t size = base + (static_cast<size_t>(m) < extra ? 1 : 0);
    // Deviations from the bin's first confidence, so a constant bin yields
    // its confidence exactly.
    const double anchor = predictions[order[pos]].confidence;
    double dev = 0.0;
    double acc = 0.0;
    for (size_t i = pos; i < pos + size; ++i) {
      dev += predictions[order[i]].confidence - anchor;
      acc += predictions[order[i]].correct ? 1.0 : 0.0;
    }
    out[m] = {m, size, anchor + dev / static_cast<double>(size),
              acc / static_cast<double>(size)};
    pos += size;
  }
  return out;
}

double Ece(std::span<const Outcome> predictions, int bins) {
  const auto binned = DensityBins(predictions, bins);
  const double anchor =
      std::abs(binned[0].mean_accuracy - binned[0].mean_confidence);
  double dev = 0.0;
  for (const auto& b : binned) {
    dev += std::abs(b.mean_accuracy - b.mean_confidence) - anchor;
  }
  return anchor + dev / static_cast<double>(bins);
}

std::vector<RiskCoveragePoint> RiskCoverage(
    std::span<const Outcome> predictions) {
  const size_t n = predictions.size();
  if (n == 0) throw ValidationError("no predictions for risk-coverage");
  RequireFinite(predictions);
  const std::vector<size_t> order = SortedOrder(predictions, true);
  std::vector<RiskCoveragePoint> out;
  out.reserve(n);
  size_t errors = 0;
  for (size_t k = 1; k <= n; ++k) {
    if (!predictions[order[k - 1]].correct) ++errors;
    out.push_back({static_cast<double>(k) / static_cast<double>(n),
                   static_cast<double>(errors) / static_cast<double>(k)});
  }
  return out;
}

double Auc(std::span<const RiskCoveragePoint> points) {
  if (points.empty()) throw ValidationError("empty risk-coverage curve");
  double total = 0.0;
  for (const auto& p : points) total += p.risk;
  return total / static_cast<double>(points.size());
}

double OracleUpperBound(std::span<const PairedPrediction> pairs) {
  if (pairs.empty()) throw ValidationError("no paired predictions");
  size_t hits = 0;
  for (const auto& pair : pairs) {
    if (pair.doc.correct || pair.qa.correct) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

SelectionRatioReport SelectionRatio(std::span<const PairedPrediction> pairs,
                                    Criterion criterion) {
  struct Tally {
    size_t n = 0;
    size_t document = 0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& pair : pairs) {
    const bool to_doc =
        SelectAnswer(pair, criterion).source == KnowledgeSource::kDocument;
    auto add = [&](const char* subset) {
      Tally& t = tallies[subset];
      ++t.n;
      if (to_doc) ++t.document;
    };
    add("all");
    if (pair.question.question_overlap.has_value()) {
      add(*pair.question.question_overlap ? "question_overlap" : "no_overlap");
    }
    if (pair.doc.correct && !pair.qa.correct) add("case1");
    if (!pair.doc.correct && pair.qa.correct) add("case2");
  }

  SelectionRatioReport report;
  for (const auto& [name, t] : tallies) {
    const double doc =
        static_cast<double>(t.document) / static_cast<double>(t.n);
    report.subsets[name] = {t.n, doc, 1.0 - doc};
  }
  if (auto it = report.subsets.find("case2"); it != report.subsets.end()) {
    report.case2_residual_error = it->second.document;
  }
  return report;
}

RecallResult RecallAtK(std::span<const Retrieval> retrievals, int k) {
  if (k < 1) throw ValidationError("K must be at least 1");
  if (retrievals.empty()) throw ValidationError("no retrievals");
  const auto counts = kernels::parallel::CountRecallHits(retrievals, k);
  return {static_cast<double>(counts.hits) /
              static_cast<double>(retrievals.size()),
          counts.short_lists};
}

}  // namespace selqa
