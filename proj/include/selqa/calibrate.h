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

// Confidence estimates for a decoded answer and their supervision labels.
//
// Three estimates are combined per answer:
//   * sequence likelihood: product of chosen-token probabilities, optionally
//     length-normalized by the geometric mean;
//   * P(Answerable): trained against whether the context holds a gold answer;
//   * P(Consistent): trained against the fraction of temperature-1 samples
//     that exactly match a gold answer.
// The verbal estimator reads the latter two off token likelihoods
// ("True", "High", "Medium"); the ensemble is their plain mean.

#ifndef SELQA_CALIBRATE_H_
#define SELQA_CALIBRATE_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "selqa/prompting.h"
#include "selqa/qa_core.h"
#include "selqa/select_eval.h"

namespace selqa {

// Samples per consistency label.
inline constexpr int kDefaultConsistencySamples = 30;

// Product of step probabilities, or its geometric mean when length_normalize
// is set. The geometric mean is computed in log space so long sequences do
// not underflow. Throws ValidationError on an empty list or a value outside
// (0, 1].
double SequenceLikelihood(std::span<const double> step_probs,
                          bool length_normalize);

// 1 iff the context passages contain a gold answer (joint containment).
int AnswerabilityLabel(const ContextSet& contexts,
                       std::span<const std::string> golds);

// Number of samples that exactly match a gold answer.
int CountConsistentSamples(std::span<const std::string> samples,
                           std::span<const std::string> golds);
// CountConsistentSamples / samples.size(). Throws on empty samples.
double ConsistencyLabel(std::span<const std::string> samples,
                        std::span<const std::string> golds);

struct QuantileThresholds {
  double t1 = 0.0;  // max of the Low group
  double t2 = 0.0;  // max of the Medium group
  // Low, Medium, High group sizes of the fitted training split.
  std::array<size_t, 3> group_sizes{};
};

// Sorts the training values and cuts them into three contiguous groups whose
// sizes differ by at most one; the remainder goes to the lower groups.
QuantileThresholds FitQuantiles(std::span<const double> training_values);
// value <= t1 -> Low, value <= t2 -> Medium, otherwise High.
ConsistencyBucket Bucketize(double value, const QuantileThresholds& thresholds);

struct CalibrationLabels {
  int answerability = 0;
  int consistent_samples = 0;
  int n_samples = 0;
  ConsistencyBucket consistency_bucket = ConsistencyBucket::kLow;

  double consistency() const {
    return static_cast<double>(consistent_samples) / n_samples;
  }
};

struct VerbalProbs {
  double p_answerable = 0.0;
  double p_consistent = 0.0;
};

// P(Answerable) = P(True); P(Consistent) = 1 * P(High) + 0.5 * P(Medium).
// Low carries weight 0.
VerbalProbs ExtractVerbalProbs(double p_true, double p_high, double p_medium);

struct ConfidenceBreakdown {
  double lm_likelihood = 0.0;
  double p_answerable = 0.0;
  double p_consistent = 0.0;
  double ensemble = 0.0;
};

// ensemble = (lm_likelihood + p_answerable + p_consistent) / 3.
ConfidenceBreakdown EnsembleConfidence(double lm_likelihood,
                                       double p_answerable,
                                       double p_consistent);

// exp(ln(confidence) / temperature); the identity at temperature 1.
double TemperatureScale(double confidence, double temperature);

struct TemperatureFit {
  double temperature = 1.0;
  double ece = 0.0;
};

// Grid search over T = 0.05, 0.10, ..., 10 minimizing density ECE of the
// scaled confidences; ties resolve to the smallest T.
TemperatureFit FitTemperature(std::span<const Outcome> dev, int bins);

}  // namespace selqa

#endif  // SELQA_CALIBRATE_H_
