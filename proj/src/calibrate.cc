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

#include "selqa/calibrate.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selqa {
namespace {

constexpr double kSumTolerance = 1e-9;
constexpr int kTemperatureGridSteps = 200;  // 0.05 .. 10.00

void RequireUnit(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " +
                          std::to_string(value));
  }
}

}  // namespace

double SequenceLikelihood(std::span<const double> step_probs,
                          bool length_normalize) {
  if (step_probs.empty()) {
    throw ValidationError("sequence likelihood needs at least one step");
  }
  for (const double p : step_probs) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw ValidationError("step probability must lie in (0, 1], got " +
                            std::to_string(p));
    }
  }
  double product = 1.0;
  for (const double p : step_probs) product *= p;
  if (!length_normalize || step_probs.size() == 1) return product;

  const double n = static_cast<double>(step_probs.size());
  if (product >= std::numeric_limits<double>::min()) {
    return std::pow(product, 1.0 / n);
  }
  // The product underflowed: average the logs with Neumaier summation.
  double sum = 0.0;
  double compensation = 0.0;
  for (const double p : step_probs) {
    const double term = std::log(p);
    const double t = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - t) + term
                                                    : (term - t) + sum;
    sum = t;
  }
  return std::min(1.0, std::exp((sum + compensation) / n));
}

int AnswerabilityLabel(const ContextSet& contexts,
                       std::span<const std::string> golds) {
  return ContainsAnswer(contexts.passages, golds) ? 1 : 0;
}

int CountConsistentSamples(std::span<const std::string> samples,
                           std::span<const std::string> golds) {
  if (golds.empty()) throw ValidationError("gold answer list is empty");
  std::vector<std::string> normalized_golds;
  for (const auto& g : golds) normalized_golds.push_back(NormalizeAnswer(g));
  int hits = 0;
  for (const auto& s : samples) {
    const std::string n = NormalizeAnswer(s);
    if (std::find(normalized_golds.begin(), normalized_golds.end(), n) !=
        normalized_golds.end()) {
      ++hits;
    }
  }
  return hits;
}

double ConsistencyLabel(std::span<const std::string> samples,
                        std::span<const std::string> golds) {
  if (samples.empty()) {
    throw ValidationError("consistency label needs at least one sample");
  }
  return static_cast<double>(CountConsistentSamples(samples, golds)) /
         static_cast<double>(samples.size());
}

QuantileThresholds FitQuantiles(std::span<const double> training_values) {
  const size_t n = training_values.size();
  if (n < 3) {
    throw ValidationError("quantile fit needs at least 3 training values");
  }
  std::vector<double> sorted(training_values.begin(), training_values.end());
  for (const double v : sorted) {
    if (std::isnan(v)) throw ValidationError("quantile fit got NaN");
  }
  std::sort(sorted.begin(), sorted.end());

  QuantileThresholds q;
  for (size_t g = 0; g < 3; ++g) q.group_sizes[g] = n / 3 + (g < n % 3 ? 1 : 0);
  q.t1 = sorted[q.group_sizes[0] - 1];
  q.t2 = sorted[q.group_sizes[0] + q.group_sizes[1] - 1];
  return q;
}

ConsistencyBucket Bucketize(double value,
                            const QuantileThresholds& thresholds) {
  if (value <= thresholds.t1) return ConsistencyBucket::kLow;
  if (value <= thresholds.t2) return ConsistencyBucket::kMedium;
  return ConsistencyBucket::kHigh;
}

VerbalProbs ExtractVerbalProbs(double p_true, double p_high, double p_medium) {
  RequireUnit(p_true, "p_true");
  RequireUnit(p_high, "p_high");
  RequireUnit(p_medium, "p_medium");
  if (p_high + p_medium > 1.0 + kSumTolerance) {
    throw ValidationError("p_high + p_medium exceeds 1");
  }
  return {p_true, 1.0 * p_high + 0.5 * p_medium};
}

ConfidenceBreakdown EnsembleConfidence(double lm_likelihood,
                                       double p_answerable,
                                       double p_consistent) {
  RequireUnit(lm_likelihood, "lm_likelihood");
  RequireUnit(p_answerable, "p_answerable");
  RequireUnit(p_consistent, "p_consistent");
  return {lm_likelihood, p_answerable, p_consistent,
          (lm_likelihood + p_answerable + p_consistent) / 3.0};
}

double TemperatureScale(double confidence, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive");
  }
  if (!(confidence > 0.0 && confidence <= 1.0)) {
    throw ValidationError("confidence must lie in (0, 1] for scaling, got " +
                          std::to_string(confidence));
  }
  if (temperature == 1.0) return confidence;
  return std::exp(std::log(confidence) / temperature);
}

TemperatureFit FitTemperature(std::span<const Outcome> dev, int bins) {
  if (dev.empty()) throw ValidationError("temperature fit needs dev records");
  TemperatureFit best{0.0, 2.0};
  std::vector<Outcome> scaled(dev.begin(), dev.end());
  for (int k = 1; k <= kTemperatureGridSteps; ++k) {
    const double t = k / 20.0;
    for (size_t i = 0; i < dev.size(); ++i) {
      scaled[i].confidence = TemperatureScale(dev[i].confidence, t);
    }
    const double e = Ece(scaled, bins);
    if (e < best.ece) best = {t, e};
  }
  return best;
}

}  // namespace selqa
