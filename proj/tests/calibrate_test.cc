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
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "selqa/toy_lm.h"

namespace selqa {
namespace {

using Probs = std::vector<double>;
using Texts = std::vector<std::string>;

TEST(SequenceLikelihood, Examples) {
  EXPECT_EQ(SequenceLikelihood(Probs{0.5, 0.5}, true), 0.5);
  EXPECT_EQ(SequenceLikelihood(Probs{0.5, 0.5}, false), 0.25);
  EXPECT_EQ(SequenceLikelihood(Probs{0.8}, true), 0.8);
  EXPECT_EQ(SequenceLikelihood(Probs{0.8}, false), 0.8);
}

TEST(SequenceLikelihood, RepetitionIdentity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = 1.0 - unit(rng);  // (0, 1]
    const Probs seq(len(rng), p);
    EXPECT_NEAR(SequenceLikelihood(seq, true), p, 1e-12);
  }
}

TEST(SequenceLikelihood, NormalizedDominatesRaw) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Probs seq(2 + trial % 10);
    for (double& p : seq) p = 1.0 - unit(rng);
    double product = 1.0;
    for (const double p : seq) product *= p;
    EXPECT_EQ(SequenceLikelihood(seq, false), product);
    EXPECT_GE(SequenceLikelihood(seq, true), SequenceLikelihood(seq, false));
  }
}

TEST(SequenceLikelihood, LongSequencesDoNotUnderflow) {
  const Probs seq(2000, 0.01);
  EXPECT_NEAR(SequenceLikelihood(seq, true), 0.01, 1e-12);
}

TEST(SequenceLikelihood, Errors) {
  EXPECT_THROW(SequenceLikelihood(Probs{}, true), ValidationError);
  EXPECT_THROW(SequenceLikelihood(Probs{0.0}, true), ValidationError);
  EXPECT_THROW(SequenceLikelihood(Probs{1.5}, false), ValidationError);
  EXPECT_THROW(SequenceLikelihood(Probs{std::nan("")}, false), ValidationError);
}

TEST(AnswerabilityLabel, Examples) {
  const ContextSet hit{KnowledgeSource::kDocument,
                       {"Eric Liddell won gold in 1924"}};
  const ContextSet miss{KnowledgeSource::kDocument, {"Hugh Hudson directed"}};
  const ContextSet split{KnowledgeSource::kDocument, {"winner Eric", "Liddell"}};
  const Texts golds = {"Eric Liddell"};
  EXPECT_EQ(AnswerabilityLabel(hit, golds), 1);
  EXPECT_EQ(AnswerabilityLabel(miss, golds), 0);
  EXPECT_EQ(AnswerabilityLabel(split, golds), 1);
}

TEST(ConsistencyLabel, Counting) {
  Texts samples(30, "london");
  std::fill_n(samples.begin(), 18, "Paris");
  EXPECT_DOUBLE_EQ(ConsistencyLabel(samples, Texts{"paris"}), 0.6);
  EXPECT_EQ(ConsistencyLabel(Texts(30, "paris"), Texts{"paris"}), 1.0);
  EXPECT_THROW(ConsistencyLabel(Texts{}, Texts{"paris"}), ValidationError);
}

TEST(ConsistencyLabel, MatchesIndependentRecount) {
  const Texts pool = {"Paris", "paris!", "the Paris", "London", "an apple",
                      "Apple", "1924", "nineteen"};
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    Texts samples(1 + trial % 30);
    for (auto& s : samples) s = pool[pick(rng)];
    const Texts golds = {pool[pick(rng)], pool[pick(rng)]};
    EXPECT_EQ(CountConsistentSamples(samples, golds),
              testing::RecountMatches(samples, golds));
  }
}

TEST(ConsistencyLabel, ConvergesToEnumeratedMass) {
  const auto f = testing::FixtureF();
  double gold_mass = 0.0;
  for (const auto& o : EnumerateOutputs(f, "q1")) {
    if (o.answer_text == "paris") gold_mass += o.probability;
  }
  ASSERT_DOUBLE_EQ(gold_mass, 0.7);
  double total = 0.0;
  for (uint64_t label = 0; label < 100; ++label) {
    Texts samples;
    for (uint64_t i = 0; i < 30; ++i) {
      samples.push_back(SampleDecode(f, "q1", DeriveSeed(DeriveSeed(9, label), i))
                            .answer_text);
    }
    const double value = ConsistencyLabel(samples, Texts{"paris"});
    EXPECT_EQ(value * 30, std::round(value * 30));
    total += value;
  }
  EXPECT_LE(std::abs(total / 100 - gold_mass), 3 * std::sqrt(0.21 / 3000));
}

TEST(Quantiles, NineValues) {
  const Probs values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const auto q = FitQuantiles(values);
  EXPECT_EQ(q.t1, 0.2);
  EXPECT_EQ(q.t2, 0.5);
  EXPECT_EQ(q.group_sizes, (std::array<size_t, 3>{3, 3, 3}));
  EXPECT_EQ(Bucketize(0.2, q), ConsistencyBucket::kLow);
  EXPECT_EQ(Bucketize(0.21, q), ConsistencyBucket::kMedium);
  EXPECT_EQ(Bucketize(0.5, q), ConsistencyBucket::kMedium);
  EXPECT_EQ(Bucketize(0.6, q), ConsistencyBucket::kHigh);
}

TEST(Quantiles, RemainderGoesLow) {
  Probs ten;
  for (int i = 0; i < 10; ++i) ten.push_back(i / 10.0);
  EXPECT_EQ(FitQuantiles(ten).group_sizes, (std::array<size_t, 3>{4, 3, 3}));
  Probs eleven = ten;
  eleven.push_back(1.0);
  EXPECT_EQ(FitQuantiles(eleven).group_sizes, (std::array<size_t, 3>{4, 4, 3}));
}

TEST(Quantiles, IdenticalValuesAllLow) {
  const Probs same(12, 0.4);
  const auto q = FitQuantiles(same);
  EXPECT_EQ(q.t1, q.t2);
  for (const double v : same) EXPECT_EQ(Bucketize(v, q), ConsistencyBucket::kLow);
}

TEST(Quantiles, Errors) {
  EXPECT_THROW(FitQuantiles(Probs{0.1, 0.2}), ValidationError);
  EXPECT_THROW(FitQuantiles(Probs{0.1, 0.2, std::nan("")}), ValidationError);
}

TEST(VerbalProbs, Examples) {
  const auto a = ExtractVerbalProbs(0.9, 0.4, 0.2);
  EXPECT_EQ(a.p_answerable, 0.9);
  EXPECT_EQ(a.p_consistent, 0.5);
  const auto b = ExtractVerbalProbs(1.0, 1.0, 0.0);
  EXPECT_EQ(b.p_answerable, 1.0);
  EXPECT_EQ(b.p_consistent, 1.0);
  const auto c = ExtractVerbalProbs(0.0, 0.0, 0.0);
  EXPECT_EQ(c.p_answerable, 0.0);
  EXPECT_EQ(c.p_consistent, 0.0);
  EXPECT_THROW(ExtractVerbalProbs(1.2, 0.0, 0.0), ValidationError);
  EXPECT_THROW(ExtractVerbalProbs(0.5, 0.8, 0.8), ValidationError);
}

TEST(Ensemble, Examples) {
  EXPECT_EQ(EnsembleConfidence(0.9, 0.6, 0.3).ensemble, 0.6);
  EXPECT_EQ(EnsembleConfidence(1, 1, 1).ensemble, 1.0);
  EXPECT_EQ(EnsembleConfidence(0, 0, 0).ensemble, 0.0);
}

TEST(Ensemble, BoundedByComponents) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = unit(rng), b = unit(rng), c = unit(rng);
    const double e = EnsembleConfidence(a, b, c).ensemble;
    EXPECT_GE(e, std::min({a, b, c}));
    EXPECT_LE(e, std::max({a, b, c}));
  }
}

TEST(TemperatureScale, Examples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = 1.0 - unit(rng);
    EXPECT_EQ(TemperatureScale(c, 1.0), c);
  }
  EXPECT_DOUBLE_EQ(TemperatureScale(0.25, 2.0), 0.5);
  EXPECT_THROW(TemperatureScale(0.0, 2.0), ValidationError);
  EXPECT_THROW(TemperatureScale(0.5, 0.0), ValidationError);
}

TEST(TemperatureScale, StrictlyIncreasing) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (const double t : {0.5, 2.0, 7.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      double a = unit(rng), b = unit(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      EXPECT_LT(TemperatureScale(a, t), TemperatureScale(b, t));
    }
  }
}

TEST(FitTemperature, PicksGridMinimum) {
  std::mt19937_64 rng(10);
  const auto dev = testing::RandomOutcomes(rng, 40);
  const auto fit = FitTemperature(dev, 5);
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double t = k / 20.0;
    auto scaled = dev;
    for (auto& o : scaled) o.confidence = TemperatureScale(o.confidence, t);
    const double e = testing::BruteForceEce(scaled, 5);
    if (e < best - 1e-15) {
      best = e;
      best_t = t;
    }
  }
  EXPECT_NEAR(fit.ece, best, 1e-12);
  EXPECT_NEAR(fit.temperature, best_t, 1e-12);
}

TEST(FitTemperature, OverconfidentDevGetsTemperatureBelowOne) {
  // exp(ln c / T) lowers confidences when T < 1.
  std::vector<Outcome> dev;
  for (int i = 0; i < 20; ++i) {
    dev.push_back({0.95, i % 2 == 0, "d" + std::to_string(i)});
  }
  const auto fit = FitTemperature(dev, 2);
  EXPECT_LT(fit.temperature, 1.0);
  EXPECT_LT(fit.ece, Ece(dev, 2));
}

}  // namespace
}  // namespace selqa
