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

// Test-only reference computations. None of these call into the library's
// metric code; they re-derive each quantity the slow, obvious way.

#ifndef SELQA_TESTS_ORACLES_H_
#define SELQA_TESTS_ORACLES_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "selqa/select_eval.h"
#include "selqa/toy_lm.h"

namespace selqa::testing {

// Equal-count binning by explicit per-item bin assignment.
double BruteForceEce(const std::vector<Outcome>& predictions, int bins);

// Mean risk over the coverage grid for predictions already in ranked order.
double AucOfRanking(const std::vector<bool>& correct_in_rank_order);

// Minimum AUC over every distinct ordering of the correctness multiset.
double MinAucOverOrderings(std::vector<bool> correct);

// Char-by-char search for `needle` in `haystack`.
bool NaiveContains(const std::string& haystack, const std::string& needle);

// Independent recount of exact matches after lowercasing and stripping
// everything but letters, digits and single spaces between words, minus
// articles.
int RecountMatches(const std::vector<std::string>& samples,
                   const std::vector<std::string>& golds);

// Fixture "F": prompt q1, {paris: 0.7, london: 0.3} then eos.
ConditionalTable FixtureF();

std::vector<Outcome> RandomOutcomes(std::mt19937_64& rng, size_t n,
                                    bool quantized = false);

}  // namespace selqa::testing

#endif  // SELQA_TESTS_ORACLES_H_
