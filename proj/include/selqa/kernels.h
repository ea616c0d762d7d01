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

// Record-level batch kernels.
//
// Each kernel exists twice: `serial` is the reference loop, `parallel` fans
// the records out with OpenMP. Outputs are written per record index and
// reductions are integer counts, so both versions return identical results
// for any thread count. The first exception raised by any record is rethrown
// after the parallel region.

#ifndef SELQA_KERNELS_H_
#define SELQA_KERNELS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selqa/select_eval.h"
#include "selqa/toy_lm.h"

namespace selqa::kernels {

struct ConsistencyJob {
  std::string prompt;
  std::vector<std::string> golds;
  uint64_t seed = 0;  // per-record seed, see DeriveSeed
};

struct SampleSet {
  std::vector<std::string> samples;
  int hits = 0;  // samples exactly matching a gold
};

struct RecallCounts {
  size_t hits = 0;
  size_t short_lists = 0;
};

namespace serial {

std::vector<double> BatchSequenceLikelihood(
    std::span<const std::vector<double>> step_probs, bool length_normalize);

// Draws n_samples temperature-1 answers per job; sample i of a job uses
// DeriveSeed(job.seed, i).
std::vector<SampleSet> BatchConsistencySamples(
    const ConditionalTable& model, std::span<const ConsistencyJob> jobs,
    int n_samples);

RecallCounts CountRecallHits(std::span<const Retrieval> retrievals, int k);

}  // namespace serial

namespace parallel {

std::vector<double> BatchSequenceLikelihood(
    std::span<const std::vector<double>> step_probs, bool length_normalize);

std::vector<SampleSet> BatchConsistencySamples(
    const ConditionalTable& model, std::span<const ConsistencyJob> jobs,
    int n_samples);

RecallCounts CountRecallHits(std::span<const Retrieval> retrievals, int k);

}  // namespace parallel

// Threads the parallel kernels will use (1 when built without OpenMP).
int MaxThreads();

}  // namespace selqa::kernels

#endif  // SELQA_KERNELS_H_
