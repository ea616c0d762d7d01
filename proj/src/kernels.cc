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

#include "selqa/kernels.h"

#include <algorithm>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "selqa/calibrate.h"
#include "selqa/qa_core.h"

namespace selqa::kernels {
namespace {

SampleSet DrawSamples(const ConditionalTable& model, const ConsistencyJob& job,
                      int n_samples) {
  SampleSet out;
  out.samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    out.samples.push_back(
        SampleDecode(model, job.prompt,
                     DeriveSeed(job.seed, static_cast<uint64_t>(i)), 1.0)
            .answer_text);
  }
  out.hits = CountConsistentSamples(out.samples, job.golds);
  return out;
}

bool RecallHit(const Retrieval& r, int k, bool* short_list) {
  const size_t take = std::min(r.ranked_contexts.size(), static_cast<size_t>(k));
  *short_list = r.ranked_contexts.size() < static_cast<size_t>(k);
  return ContainsAnswer(std::span(r.ranked_contexts).first(take), r.golds);
}

void RequireSamples(int n_samples) {
  if (n_samples < 1) throw ValidationError("n_samples must be positive");
}

// Keeps the exception of the lowest failing index so the error reported by
// the parallel kernels matches the serial one.
class FirstError {
 public:
  void Capture(size_t index) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!error_ || index < index_) {
      error_ = std::current_exception();
      index_ = index;
    }
  }
  void RethrowIfAny() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
  size_t index_ = 0;
};

}  // namespace

namespace serial {

std::vector<double> BatchSequenceLikelihood(
    std::span<const std::vector<double>> step_probs, bool length_normalize) {
  std::vector<double> out(step_probs.size());
  for (size_t i = 0; i < step_probs.size(); ++i) {
    out[i] = SequenceLikelihood(step_probs[i], length_normalize);
  }
  return out;
}

std::vector<SampleSet> BatchConsistencySamples(
    const ConditionalTable& model, std::span<const ConsistencyJob> jobs,
    int n_samples) {
  RequireSamples(n_samples);
  std::vector<SampleSet> out(jobs.size());
  for (size_t i = 0; i < jobs.size(); ++i) {
    out[i] = DrawSamples(model, jobs[i], n_samples);
  }
  return out;
}

RecallCounts CountRecallHits(std::span<const Retrieval> retrievals, int k) {
  RecallCounts counts;
  for (const auto& r : retrievals) {
    bool short_list = false;
    if (RecallHit(r, k, &short_list)) ++counts.hits;
    if (short_list) ++counts.short_lists;
  }
  return counts;
}

}  // namespace serial

namespace parallel {

std::vector<double> BatchSequenceLikelihood(
    std::span<const std::vector<double>> step_probs, bool length_normalize) {
  const auto n = static_cast<int64_t>(step_probs.size());
  std::vector<double> out(step_probs.size());
  FirstError error;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    try {
      out[i] = SequenceLikelihood(step_probs[i], length_normalize);
    } catch (...) {
      error.Capture(static_cast<size_t>(i));
    }
  }
  error.RethrowIfAny();
  return out;
}

std::vector<SampleSet> BatchConsistencySamples(
    const ConditionalTable& model, std::span<const ConsistencyJob> jobs,
    int n_samples) {
  RequireSamples(n_samples);
  const auto n = static_cast<int64_t>(jobs.size());
  std::vector<SampleSet> out(jobs.size());
  FirstError error;
#pragma omp parallel for schedule(dynamic, 4)
  for (int64_t i = 0; i < n; ++i) {
    try {
      out[i] = DrawSamples(model, jobs[i], n_samples);
    } catch (...) {
      error.Capture(static_cast<size_t>(i));
    }
  }
  error.RethrowIfAny();
  return out;
}

RecallCounts CountRecallHits(std::span<const Retrieval> retrievals, int k) {
  const auto n = static_cast<int64_t>(retrievals.size());
  size_t hits = 0;
  size_t short_lists = 0;
  FirstError error;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : hits, short_lists)
  for (int64_t i = 0; i < n; ++i) {
    try {
      bool short_list = false;
      if (RecallHit(retrievals[i], k, &short_list)) ++hits;
      if (short_list) ++short_lists;
    } catch (...) {
      error.Capture(static_cast<size_t>(i));
    }
  }
  error.RethrowIfAny();
  return {hits, short_lists};
}

}  // namespace parallel

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace selqa::kernels
