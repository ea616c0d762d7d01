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

#ifndef SELQA_PROMPTING_H_
#define SELQA_PROMPTING_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selqa/qa_core.h"

namespace selqa {

struct QAPair {
  std::string question;
  std::string answer;
  int retrieval_rank = 1;  // 1 = best
};

// QA-history pseudo-passage. The first line carries the target question with
// an empty answer slot ("Question: q, Answer: "), then one
// "Question: q_i, Answer: a_i" line per retrieved pair in rank order, joined
// with '\n'. Throws ValidationError for an empty list, non-positive ranks or
// duplicate ranks.
std::string BuildQAHistoryPassage(std::string_view target_question,
                                  std::span<const QAPair> pairs);

enum class ContextMode {
  // Two independent inferences, one per knowledge source.
  kSeparate,
  // Single Document context with the QA-history passage appended last.
  kConcat,
};

// Separate: (Document, docs) and (QAHistory, [qa_passage]), each only when
// present. Concat: one Document set holding docs then qa_passage.
std::vector<ContextSet> AssembleContexts(
    std::string_view question, std::span<const std::string> doc_passages,
    const std::optional<std::string>& qa_passage, ContextMode mode);

enum class ConsistencyBucket { kLow, kMedium, kHigh };

std::string_view BucketName(ConsistencyBucket bucket);  // "High", ...
ConsistencyBucket ParseBucket(std::string_view name);

struct CalibrationTarget {
  std::string answer_text;
  bool answerable = false;
  ConsistencyBucket consistency = ConsistencyBucket::kLow;
  std::string rendered;

  std::string_view answerable_word() const {
    return answerable ? "True" : "False";
  }
  std::string_view consistency_word() const { return BucketName(consistency); }
};

// "Answer: {answer} Answerable: {True|False} Consistency: {High|Medium|Low}"
CalibrationTarget RenderCalibrationTarget(std::string_view answer,
                                          bool answerable,
                                          ConsistencyBucket bucket);

// Inverse of RenderCalibrationTarget. The last " Answerable: " and
// " Consistency: " markers delimit the fields, so answers containing those
// words are not recovered. Throws ValidationError on malformed text.
CalibrationTarget ParseCalibrationTarget(std::string_view rendered);

}  // namespace selqa

#endif  // SELQA_PROMPTING_H_
