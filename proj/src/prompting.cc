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

#include "selqa/prompting.h"

#include <algorithm>
#include <set>

namespace selqa {
namespace {

constexpr std::string_view kAnswerField = "Answer: ";
constexpr std::string_view kAnswerableField = " Answerable: ";
constexpr std::string_view kConsistencyField = " Consistency: ";

}  // namespace

std::string BuildQAHistoryPassage(std::string_view target_question,
                                  std::span<const QAPair> pairs) {
  if (pairs.empty()) {
    throw ValidationError("QA-history passage needs at least one QA pair");
  }
  std::vector<const QAPair*> ordered;
  std::set<int> ranks;
  for (const auto& pair : pairs) {
    if (pair.retrieval_rank < 1) {
      throw ValidationError("retrieval rank must be positive, got " +
                            std::to_string(pair.retrieval_rank));
    }
    if (!ranks.insert(pair.retrieval_rank).second) {
      throw ValidationError("duplicate retrieval rank " +
                            std::to_string(pair.retrieval_rank));
    }
    ordered.push_back(&pair);
  }
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->retrieval_rank < b->retrieval_rank;
  });

  std::string passage = "Question: ";
  passage += target_question;
  passage += ", Answer: ";
  for (const QAPair* pair : ordered) {
    passage += "\nQuestion: ";
    passage += pair->question;
    passage += ", Answer: ";
    passage += pair->answer;
  }
  return passage;
}

std::vector<ContextSet> AssembleContexts(
    std::string_view /*question*/, std::span<const std::string> doc_passages,
    const std::optional<std::string>& qa_passage, ContextMode mode) {
  if (doc_passages.empty() && !qa_passage.has_value()) {
    throw ValidationError(
        "context assembly needs document passages or a QA-history passage");
  }
  std::vector<ContextSet> out;
  if (mode == ContextMode::kConcat) {
    ContextSet joint{KnowledgeSource::kDocument,
                     {doc_passages.begin(), doc_passages.end()}};
    if (qa_passage) joint.passages.push_back(*qa_passage);
    out.push_back(std::move(joint));
    return out;
  }
  if (!doc_passages.empty()) {
    out.push_back({KnowledgeSource::kDocument,
                   {doc_passages.begin(), doc_passages.end()}});
  }
  if (qa_passage) out.push_back({KnowledgeSource::kQAHistory, {*qa_passage}});
  return out;
}

std::string_view BucketName(ConsistencyBucket bucket) {
  switch (bucket) {
    case ConsistencyBucket::kHigh:
      return "High";
    case ConsistencyBucket::kMedium:
      return "Medium";
    case ConsistencyBucket::kLow:
      return "Low";
  }
  return "Low";
}

ConsistencyBucket ParseBucket(std::string_view name) {
  if (name == "High") return ConsistencyBucket::kHigh;
  if (name == "Medium") return ConsistencyBucket::kMedium;
  if (name == "Low") return ConsistencyBucket::kLow;
  throw ValidationError("unknown consistency bucket '" + std::string(name) +
                        "'");
}

CalibrationTarget RenderCalibrationTarget(std::string_view answer,
                                          bool answerable,
                                          ConsistencyBucket bucket) {
  CalibrationTarget target{std::string(answer), answerable, bucket, {}};
  target.rendered = std::string(kAnswerField) + target.answer_text +
                    std::string(kAnswerableField) +
                    std::string(target.answerable_word()) +
                    std::string(kConsistencyField) +
                    std::string(target.consistency_word());
  return target;
}

CalibrationTarget ParseCalibrationTarget(std::string_view rendered) {
  if (!rendered.starts_with(kAnswerField)) {
    throw ValidationError("calibration target must start with 'Answer: '");
  }
  const size_t con = rendered.rfind(kConsistencyField);
  if (con == std::string_view::npos) {
    throw ValidationError("calibration target lacks a Consistency field");
  }
  const size_t ans = rendered.substr(0, con).rfind(kAnswerableField);
  if (ans == std::string_view::npos || ans < kAnswerField.size()) {
    throw ValidationError("calibration target lacks an Answerable field");
  }
  const std::string_view answer =
      rendered.substr(kAnswerField.size(), ans - kAnswerField.size());
  const std::string_view flag = rendered.substr(
      ans + kAnswerableField.size(), con - ans - kAnswerableField.size());
  const std::string_view bucket =
      rendered.substr(con + kConsistencyField.size());
  bool answerable;
  if (flag == "True") {
    answerable = true;
  } else if (flag == "False") {
    answerable = false;
  } else {
    throw ValidationError("Answerable field must be True or False, got '" +
                          std::string(flag) + "'");
  }
  CalibrationTarget target =
      RenderCalibrationTarget(answer, answerable, ParseBucket(bucket));
  if (target.rendered != rendered) {
    throw ValidationError("calibration target does not round-trip");
  }
  return target;
}

}  // namespace selqa
