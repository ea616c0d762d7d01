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

// Core QA types plus answer normalization, exact match and answer containment.

#ifndef SELQA_QA_CORE_H_
#define SELQA_QA_CORE_H_

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selqa {

// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class KnowledgeSource { kDocument, kQAHistory };

// "document" / "qa_history".
std::string_view SourceName(KnowledgeSource source);
// Throws ValidationError for anything else.
KnowledgeSource ParseSource(std::string_view name);

struct Question {
  std::string id;
  std::string text;
  std::vector<std::string> gold_answers;
  // Paraphrase of a training question; absent when the split is unknown.
  std::optional<bool> question_overlap;
};

// Checks that golds are present and none normalizes to the empty string.
void ValidateQuestion(const Question& question);

struct ContextSet {
  KnowledgeSource source = KnowledgeSource::kDocument;
  // Retrieval rank order.
  std::vector<std::string> passages;
};

// SQuAD-style normalization: lowercase, drop ASCII punctuation, drop the
// articles a/an/the as whole words, collapse whitespace. Bytes outside ASCII
// are passed through unchanged. Idempotent.
std::string NormalizeAnswer(std::string_view text);

// True iff the normalized prediction equals some normalized gold.
bool ExactMatch(std::string_view prediction,
                std::span<const std::string> golds);

enum class ContainmentMode {
  // Passages joined with one space, then normalized as a whole.
  kJoint,
  // Each passage checked on its own.
  kPerPassage,
};

// True iff some normalized gold is a contiguous substring of the normalized
// passage text. Golds that normalize to "" never match.
bool ContainsAnswer(std::span<const std::string> passages,
                    std::span<const std::string> golds,
                    ContainmentMode mode = ContainmentMode::kJoint);

}  // namespace selqa

#endif  // SELQA_QA_CORE_H_
