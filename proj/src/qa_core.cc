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

#include "selqa/qa_core.h"

#include <string>

namespace selqa {
namespace {

bool IsAsciiPunct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool IsAsciiSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

bool IsArticle(std::string_view word) {
  return word == "a" || word == "an" || word == "the";
}

void RequireGolds(std::span<const std::string> golds) {
  if (golds.empty()) throw ValidationError("gold answer list is empty");
}

}  // namespace

std::string_view SourceName(KnowledgeSource source) {
  return source == KnowledgeSource::kDocument ? "document" : "qa_history";
}

KnowledgeSource ParseSource(std::string_view name) {
  if (name == "document") return KnowledgeSource::kDocument;
  if (name == "qa_history") return KnowledgeSource::kQAHistory;
  throw ValidationError("unknown knowledge source '" + std::string(name) +
                        "' (expected document or qa_history)");
}

void ValidateQuestion(const Question& question) {
  if (question.gold_answers.empty()) {
    throw ValidationError("question '" + question.id + "' has no gold answer");
  }
  for (const auto& gold : question.gold_answers) {
    if (NormalizeAnswer(gold).empty()) {
      throw ValidationError("question '" + question.id +
                            "' has a gold answer that normalizes to empty: '" +
                            gold + "'");
    }
  }
}

std::string NormalizeAnswer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string word;
  auto flush = [&] {
    if (!word.empty() && !IsArticle(word)) {
      if (!out.empty()) out.push_back(' ');
      out += word;
    }
    word.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsAsciiSpace(c)) {
      flush();
    } else if (IsAsciiPunct(c)) {
      // Removed, not replaced: "o'neil" -> "oneil".
      continue;
    } else if (c >= 'A' && c <= 'Z') {
      word.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      word.push_back(ch);
    }
  }
  flush();
  return out;
}

bool ExactMatch(std::string_view prediction,
                std::span<const std::string> golds) {
  RequireGolds(golds);
  const std::string normalized = NormalizeAnswer(prediction);
  for (const auto& gold : golds) {
    if (NormalizeAnswer(gold) == normalized) return true;
  }
  return false;
}

bool ContainsAnswer(std::span<const std::string> passages,
                    std::span<const std::string> golds, ContainmentMode mode) {
  RequireGolds(golds);
  std::vector<std::string> needles;
  needles.reserve(golds.size());
  for (const auto& gold : golds) {
    std::string n = NormalizeAnswer(gold);
    if (!n.empty()) needles.push_back(std::move(n));
  }
  if (needles.empty() || passages.empty()) return false;

  auto contains_any = [&](const std::string& haystack) {
    for (const auto& needle : needles) {
      if (haystack.find(needle) != std::string::npos) return true;
    }
    return false;
  };

  if (mode == ContainmentMode::kPerPassage) {
    for (const auto& passage : passages) {
      if (contains_any(NormalizeAnswer(passage))) return true;
    }
    return false;
  }

  std::string joined;
  for (size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) joined.push_back(' ');
    joined += passages[i];
  }
  return contains_any(NormalizeAnswer(joined));
}

}  // namespace selqa
