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
#include <random>

#include "gtest/gtest.h"

namespace selqa {
namespace {

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (true) {
    const size_t nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl - start));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return lines;
}

TEST(QAHistoryPassage, SinglePair) {
  const std::vector<QAPair> pairs = {{"q1", "a1", 1}};
  EXPECT_EQ(BuildQAHistoryPassage("who won X", pairs),
            "Question: who won X, Answer: \nQuestion: q1, Answer: a1");
}

TEST(QAHistoryPassage, FiftyPairsGiveFiftyOneLines) {
  std::vector<QAPair> pairs;
  for (int i = 1; i <= 50; ++i) {
    pairs.push_back({"q" + std::to_string(i), "a" + std::to_string(i), i});
  }
  const auto lines = SplitLines(BuildQAHistoryPassage("target", pairs));
  ASSERT_EQ(lines.size(), 51u);
  EXPECT_EQ(lines[0], "Question: target, Answer: ");
  for (int i = 1; i <= 50; ++i) {
    EXPECT_EQ(lines[i], "Question: q" + std::to_string(i) + ", Answer: a" +
                            std::to_string(i));
  }
}

TEST(QAHistoryPassage, SortsByRank) {
  std::vector<QAPair> pairs = {{"q3", "a3", 3}, {"q1", "a1", 1}, {"q2", "a2", 2}};
  const std::string expected =
      "Question: t, Answer: \nQuestion: q1, Answer: a1\n"
      "Question: q2, Answer: a2\nQuestion: q3, Answer: a3";
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    EXPECT_EQ(BuildQAHistoryPassage("t", pairs), expected);
  }
}

TEST(QAHistoryPassage, Errors) {
  EXPECT_THROW(BuildQAHistoryPassage("t", std::vector<QAPair>{}), ValidationError);
  EXPECT_THROW(BuildQAHistoryPassage("t", std::vector<QAPair>{{"q", "a", 0}}),
               ValidationError);
  EXPECT_THROW(BuildQAHistoryPassage(
                   "t", std::vector<QAPair>{{"q", "a", 2}, {"r", "b", 2}}),
               ValidationError);
}

TEST(AssembleContexts, Concat) {
  const std::vector<std::string> docs = {"d1", "d2", "d3"};
  const auto sets = AssembleContexts("q", docs, std::string("qa"),
                                     ContextMode::kConcat);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].source, KnowledgeSource::kDocument);
  EXPECT_EQ(sets[0].passages,
            (std::vector<std::string>{"d1", "d2", "d3", "qa"}));
}

TEST(AssembleContexts, Separate) {
  const std::vector<std::string> docs = {"d1", "d2", "d3"};
  const auto sets = AssembleContexts("q", docs, std::string("qa"),
                                     ContextMode::kSeparate);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].source, KnowledgeSource::kDocument);
  EXPECT_EQ(sets[0].passages.size(), 3u);
  EXPECT_EQ(sets[1].source, KnowledgeSource::kQAHistory);
  EXPECT_EQ(sets[1].passages, std::vector<std::string>{"qa"});
}

TEST(AssembleContexts, DegenerateInputs) {
  const auto qa_only = AssembleContexts("q", std::vector<std::string>{},
                                        std::string("qa"),
                                        ContextMode::kSeparate);
  ASSERT_EQ(qa_only.size(), 1u);
  EXPECT_EQ(qa_only[0].source, KnowledgeSource::kQAHistory);
  EXPECT_THROW(AssembleContexts("q", std::vector<std::string>{}, std::nullopt,
                                ContextMode::kConcat),
               ValidationError);
}

TEST(CalibrationTarget, RenderExamples) {
  EXPECT_EQ(RenderCalibrationTarget("paris", true, ConsistencyBucket::kHigh)
                .rendered,
            "Answer: paris Answerable: True Consistency: High");
  EXPECT_EQ(RenderCalibrationTarget("", false, ConsistencyBucket::kLow).rendered,
            "Answer:  Answerable: False Consistency: Low");
}

TEST(CalibrationTarget, RoundTrip) {
  const std::vector<std::string> answers = {
      "", "paris", "Eric Liddell", "1924", "  spaced  ", "True", "High",
      "a: b", "Answer: nested", "Medium Low"};
  for (const auto& answer : answers) {
    for (const bool flag : {true, false}) {
      for (const auto bucket :
           {ConsistencyBucket::kLow, ConsistencyBucket::kMedium,
            ConsistencyBucket::kHigh}) {
        const auto rendered = RenderCalibrationTarget(answer, flag, bucket);
        const auto parsed = ParseCalibrationTarget(rendered.rendered);
        EXPECT_EQ(parsed.answer_text, answer);
        EXPECT_EQ(parsed.answerable, flag);
        EXPECT_EQ(parsed.consistency, bucket);
        EXPECT_EQ(parsed.rendered, rendered.rendered);
      }
    }
  }
}

TEST(CalibrationTarget, ParseErrors) {
  for (const char* bad :
       {"", "Answer: x", "Answer: x Answerable: Maybe Consistency: High",
        "Answer: x Answerable: True Consistency: Huge",
        "answer: x Answerable: True Consistency: High",
        "Answer: x Answerable: True Consistency: High "}) {
    EXPECT_THROW(ParseCalibrationTarget(bad), ValidationError) << bad;
  }
}

TEST(ConsistencyBucket, Names) {
  EXPECT_EQ(BucketName(ConsistencyBucket::kMedium), "Medium");
  EXPECT_EQ(ParseBucket("High"), ConsistencyBucket::kHigh);
  EXPECT_THROW(ParseBucket("high"), ValidationError);
}

}  // namespace
}  // namespace selqa
