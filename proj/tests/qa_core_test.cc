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

#include <algorithm>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"

namespace selqa {
namespace {

using Golds = std::vector<std::string>;

TEST(NormalizeAnswer, Examples) {
  EXPECT_EQ(NormalizeAnswer("The Eiffel Tower!"), "eiffel tower");
  EXPECT_EQ(NormalizeAnswer(""), "");
  EXPECT_EQ(NormalizeAnswer("An  apple,  a day"), "apple day");
}

TEST(NormalizeAnswer, ArticlesOnlyAsWholeWords) {
  EXPECT_EQ(NormalizeAnswer("Theatre and anthem"), "theatre and anthem");
  EXPECT_EQ(NormalizeAnswer("\tA\n"), "");
}

TEST(NormalizeAnswer, NonAsciiPassesThrough) {
  EXPECT_EQ(NormalizeAnswer("Café  Zürich"), "café zürich");
}

TEST(NormalizeAnswer, IdempotentOnRandomText) {
  const std::string alphabet = "aAbnThe .,!'\t\n-xyz\xc3\xa9";
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) text.push_back(alphabet[pick(rng)]);
    const std::string once = NormalizeAnswer(text);
    EXPECT_EQ(NormalizeAnswer(once), once) << "input: " << text;
  }
}

TEST(ExactMatch, Examples) {
  EXPECT_TRUE(ExactMatch("Eric Liddell", Golds{"eric liddell"}));
  EXPECT_FALSE(ExactMatch("Hugh Hudson", Golds{"Eric Liddell"}));
  EXPECT_TRUE(ExactMatch("the paris", Golds{"Paris!"}));
}

TEST(ExactMatch, EmptyGoldsIsValidationError) {
  EXPECT_THROW(ExactMatch("x", Golds{}), ValidationError);
}

TEST(ExactMatch, InvariantUnderGoldPermutationAndSurfaceEdits) {
  Golds golds = {"Chariots of Fire", "Eric Liddell", "1924"};
  const std::vector<std::string> predictions = {
      "eric liddell", "THE Eric, Liddell.", "chariots of fire!", "1925", ""};
  std::vector<bool> expected;
  for (const auto& p : predictions) expected.push_back(ExactMatch(p, golds));
  std::sort(golds.begin(), golds.end());
  do {
    for (size_t i = 0; i < predictions.size(); ++i) {
      EXPECT_EQ(ExactMatch(predictions[i], golds), expected[i]);
    }
  } while (std::next_permutation(golds.begin(), golds.end()));
  EXPECT_TRUE(ExactMatch("an ERIC liddell?!", Golds{"Eric Liddell"}));
}

TEST(ContainsAnswer, Examples) {
  EXPECT_TRUE(ContainsAnswer(Golds{"Eric Liddell won the 400m in 1924"},
                             Golds{"Eric Liddell"}));
  EXPECT_FALSE(ContainsAnswer(Golds{"Hugh Hudson directed the film"},
                              Golds{"Eric Liddell"}));
}

TEST(ContainsAnswer, SpanAcrossPassageBoundary) {
  const Golds passages = {"...first half Eric", "Liddell second half..."};
  const Golds golds = {"Eric Liddell"};
  // Oracle: naive scan over the normalized space-joined text.
  const std::string joined =
      NormalizeAnswer(passages[0] + " " + passages[1]);
  ASSERT_TRUE(testing::NaiveContains(joined, NormalizeAnswer(golds[0])));
  EXPECT_TRUE(ContainsAnswer(passages, golds));
  EXPECT_FALSE(ContainsAnswer(passages, golds, ContainmentMode::kPerPassage));
}

TEST(ContainsAnswer, EmptyInputs) {
  EXPECT_THROW(ContainsAnswer(Golds{"x"}, Golds{}), ValidationError);
  EXPECT_FALSE(ContainsAnswer(Golds{}, Golds{"x"}));
  // A gold that normalizes to nothing never matches.
  EXPECT_FALSE(ContainsAnswer(Golds{"anything"}, Golds{"the"}));
}

TEST(ContainsAnswer, MatchesNaiveOracleOnRandomPassages) {
  const std::vector<std::string> words = {"eric", "liddell", "the", "won",
                                          "gold", "Paris,", "a", "1924"};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> count(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    Golds passages;
    const int n_passages = count(rng);
    for (int p = 0; p < n_passages; ++p) {
      std::string passage;
      const int n_words = count(rng);
      for (int w = 0; w < n_words; ++w) passage += words[pick(rng)] + " ";
      passages.push_back(passage);
    }
    const Golds golds = {words[pick(rng)] + " " + words[pick(rng)]};
    std::string joined;
    for (size_t i = 0; i < passages.size(); ++i) {
      joined += (i ? " " : "") + passages[i];
    }
    const std::string needle = NormalizeAnswer(golds[0]);
    const bool expected =
        !needle.empty() &&
        testing::NaiveContains(NormalizeAnswer(joined), needle);
    EXPECT_EQ(ContainsAnswer(passages, golds), expected);
  }
}

TEST(ContainsAnswer, AppendingPassageNeverFlipsTrueToFalse) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> words = {"eric", "liddell", "hudson", "film",
                                          "the"};
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  const Golds golds = {"eric liddell"};
  for (int trial = 0; trial < 300; ++trial) {
    Golds passages;
    bool before = false;
    for (int step = 0; step < 6; ++step) {
      passages.push_back(words[pick(rng)] + " " + words[pick(rng)]);
      const bool now = ContainsAnswer(passages, golds);
      EXPECT_FALSE(before && !now);
      before = now;
    }
  }
}

TEST(KnowledgeSource, NamesRoundTrip) {
  EXPECT_EQ(ParseSource(SourceName(KnowledgeSource::kDocument)),
            KnowledgeSource::kDocument);
  EXPECT_EQ(ParseSource("qa_history"), KnowledgeSource::kQAHistory);
  EXPECT_THROW(ParseSource("wiki"), ValidationError);
}

TEST(Question, Validation) {
  EXPECT_NO_THROW(ValidateQuestion({"q", "who?", {"Eric"}, std::nullopt}));
  EXPECT_THROW(ValidateQuestion({"q", "who?", {}, std::nullopt}),
               ValidationError);
  EXPECT_THROW(ValidateQuestion({"q", "who?", {"The!"}, std::nullopt}),
               ValidationError);
}

}  // namespace
}  // namespace selqa
