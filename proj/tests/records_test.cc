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

#include "selqa/records.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"

namespace selqa {
namespace {

constexpr const char* kHeader = "{\"version\":\"v1\"}\n";

std::string Line(const std::string& id, const std::string& source,
                 const std::string& answer = "Paris",
                 const std::string& extra = "") {
  return R"({"id":")" + id + R"(","question":"capital of France?",)" +
         R"("gold_answers":["Paris"],"source":")" + source +
         R"(","answer":")" + answer +
         R"(","contexts":["Paris is the capital"],"token_probs":[0.9,0.8],)" +
         R"("p_true":0.8,"p_high":0.6,"p_medium":0.2)" + extra + "}\n";
}

std::vector<PredictionRecord> Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseRecords(in);
}

std::vector<std::string> Violations(const std::string& text) {
  try {
    Parse(text);
  } catch (const RecordFileError& e) {
    return e.violations();
  }
  return {};
}

TEST(ParseRecords, TwoLineFile) {
  const auto records =
      Parse(std::string(kHeader) + Line("q1", "document") + Line("q1", "qa_history"));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].source, KnowledgeSource::kDocument);
  EXPECT_EQ(records[1].source, KnowledgeSource::kQAHistory);
  EXPECT_EQ(records[0].token_probs, (std::vector<double>{0.9, 0.8}));
  EXPECT_EQ(*records[0].p_high, 0.6);
}

TEST(ParseRecords, BlankLinesSkipped) {
  EXPECT_EQ(Parse(std::string("\n") + kHeader + "\n  \n" + Line("q1", "document"))
                .size(),
            1u);
}

TEST(ParseRecords, ZeroTokenProbNamesLineAndField) {
  std::string bad = Line("q2", "document");
  bad.replace(bad.find("[0.9,0.8]"), 9, "[0.9,0.0]");
  const auto v = Violations(std::string(kHeader) + Line("q1", "document") + bad);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("line 3"), std::string::npos) << v[0];
  EXPECT_NE(v[0].find("token_probs[1]"), std::string::npos) << v[0];
}

TEST(ParseRecords, DuplicateIdSource) {
  const auto v = Violations(std::string(kHeader) + Line("q1", "document") +
                            Line("q1", "document", "Lyon"));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("duplicate"), std::string::npos);
}

TEST(ParseRecords, UnknownFieldRejected) {
  const auto v = Violations(std::string(kHeader) +
                            Line("q1", "document", "Paris", R"(,"logit":1.0)"));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("logit: unknown field"), std::string::npos) << v[0];
}

TEST(ParseRecords, HeaderRequired) {
  auto v = Violations(Line("q1", "document"));
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v[0].find("line 1: version"), std::string::npos);
  v = Violations("{\"version\":\"v2\"}\n" + Line("q1", "document"));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("unsupported schema version"), std::string::npos);
  EXPECT_FALSE(Violations("").empty());
}

TEST(ParseRecords, CollectsEveryViolation) {
  const std::string text = std::string(kHeader) +
                           R"({"id":"a","source":"wiki","answer":"x"})" "\n" +
                           "not json\n" +
                           Line("b", "document", "Paris", R"(,"p_true":1.5)");
  const auto v = Violations(text);
  // line 2: question, gold_answers, source; line 3: JSON; line 4: p_true
  // out of range (the later duplicate key wins).
  EXPECT_GE(v.size(), 4u);
  bool saw_line3 = false;
  for (const auto& m : v) saw_line3 |= m.rfind("line 3:", 0) == 0;
  EXPECT_TRUE(saw_line3);
}

TEST(ParseRecords, VerbalSumBound) {
  const auto v = Violations(std::string(kHeader) +
                            R"({"id":"a","question":"q","gold_answers":["x"],)"
                            R"("source":"document","answer":"x",)"
                            R"("p_high":0.7,"p_medium":0.4})" "\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("p_high + p_medium"), std::string::npos);
}

TEST(WriteRecords, RoundTrip) {
  const auto records =
      Parse(std::string(kHeader) + Line("q1", "document") +
            Line("q1", "qa_history", "Lyon", R"(,"samples":["Paris","Lyon"],"question_overlap":true)"));
  std::ostringstream out;
  WriteRecords(out, records);
  const auto again = Parse(out.str());
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[1].answer, "Lyon");
  EXPECT_EQ(*again[1].samples, (std::vector<std::string>{"Paris", "Lyon"}));
  EXPECT_EQ(again[1].question_overlap, std::optional<bool>(true));
  std::ostringstream twice;
  WriteRecords(twice, again);
  EXPECT_EQ(out.str(), twice.str());
}

TEST(PairRecords, ThreeAndThree) {
  std::string text = kHeader;
  for (const char* id : {"c", "a", "b"}) {
    text += Line(id, "document") + Line(id, "qa_history", "Lyon");
  }
  const auto result = PairRecords(Parse(text), {});
  ASSERT_EQ(result.pairs.size(), 3u);
  EXPECT_TRUE(result.unpaired.empty());
  EXPECT_EQ(result.pairs[0].question.id, "a");
  EXPECT_EQ(result.pairs[2].question.id, "c");
  EXPECT_TRUE(result.pairs[0].doc.correct);
  EXPECT_FALSE(result.pairs[0].qa.correct);
}

TEST(PairRecords, ThreeAndTwo) {
  std::string text = kHeader;
  text += Line("a", "document") + Line("b", "document") + Line("c", "document");
  text += Line("a", "qa_history") + Line("c", "qa_history");
  const auto result = PairRecords(Parse(text), {});
  EXPECT_EQ(result.pairs.size(), 2u);
  ASSERT_EQ(result.unpaired.size(), 1u);
  EXPECT_EQ(result.unpaired[0].id, "b");
  EXPECT_EQ(result.unpaired[0].source, KnowledgeSource::kDocument);
}

TEST(PairRecords, Empty) {
  const auto result = PairRecords(std::vector<PredictionRecord>{}, {});
  EXPECT_TRUE(result.pairs.empty());
  EXPECT_TRUE(result.unpaired.empty());
}

TEST(ScoreRecord, Breakdown) {
  const auto records = Parse(std::string(kHeader) + Line("q1", "document"));
  const auto scored = ScoreRecord(records[0], {});
  // sqrt(0.9 * 0.8), 0.8, 0.6 + 0.5 * 0.2
  const double lik = std::sqrt(0.72);
  EXPECT_NEAR(*scored.scores.likelihood, lik, 1e-15);
  EXPECT_EQ(*scored.scores.answerability, 0.8);
  EXPECT_DOUBLE_EQ(*scored.scores.consistency, 0.7);
  EXPECT_NEAR(*scored.scores.ensemble, (lik + 0.8 + 0.7) / 3, 1e-15);
  EXPECT_TRUE(scored.correct);
  const auto raw = ScoreRecord(records[0], {false, std::nullopt});
  EXPECT_NEAR(*raw.scores.likelihood, 0.72, 1e-15);
  const auto batch = ScoreRecords(records, {});
  EXPECT_EQ(*batch[0].scores.likelihood, *scored.scores.likelihood);
}

TEST(RunConfig, Parsing) {
  const auto defaults = ParseRunConfig("{}");
  EXPECT_EQ(defaults.n_samples, 30);
  EXPECT_EQ(defaults.bins, 10);
  EXPECT_TRUE(defaults.length_normalize);
  EXPECT_EQ(defaults.criterion, Criterion::kEnsemble);
  const auto c = ParseRunConfig(
      R"({"global_seed": 7, "criterion": "likelihood", "quantiles": {"t1": 0.2, "t2": 0.5}})");
  EXPECT_EQ(c.global_seed, 7u);
  EXPECT_EQ(c.criterion, Criterion::kLikelihood);
  EXPECT_EQ(*c.quantiles.t2, 0.5);
  EXPECT_THROW(ParseRunConfig(R"({"seed": 1})"), ValidationError);
  EXPECT_THROW(ParseRunConfig(R"({"bins": 0})"), ValidationError);
  EXPECT_THROW(ParseRunConfig(R"({"quantiles": {"t1": 0.2}})"), ValidationError);
  EXPECT_THROW(ParseRunConfig("[1]"), ValidationError);
}

}  // namespace
}  // namespace selqa
