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

// Prediction-record ingestion.
//
// A record file is line-delimited JSON. The first line is the header
// {"version": "v1"}; every following non-blank line is one record:
//
//   id                string, required, unique together with source
//   question          string, required
//   gold_answers      non-empty list of strings, required
//   source            "document" | "qa_history", required
//   answer            string, required
//   contexts          list of strings, retrieval order
//   token_probs       list of numbers in (0, 1], one per decoded token
//   p_true            number in [0, 1]
//   p_high, p_medium  numbers in [0, 1], p_high + p_medium <= 1 + 1e-9
//   samples           non-empty list of strings (sampled answers)
//   question_overlap  boolean
//
// Unknown fields are rejected.

#ifndef SELQA_RECORDS_H_
#define SELQA_RECORDS_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "selqa/calibrate.h"
#include "selqa/qa_core.h"
#include "selqa/select_eval.h"

namespace selqa {

inline constexpr std::string_view kSchemaVersion = "v1";

struct PredictionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  KnowledgeSource source = KnowledgeSource::kDocument;
  std::vector<std::string> contexts;
  std::string answer;
  std::vector<double> token_probs;
  std::optional<double> p_true;
  std::optional<double> p_high;
  std::optional<double> p_medium;
  std::optional<std::vector<std::string>> samples;
  std::optional<bool> question_overlap;
};

// All violations found in a record file, each "line N: field: message".
class RecordFileError : public ValidationError {
 public:
  explicit RecordFileError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

std::vector<PredictionRecord> ParseRecords(std::istream& in);
// Throws RecordFileError listing every violation.
std::vector<PredictionRecord> ValidateAndLoad(const std::string& path);

nlohmann::ordered_json RecordToJson(const PredictionRecord& record);
// Header line then one record per line, LF endings.
void WriteRecords(std::ostream& out, std::span<const PredictionRecord> records);

struct QuantileSource {
  // Explicit cut points; when unset they are fitted (from fit_from if given,
  // otherwise from the consistency labels of the input itself).
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<std::string> fit_from;
};

struct RunConfig {
  uint64_t global_seed = 0;
  int n_samples = kDefaultConsistencySamples;
  int bins = 10;
  bool length_normalize = true;
  Criterion criterion = Criterion::kEnsemble;
  QuantileSource quantiles;
};

// Closed JSON object with the RunConfig field names; missing fields keep
// their defaults.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::string& path);

struct ScoreOptions {
  bool length_normalize = true;
  // Applied to the likelihood score when set.
  std::optional<double> temperature;
};

// Likelihood from token_probs, answerability and consistency from the verbal
// probabilities, ensemble when all three exist. Correctness is exact match.
ScoredPrediction ScoreRecord(const PredictionRecord& record,
                             const ScoreOptions& options);
// Same, with the likelihoods computed by the parallel batch kernel.
std::vector<ScoredPrediction> ScoreRecords(
    std::span<const PredictionRecord> records, const ScoreOptions& options);

// Full breakdown; nullopt unless token_probs and all verbal probabilities are
// present.
std::optional<ConfidenceBreakdown> Breakdown(const PredictionRecord& record,
                                             const ScoreOptions& options);

struct UnpairedRecord {
  std::string id;
  KnowledgeSource source;
};

struct PairingResult {
  std::vector<PairedPrediction> pairs;  // sorted by id
  std::vector<UnpairedRecord> unpaired;  // sorted by (id, source)
};

// Joins document and qa_history records by id. The question comes from the
// document record.
PairingResult PairRecords(std::span<const PredictionRecord> records,
                          const ScoreOptions& options);

}  // namespace selqa

#endif  // SELQA_RECORDS_H_
