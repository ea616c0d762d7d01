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

// Pipeline stages behind the selqa subcommands: label, score, select, eval,
// curves, recall and the toy-model demo. Every stage is a pure function of
// its inputs and the RunConfig; outputs are rendered to strings so callers
// can compare them byte for byte.

#ifndef SELQA_PIPELINE_H_
#define SELQA_PIPELINE_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "selqa/calibrate.h"
#include "selqa/prompting.h"
#include "selqa/records.h"
#include "selqa/select_eval.h"
#include "selqa/toy_lm.h"

namespace selqa {

// Rounds to the 4 decimals used in reports.
double Round4(double value);
std::string Fixed4(double value);

// ---- label -----------------------------------------------------------------

struct RecordLabels {
  std::string id;
  KnowledgeSource source = KnowledgeSource::kDocument;
  bool correct = false;
  // Absent when the record has no contexts.
  std::optional<int> answerability;
  // Absent when the record has no samples.
  std::optional<CalibrationLabels> consistency;
  // Present when both labels exist.
  std::optional<CalibrationTarget> target;
};

// Explicit thresholds from the config, else fitted on the fit_from file,
// else fitted on the records' own consistency labels (nullopt when fewer than
// three records carry samples).
std::optional<QuantileThresholds> ResolveQuantiles(
    std::span<const PredictionRecord> records, const RunConfig& config);

std::vector<RecordLabels> LabelRecords(
    std::span<const PredictionRecord> records,
    const std::optional<QuantileThresholds>& thresholds);

std::string RenderLabels(std::span<const RecordLabels> labels,
                         const std::optional<QuantileThresholds>& thresholds);

// ---- score / select ---------------------------------------------------------

std::string RenderScores(std::span<const PredictionRecord> records,
                         const RunConfig& config);
std::string RenderSelections(std::span<const PredictionRecord> records,
                             const RunConfig& config);

// ---- eval ------------------------------------------------------------------

struct CalibrationMetrics {
  std::optional<double> ece;  // absent when bins exceed the record count
  double auc = 0.0;
};

struct SourceMetrics {
  size_t n = 0;
  double em_accuracy = 0.0;
  // Only criteria every record of the source can be scored under.
  std::map<Criterion, CalibrationMetrics> calibration;
};

struct EvalReport {
  Criterion criterion = Criterion::kEnsemble;
  int bins = 10;
  bool length_normalize = true;
  std::map<KnowledgeSource, SourceMetrics> sources;
  size_t n_pairs = 0;
  // Over paired questions; absent without pairs.
  std::optional<double> em_accuracy;  // selection under `criterion`
  std::optional<double> oracle_accuracy;
  std::optional<double> document_accuracy;
  std::optional<double> qa_history_accuracy;
  std::map<Criterion, double> selection_accuracy;
  std::optional<SelectionRatioReport> selection_ratios;
  std::vector<UnpairedRecord> unpaired;
  std::vector<std::string> warnings;
};

EvalReport BuildEvalReport(std::span<const PredictionRecord> records,
                           const RunConfig& config,
                           const ScoreOptions& options);
EvalReport BuildEvalReport(std::span<const PredictionRecord> records,
                           const RunConfig& config);
nlohmann::ordered_json EvalReportToJson(const EvalReport& report);

// ---- curves ----------------------------------------------------------------

// File name -> CSV contents: risk_coverage_<source>.csv (coverage,risk),
// accuracy_coverage_<source>.csv (coverage,accuracy) and
// reliability_<source>.csv (bin_index,mean_confidence,mean_accuracy) for
// the configured criterion.
std::map<std::string, std::string> BuildCurves(
    std::span<const PredictionRecord> records, const RunConfig& config);

// ---- recall ----------------------------------------------------------------

nlohmann::ordered_json RecallReport(std::span<const PredictionRecord> records,
                                    std::span<const int> ks);

// ---- demo ------------------------------------------------------------------

struct DemoQuestion {
  Question question;
  bool train = false;
  std::vector<std::string> doc_passages;
  std::vector<QAPair> qa_pairs;
};

// {"version": "v1", "questions": [{"id", "question", "gold_answers",
//   "split": "train"|"test", "question_overlap"?, "doc_passages",
//   "qa_pairs": [{"question", "answer", "rank"}]}]}
std::vector<DemoQuestion> ParseDemoDataset(std::string_view json_text);
std::vector<DemoQuestion> LoadDemoDataset(const std::string& path);

// Reader prompt for one knowledge source: "<source>: <question>".
std::string ReaderPrompt(KnowledgeSource source, std::string_view question);
// Verbal-estimator prompt: reader prompt, then the template prefix
// "\nAnswer: <answer> Answerable:".
std::string VerbalPrompt(KnowledgeSource source, std::string_view question,
                         std::string_view answer);

// Decodes both sources, samples consistency labels, reads verbal
// probabilities, fits quantiles and temperature on the train split, then
// scores, selects and evaluates the test split. Returns output file name ->
// contents.
std::map<std::string, std::string> RunDemo(
    const ConditionalTable& model, std::span<const DemoQuestion> questions,
    const RunConfig& config);

}  // namespace selqa

#endif  // SELQA_PIPELINE_H_
