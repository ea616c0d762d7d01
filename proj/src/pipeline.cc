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

#include "selqa/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "selqa/kernels.h"

namespace selqa {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr KnowledgeSource kSources[] = {KnowledgeSource::kDocument,
                                        KnowledgeSource::kQAHistory};

ordered_json OptionalNumber(const std::optional<double>& v) {
  return v ? ordered_json(Round4(*v)) : ordered_json(nullptr);
}

ordered_json RawOptional(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ScoreOptions OptionsFrom(const RunConfig& config) {
  return {config.length_normalize, std::nullopt};
}

std::vector<double> ConsistencyValues(
    std::span<const PredictionRecord> records, bool require_all) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (!r.samples) {
      if (require_all) {
        throw ValidationError("record '" + r.id +
                              "' has no samples for quantile fitting");
      }
      continue;
    }
    values.push_back(ConsistencyLabel(*r.samples, r.gold_answers));
  }
  return values;
}

ordered_json ThresholdsJson(const std::optional<QuantileThresholds>& q) {
  if (!q) return nullptr;
  ordered_json j;
  j["t1"] = q->t1;
  j["t2"] = q->t2;
  return j;
}

ordered_json RatiosJson(const SelectionRatioReport& report) {
  ordered_json subsets = ordered_json::object();
  // Fixed reporting order.
  for (const char* name :
       {"all", "question_overlap", "no_overlap", "case1", "case2"}) {
    auto it = report.subsets.find(name);
    if (it == report.subsets.end()) continue;
    ordered_json s;
    s["n"] = it->second.n;
    s["document"] = Round4(it->second.document);
    s["qa_history"] = Round4(it->second.qa_history);
    subsets[name] = s;
  }
  return subsets;
}

std::vector<Outcome> OutcomesFor(std::span<const PredictionRecord> records,
                                 std::span<const ScoredPrediction> scored,
                                 KnowledgeSource source, Criterion criterion,
                                 size_t* missing) {
  std::vector<Outcome> out;
  *missing = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].source != source) continue;
    const auto conf = scored[i].scores.Find(criterion);
    if (!conf) {
      ++*missing;
      continue;
    }
    out.push_back({*conf, scored[i].correct, records[i].id});
  }
  return out;
}

bool PairsHave(std::span<const PairedPrediction> pairs, Criterion criterion) {
  return std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) {
    return p.doc.scores.Find(criterion) && p.qa.scores.Find(criterion);
  });
}

std::string CsvRow(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row.push_back(',');
    row += c;
  }
  return row + "\n";
}

}  // namespace

double Round4(double value) { return std::round(value * 1e4) / 1e4 + 0.0; }

std::string Fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

// ---- label -----------------------------------------------------------------

std::optional<QuantileThresholds> ResolveQuantiles(
    std::span<const PredictionRecord> records, const RunConfig& config) {
  if (config.quantiles.t1) {
    QuantileThresholds q;
    q.t1 = *config.quantiles.t1;
    q.t2 = *config.quantiles.t2;
    return q;
  }
  if (config.quantiles.fit_from) {
    const auto training = ValidateAndLoad(*config.quantiles.fit_from);
    return FitQuantiles(ConsistencyValues(training, true));
  }
  const auto values = ConsistencyValues(records, false);
  if (values.size() < 3) return std::nullopt;
  return FitQuantiles(values);
}

std::vector<RecordLabels> LabelRecords(
    std::span<const PredictionRecord> records,
    const std::optional<QuantileThresholds>& thresholds) {
  std::vector<RecordLabels> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    RecordLabels labels;
    labels.id = r.id;
    labels.source = r.source;
    labels.correct = ExactMatch(r.answer, r.gold_answers);
    if (!r.contexts.empty()) {
      labels.answerability =
          AnswerabilityLabel({r.source, r.contexts}, r.gold_answers);
    }
    if (r.samples) {
      CalibrationLabels c;
      c.answerability = labels.answerability.value_or(0);
      c.consistent_samples = CountConsistentSamples(*r.samples, r.gold_answers);
      c.n_samples = static_cast<int>(r.samples->size());
      if (thresholds) {
        c.consistency_bucket = Bucketize(c.consistency(), *thresholds);
        if (labels.answerability) {
          labels.target = RenderCalibrationTarget(
              r.answer, *labels.answerability == 1, c.consistency_bucket);
        }
      }
      labels.consistency = c;
    }
    out.push_back(std::move(labels));
  }
  return out;
}

std::string RenderLabels(std::span<const RecordLabels> labels,
                         const std::optional<QuantileThresholds>& thresholds) {
  std::ostringstream out;
  ordered_json header;
  header["version"] = kSchemaVersion;
  header["quantiles"] = ThresholdsJson(thresholds);
  out << header.dump() << '\n';
  for (const auto& l : labels) {
    ordered_json j;
    j["id"] = l.id;
    j["source"] = SourceName(l.source);
    j["correct"] = l.correct;
    j["answerability"] =
        l.answerability ? ordered_json(*l.answerability) : ordered_json(nullptr);
    if (l.consistency) {
      j["consistency"] = l.consistency->consistency();
      j["consistent_samples"] = l.consistency->consistent_samples;
      j["n_samples"] = l.consistency->n_samples;
      j["consistency_bucket"] =
          thresholds ? ordered_json(BucketName(l.consistency->consistency_bucket))
                     : ordered_json(nullptr);
    } else {
      j["consistency"] = nullptr;
    }
    j["target"] = l.target ? ordered_json(l.target->rendered) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
  return out.str();
}

// ---- score / select ---------------------------------------------------------

std::string RenderScores(std::span<const PredictionRecord> records,
                         const RunConfig& config) {
  const auto scored = ScoreRecords(records, OptionsFrom(config));
  std::ostringstream out;
  ordered_json header;
  header["version"] = kSchemaVersion;
  header["length_normalize"] = config.length_normalize;
  out << header.dump() << '\n';
  for (size_t i = 0; i < records.size(); ++i) {
    ordered_json j;
    j["id"] = records[i].id;
    j["source"] = SourceName(records[i].source);
    j["correct"] = scored[i].correct;
    j["lm_likelihood"] = RawOptional(scored[i].scores.likelihood);
    j["p_answerable"] = RawOptional(scored[i].scores.answerability);
    j["p_consistent"] = RawOptional(scored[i].scores.consistency);
    j["ensemble"] = RawOptional(scored[i].scores.ensemble);
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string RenderSelections(std::span<const PredictionRecord> records,
                             const RunConfig& config) {
  const PairingResult paired = PairRecords(records, OptionsFrom(config));
  std::ostringstream out;
  ordered_json header;
  header["version"] = kSchemaVersion;
  header["criterion"] = CriterionName(config.criterion);
  header["pairs"] = paired.pairs.size();
  header["unpaired"] = paired.unpaired.size();
  out << header.dump() << '\n';
  for (const auto& pair : paired.pairs) {
    const Selection s = SelectAnswer(pair, config.criterion);
    ordered_json j;
    j["id"] = pair.question.id;
    j["source"] = SourceName(s.source);
    j["answer"] = s.answer;
    j["correct"] = s.correct;
    j["conf_document"] = pair.doc.scores.Get(config.criterion);
    j["conf_qa_history"] = pair.qa.scores.Get(config.criterion);
    out << j.dump() << '\n';
  }
  return out.str();
}

// ---- eval ------------------------------------------------------------------

EvalReport BuildEvalReport(std::span<const PredictionRecord> records,
                           const RunConfig& config,
                           const ScoreOptions& options) {
  EvalReport report;
  report.criterion = config.criterion;
  report.bins = config.bins;
  report.length_normalize = options.length_normalize;

  const auto scored = ScoreRecords(records, options);
  for (const KnowledgeSource source : kSources) {
    SourceMetrics metrics;
    size_t correct = 0;
    for (size_t i = 0; i < records.size(); ++i) {
      if (records[i].source != source) continue;
      ++metrics.n;
      if (scored[i].correct) ++correct;
    }
    if (metrics.n == 0) continue;
    metrics.em_accuracy =
        static_cast<double>(correct) / static_cast<double>(metrics.n);
    for (const Criterion criterion : kAllCriteria) {
      size_t missing = 0;
      const auto outcomes =
          OutcomesFor(records, scored, source, criterion, &missing);
      if (outcomes.empty()) continue;
      if (missing > 0) {
        report.warnings.push_back(
            std::string(CriterionName(criterion)) + " unavailable for " +
            std::string(SourceName(source)) + ": " + std::to_string(missing) +
            " records lack the score");
        continue;
      }
      CalibrationMetrics cm;
      if (static_cast<size_t>(config.bins) <= outcomes.size()) {
        cm.ece = Ece(outcomes, config.bins);
      } else {
        report.warnings.push_back(
            "ece skipped for " + std::string(SourceName(source)) + "/" +
            std::string(CriterionName(criterion)) + ": bins exceed records");
      }
      cm.auc = Auc(RiskCoverage(outcomes));
      metrics.calibration[criterion] = cm;
    }
    report.sources[source] = std::move(metrics);
  }

  PairingResult paired = PairRecords(records, options);
  report.unpaired = paired.unpaired;
  report.n_pairs = paired.pairs.size();
  if (!paired.pairs.empty()) {
    size_t doc = 0;
    size_t qa = 0;
    for (const auto& p : paired.pairs) {
      doc += p.doc.correct ? 1 : 0;
      qa += p.qa.correct ? 1 : 0;
    }
    const double n = static_cast<double>(paired.pairs.size());
    report.document_accuracy = static_cast<double>(doc) / n;
    report.qa_history_accuracy = static_cast<double>(qa) / n;
    report.oracle_accuracy = OracleUpperBound(paired.pairs);
    for (const Criterion criterion : kAllCriteria) {
      if (!PairsHave(paired.pairs, criterion)) continue;
      report.selection_accuracy[criterion] =
          SelectionAccuracy(paired.pairs, criterion);
    }
    if (auto it = report.selection_accuracy.find(config.criterion);
        it != report.selection_accuracy.end()) {
      report.em_accuracy = it->second;
      report.selection_ratios = SelectionRatio(paired.pairs, config.criterion);
    } else {
      report.warnings.push_back("selection under " +
                                std::string(CriterionName(config.criterion)) +
                                " skipped: some pairs lack the score");
    }
  }
  return report;
}

EvalReport BuildEvalReport(std::span<const PredictionRecord> records,
                           const RunConfig& config) {
  return BuildEvalReport(records, config, OptionsFrom(config));
}

ordered_json EvalReportToJson(const EvalReport& report) {
  ordered_json j;
  j["version"] = kSchemaVersion;
  j["config"]["criterion"] = CriterionName(report.criterion);
  j["config"]["bins"] = report.bins;
  j["config"]["length_normalize"] = report.length_normalize;

  ordered_json sources = ordered_json::object();
  for (const auto& [source, m] : report.sources) {
    ordered_json s;
    s["n"] = m.n;
    s["em_accuracy"] = Round4(m.em_accuracy);
    ordered_json cal = ordered_json::object();
    for (const auto& [criterion, cm] : m.calibration) {
      cal[std::string(CriterionName(criterion))]["ece"] = OptionalNumber(cm.ece);
      cal[std::string(CriterionName(criterion))]["auc"] = Round4(cm.auc);
    }
    s["calibration"] = cal;
    sources[std::string(SourceName(source))] = s;
  }
  j["sources"] = sources;

  ordered_json sel;
  sel["n_pairs"] = report.n_pairs;
  sel["criterion"] = CriterionName(report.criterion);
  sel["em_accuracy"] = OptionalNumber(report.em_accuracy);
  sel["oracle_accuracy"] = OptionalNumber(report.oracle_accuracy);
  sel["document_accuracy"] = OptionalNumber(report.document_accuracy);
  sel["qa_history_accuracy"] = OptionalNumber(report.qa_history_accuracy);
  ordered_json by = ordered_json::object();
  for (const auto& [criterion, acc] : report.selection_accuracy) {
    by[std::string(CriterionName(criterion))] = Round4(acc);
  }
  sel["accuracy_by_criterion"] = by;
  if (report.selection_ratios) {
    sel["selection_ratios"] = RatiosJson(*report.selection_ratios);
    sel["case2_residual_error"] =
        OptionalNumber(report.selection_ratios->case2_residual_error);
  } else {
    sel["selection_ratios"] = nullptr;
    sel["case2_residual_error"] = nullptr;
  }
  j["selection"] = sel;

  ordered_json unpaired = ordered_json::array();
  for (const auto& u : report.unpaired) {
    unpaired.push_back({{"id", u.id}, {"source", SourceName(u.source)}});
  }
  j["unpaired"] = unpaired;
  j["warnings"] = report.warnings;
  return j;
}

// ---- curves ----------------------------------------------------------------

std::map<std::string, std::string> BuildCurves(
    std::span<const PredictionRecord> records, const RunConfig& config) {
  const auto scored = ScoreRecords(records, OptionsFrom(config));
  std::map<std::string, std::string> files;
  for (const KnowledgeSource source : kSources) {
    size_t missing = 0;
    const auto outcomes =
        OutcomesFor(records, scored, source, config.criterion, &missing);
    if (outcomes.empty() || missing > 0) continue;
    const std::string suffix = std::string(SourceName(source)) + ".csv";

    std::string risk = CsvRow({"coverage", "risk"});
    std::string accuracy = CsvRow({"coverage", "accuracy"});
    for (const auto& p : RiskCoverage(outcomes)) {
      risk += CsvRow({Fixed4(p.coverage), Fixed4(p.risk)});
      accuracy += CsvRow({Fixed4(p.coverage), Fixed4(1.0 - p.risk)});
    }
    files["risk_coverage_" + suffix] = risk;
    files["accuracy_coverage_" + suffix] = accuracy;

    if (static_cast<size_t>(config.bins) <= outcomes.size()) {
      std::string rel = CsvRow({"bin_index", "mean_confidence", "mean_accuracy"});
      for (const auto& b : DensityBins(outcomes, config.bins)) {
        rel += CsvRow({std::to_string(b.index), Fixed4(b.mean_confidence),
                       Fixed4(b.mean_accuracy)});
      }
      files["reliability_" + suffix] = rel;
    }
  }
  if (files.empty()) {
    throw ValidationError("no source has " +
                          std::string(CriterionName(config.criterion)) +
                          " scores for every record");
  }
  return files;
}

// ---- recall ----------------------------------------------------------------

ordered_json RecallReport(std::span<const PredictionRecord> records,
                          std::span<const int> ks) {
  ordered_json report;
  report["version"] = kSchemaVersion;
  ordered_json sources = ordered_json::object();
  for (const KnowledgeSource source : kSources) {
    std::vector<Retrieval> retrievals;
    for (const auto& r : records) {
      if (r.source == source && !r.contexts.empty()) {
        retrievals.push_back({r.contexts, r.gold_answers});
      }
    }
    if (retrievals.empty()) continue;
    ordered_json rows = ordered_json::array();
    for (const int k : ks) {
      const RecallResult res = RecallAtK(retrievals, k);
      ordered_json row;
      row["k"] = k;
      row["recall"] = Round4(res.recall);
      row["short_lists"] = res.short_lists;
      rows.push_back(row);
    }
    ordered_json s;
    s["n"] = retrievals.size();
    s["recall_at_k"] = rows;
    sources[std::string(SourceName(source))] = s;
  }
  report["sources"] = sources;
  return report;
}

// ---- demo ------------------------------------------------------------------

std::vector<DemoQuestion> ParseDemoDataset(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("demo dataset is not valid JSON: ") +
                          e.what());
  }
  std::vector<DemoQuestion> out;
  std::set<std::string> ids;
  try {
    if (doc.at("version") != kSchemaVersion) {
      throw ValidationError("demo dataset: unsupported version");
    }
    for (const auto& q : doc.at("questions")) {
      DemoQuestion d;
      d.question.id = q.at("id").get<std::string>();
      d.question.text = q.at("question").get<std::string>();
      d.question.gold_answers =
          q.at("gold_answers").get<std::vector<std::string>>();
      if (q.contains("question_overlap")) {
        d.question.question_overlap = q["question_overlap"].get<bool>();
      }
      const std::string split = q.at("split").get<std::string>();
      if (split != "train" && split != "test") {
        throw ValidationError("demo dataset: split must be train or test");
      }
      d.train = split == "train";
      d.doc_passages = q.value("doc_passages", std::vector<std::string>{});
      for (const auto& p : q.value("qa_pairs", json::array())) {
        d.qa_pairs.push_back({p.at("question").get<std::string>(),
                              p.at("answer").get<std::string>(),
                              p.at("rank").get<int>()});
      }
      ValidateQuestion(d.question);
      if (!ids.insert(d.question.id).second) {
        throw ValidationError("demo dataset: duplicate id " + d.question.id);
      }
      out.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed demo dataset: ") + e.what());
  }
  return out;
}

std::vector<DemoQuestion> LoadDemoDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open demo dataset " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseDemoDataset(buffer.str());
}

std::string ReaderPrompt(KnowledgeSource source, std::string_view question) {
  return std::string(SourceName(source)) + ": " + std::string(question);
}

std::string VerbalPrompt(KnowledgeSource source, std::string_view question,
                         std::string_view answer) {
  return ReaderPrompt(source, question) + "\nAnswer: " + std::string(answer) +
         " Answerable:";
}

namespace {

struct VerbalReading {
  double p_true = 0.0;
  double p_high = 0.0;
  double p_medium = 0.0;
};

// P(True) at the answerability slot; P(High), P(Medium) at the consistency
// slot after the greedily decoded answerability word.
VerbalReading ReadVerbal(const ConditionalTable& model,
                         const std::string& prompt) {
  const Vocabulary& v = model.vocabulary();
  const auto& first = model.At(prompt, {});
  const DecodedAnswer decoded = GreedyDecode(model, prompt);
  const TokenId flag = decoded.tokens.front();
  if (flag != v.id("True") && flag != v.id("False")) {
    throw ModelCoverageError("verbal estimator did not emit True/False at " +
                             model.DescribeState(prompt, {}));
  }
  const auto& second = model.At(prompt, {flag});
  return {first[v.id("True")], second[v.id("High")], second[v.id("Medium")]};
}

std::string JoinLines(std::span<const PredictionRecord> records) {
  std::ostringstream out;
  WriteRecords(out, records);
  return out.str();
}

}  // namespace

std::map<std::string, std::string> RunDemo(
    const ConditionalTable& model, std::span<const DemoQuestion> questions,
    const RunConfig& config) {
  // Decode every (question, source) with context.
  std::vector<PredictionRecord> records;
  std::vector<bool> is_train;
  std::vector<kernels::ConsistencyJob> jobs;
  for (const auto& q : questions) {
    std::optional<std::string> qa_passage;
    if (!q.qa_pairs.empty()) {
      qa_passage = BuildQAHistoryPassage(q.question.text, q.qa_pairs);
    }
    if (q.doc_passages.empty() && !qa_passage) continue;
    for (const ContextSet& ctx :
         AssembleContexts(q.question.text, q.doc_passages, qa_passage,
                          ContextMode::kSeparate)) {
      const std::string prompt = ReaderPrompt(ctx.source, q.question.text);
      const DecodedAnswer decoded = GreedyDecode(model, prompt);
      const VerbalReading verbal = ReadVerbal(
          model, VerbalPrompt(ctx.source, q.question.text, decoded.answer_text));

      PredictionRecord r;
      r.id = q.question.id;
      r.question = q.question.text;
      r.gold_answers = q.question.gold_answers;
      r.source = ctx.source;
      r.contexts = ctx.passages;
      r.answer = decoded.answer_text;
      r.token_probs = decoded.step_probs;
      r.p_true = verbal.p_true;
      r.p_high = verbal.p_high;
      r.p_medium = verbal.p_medium;
      r.question_overlap = q.question.question_overlap;
      jobs.push_back({prompt, r.gold_answers,
                      DeriveSeed(config.global_seed,
                                 std::string(SourceName(r.source)) + ":" + r.id)});
      records.push_back(std::move(r));
      is_train.push_back(q.train);
    }
  }

  // Consistency samples, fanned out per record.
  auto sample_sets = kernels::parallel::BatchConsistencySamples(
      model, jobs, config.n_samples);
  for (size_t i = 0; i < records.size(); ++i) {
    records[i].samples = std::move(sample_sets[i].samples);
  }

  std::vector<PredictionRecord> train;
  std::vector<PredictionRecord> test;
  for (size_t i = 0; i < records.size(); ++i) {
    (is_train[i] ? train : test).push_back(records[i]);
  }
  if (test.empty()) throw ValidationError("demo dataset has no test questions");

  // Verbal-estimator supervision from the train split.
  std::optional<QuantileThresholds> thresholds;
  if (config.quantiles.t1 || config.quantiles.fit_from) {
    thresholds = ResolveQuantiles(train, config);
  } else {
    thresholds = FitQuantiles(ConsistencyValues(train, true));
  }
  const auto train_labels = LabelRecords(train, thresholds);
  const auto test_labels = LabelRecords(test, thresholds);

  EvalReport eval = BuildEvalReport(test, config);
  ordered_json report = EvalReportToJson(eval);

  ordered_json demo;
  demo["seed"] = config.global_seed;
  demo["n_samples"] = config.n_samples;
  const auto n_train_questions = std::count_if(
      questions.begin(), questions.end(), [](const auto& q) { return q.train; });
  demo["questions"]["train"] = n_train_questions;
  demo["questions"]["test"] =
      static_cast<int64_t>(questions.size()) - n_train_questions;
  demo["records"]["train"] = train.size();
  demo["records"]["test"] = test.size();
  ordered_json q;
  q["t1"] = Round4(thresholds->t1);
  q["t2"] = Round4(thresholds->t2);
  q["train_group_sizes"] = thresholds->group_sizes;
  demo["quantiles"] = q;

  // Label summaries on the test split.
  ordered_json labels = ordered_json::object();
  for (const KnowledgeSource source : kSources) {
    double answerable = 0.0;
    double consistency = 0.0;
    size_t n = 0;
    for (const auto& l : test_labels) {
      if (l.source != source) continue;
      answerable += l.answerability.value_or(0);
      consistency += l.consistency ? l.consistency->consistency() : 0.0;
      ++n;
    }
    if (n == 0) continue;
    labels[std::string(SourceName(source))]["mean_answerability"] =
        Round4(answerable / n);
    labels[std::string(SourceName(source))]["mean_consistency"] =
        Round4(consistency / n);
  }
  demo["test_labels"] = labels;

  // Temperature scaling of the likelihood, fitted per source on train.
  ordered_json ts = ordered_json::object();
  std::map<KnowledgeSource, double> temperatures;
  const ScoreOptions base = OptionsFrom(config);
  const auto train_scored = ScoreRecords(train, base);
  for (const KnowledgeSource source : kSources) {
    size_t missing = 0;
    const auto dev = OutcomesFor(train, train_scored, source,
                                 Criterion::kLikelihood, &missing);
    if (dev.empty()) continue;
    const int bins = std::min<int>(config.bins, static_cast<int>(dev.size()));
    const TemperatureFit fit = FitTemperature(dev, bins);
    temperatures[source] = fit.temperature;

    std::vector<PredictionRecord> test_source;
    for (const auto& r : test) {
      if (r.source == source) test_source.push_back(r);
    }
    const auto scaled = ScoreRecords(test_source, {base.length_normalize,
                                                   fit.temperature});
    const auto plain = ScoreRecords(test_source, base);
    std::vector<Outcome> scaled_outcomes;
    std::vector<Outcome> plain_outcomes;
    for (size_t i = 0; i < test_source.size(); ++i) {
      scaled_outcomes.push_back(
          {*scaled[i].scores.likelihood, scaled[i].correct, test_source[i].id});
      plain_outcomes.push_back(
          {*plain[i].scores.likelihood, plain[i].correct, test_source[i].id});
    }
    const int test_bins =
        std::min<int>(config.bins, static_cast<int>(scaled_outcomes.size()));
    ordered_json s;
    s["temperature"] = Round4(fit.temperature);
    s["dev_ece"] = Round4(fit.ece);
    s["test_ece"] = Round4(Ece(plain_outcomes, test_bins));
    s["test_ece_scaled"] = Round4(Ece(scaled_outcomes, test_bins));
    s["test_auc"] = Round4(Auc(RiskCoverage(plain_outcomes)));
    s["test_auc_scaled"] = Round4(Auc(RiskCoverage(scaled_outcomes)));
    ts[std::string(SourceName(source))] = s;
  }
  if (temperatures.size() == 2) {
    PairingResult paired = PairRecords(test, base);
    for (auto& p : paired.pairs) {
      p.doc.scores.likelihood = TemperatureScale(
          *p.doc.scores.likelihood, temperatures[KnowledgeSource::kDocument]);
      p.qa.scores.likelihood = TemperatureScale(
          *p.qa.scores.likelihood, temperatures[KnowledgeSource::kQAHistory]);
    }
    if (!paired.pairs.empty()) {
      ts["selection_accuracy"] =
          Round4(SelectionAccuracy(paired.pairs, Criterion::kLikelihood));
    }
  }
  demo["temperature_scaling"] = ts;

  // Retrieval recall of the document passages, and of the concatenated
  // document + QA-history context.
  size_t max_docs = 0;
  std::vector<Retrieval> concat;
  for (const auto& dq : questions) {
    if (dq.train) continue;
    max_docs = std::max(max_docs, dq.doc_passages.size());
    std::optional<std::string> qa_passage;
    if (!dq.qa_pairs.empty()) {
      qa_passage = BuildQAHistoryPassage(dq.question.text, dq.qa_pairs);
    }
    if (dq.doc_passages.empty() && !qa_passage) continue;
    const auto ctx = AssembleContexts(dq.question.text, dq.doc_passages,
                                      qa_passage, ContextMode::kConcat);
    concat.push_back({ctx.front().passages, dq.question.gold_answers});
  }
  std::vector<int> ks;
  for (size_t k = 1; k <= max_docs; ++k) ks.push_back(static_cast<int>(k));
  if (!ks.empty()) demo["recall"] = RecallReport(test, ks)["sources"];
  if (!concat.empty()) {
    demo["concat_recall"] =
        Round4(RecallAtK(concat, static_cast<int>(max_docs + 1)).recall);
  }
  report["demo"] = demo;

  std::map<std::string, std::string> files;
  files["report.json"] = report.dump(2) + "\n";
  files["train_records.jsonl"] = JoinLines(train);
  files["test_records.jsonl"] = JoinLines(test);
  files["calibration_targets.jsonl"] = RenderLabels(train_labels, thresholds);
  for (auto& [name, contents] : BuildCurves(test, config)) {
    files["curves/" + name] = std::move(contents);
  }
  return files;
}

}  // namespace selqa
