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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "selqa/kernels.h"

namespace selqa {
namespace {

using nlohmann::json;

constexpr double kVerbalSumTolerance = 1e-9;

const std::set<std::string>& RecordFields() {
  static const std::set<std::string> fields = {
      "id",          "question", "gold_answers", "source",
      "contexts",    "answer",   "token_probs",  "p_true",
      "p_high",      "p_medium", "samples",      "question_overlap"};
  return fields;
}

std::string JoinMessages(const std::vector<std::string>& messages) {
  std::string out = "invalid record file:";
  for (const auto& m : messages) out += "\n  " + m;
  return out;
}

bool IsBlank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

// Collects field-level violations for one line.
class LineChecker {
 public:
  LineChecker(size_t line, std::vector<std::string>* violations)
      : line_(line), violations_(violations) {}

  void Fail(std::string_view field, std::string_view message) {
    violations_->push_back("line " + std::to_string(line_) + ": " +
                           std::string(field) + ": " + std::string(message));
    ok_ = false;
  }
  bool ok() const { return ok_; }

  std::optional<std::string> String(const json& obj, const char* field,
                                    bool required) {
    auto it = obj.find(field);
    if (it == obj.end()) {
      if (required) Fail(field, "missing required field");
      return std::nullopt;
    }
    if (!it->is_string()) {
      Fail(field, "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<std::vector<std::string>> Strings(const json& obj,
                                                  const char* field,
                                                  bool required) {
    auto it = obj.find(field);
    if (it == obj.end()) {
      if (required) Fail(field, "missing required field");
      return std::nullopt;
    }
    if (!it->is_array()) {
      Fail(field, "expected a list of strings");
      return std::nullopt;
    }
    std::vector<std::string> out;
    for (size_t i = 0; i < it->size(); ++i) {
      const json& v = (*it)[i];
      if (!v.is_string()) {
        Fail(field, "element " + std::to_string(i) + " is not a string");
        return std::nullopt;
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  // Number in [lo, hi]; lower bound exclusive when open_low.
  std::optional<double> Number(const json& v, std::string_view field, double lo,
                               double hi, bool open_low) {
    if (!v.is_number()) {
      Fail(field, "expected a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    const bool low_ok = open_low ? x > lo : x >= lo;
    if (!std::isfinite(x) || !low_ok || x > hi) {
      std::ostringstream msg;
      msg << "value " << x << " outside " << (open_low ? "(" : "[") << lo
          << ", " << hi << "]";
      Fail(field, msg.str());
      return std::nullopt;
    }
    return x;
  }

  std::optional<double> Probability(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) return std::nullopt;
    return Number(*it, field, 0.0, 1.0, false);
  }

 private:
  size_t line_;
  std::vector<std::string>* violations_;
  bool ok_ = true;
};

std::optional<PredictionRecord> ParseRecordLine(const json& obj,
                                                LineChecker& check) {
  if (!obj.is_object()) {
    check.Fail("record", "expected a JSON object");
    return std::nullopt;
  }
  for (const auto& [key, value] : obj.items()) {
    if (!RecordFields().contains(key)) check.Fail(key, "unknown field");
  }

  PredictionRecord r;
  if (auto v = check.String(obj, "id", true)) {
    if (v->empty()) check.Fail("id", "must be non-empty");
    r.id = *v;
  }
  if (auto v = check.String(obj, "question", true)) r.question = *v;
  if (auto v = check.Strings(obj, "gold_answers", true)) {
    if (v->empty()) check.Fail("gold_answers", "must be non-empty");
    for (const auto& g : *v) {
      if (NormalizeAnswer(g).empty()) {
        check.Fail("gold_answers", "answer '" + g + "' normalizes to empty");
      }
    }
    r.gold_answers = *v;
  }
  if (auto v = check.String(obj, "source", true)) {
    try {
      r.source = ParseSource(*v);
    } catch (const ValidationError& e) {
      check.Fail("source", e.what());
    }
  }
  if (auto v = check.String(obj, "answer", true)) r.answer = *v;
  if (auto v = check.Strings(obj, "contexts", false)) r.contexts = *v;

  if (auto it = obj.find("token_probs"); it != obj.end()) {
    if (!it->is_array()) {
      check.Fail("token_probs", "expected a list of numbers");
    } else {
      for (size_t i = 0; i < it->size(); ++i) {
        auto p = check.Number((*it)[i],
                              "token_probs[" + std::to_string(i) + "]", 0.0,
                              1.0, true);
        if (p) r.token_probs.push_back(*p);
      }
    }
  }
  r.p_true = check.Probability(obj, "p_true");
  r.p_high = check.Probability(obj, "p_high");
  r.p_medium = check.Probability(obj, "p_medium");
  if (r.p_high && r.p_medium &&
      *r.p_high + *r.p_medium > 1.0 + kVerbalSumTolerance) {
    check.Fail("p_high", "p_high + p_medium exceeds 1");
  }
  if (auto v = check.Strings(obj, "samples", false)) {
    if (v->empty()) check.Fail("samples", "must be non-empty when present");
    r.samples = *v;
  }
  if (auto it = obj.find("question_overlap"); it != obj.end()) {
    if (!it->is_boolean()) {
      check.Fail("question_overlap", "expected a boolean");
    } else {
      r.question_overlap = it->get<bool>();
    }
  }
  if (!check.ok()) return std::nullopt;
  return r;
}

void RequireUnitOr(const std::optional<double>& v, const char* name) {
  if (v && !(*v >= 0.0 && *v <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

RecordFileError::RecordFileError(std::vector<std::string> violations)
    : ValidationError(JoinMessages(violations)),
      violations_(std::move(violations)) {}

std::vector<PredictionRecord> ParseRecords(std::istream& in) {
  std::vector<std::string> violations;
  std::vector<PredictionRecord> records;
  std::set<std::pair<std::string, KnowledgeSource>> seen;
  std::string line;
  size_t line_no = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    LineChecker check(line_no, &violations);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      check.Fail("line", "malformed JSON");
      if (!have_header) have_header = true;  // keep reporting later lines
      continue;
    }
    if (!have_header) {
      have_header = true;
      if (!obj.is_object() || obj.size() != 1 || !obj.contains("version")) {
        check.Fail("version",
                   "first line must be the header {\"version\": \"v1\"}");
      } else if (obj["version"] != kSchemaVersion) {
        check.Fail("version", "unsupported schema version " +
                                  obj["version"].dump() + " (expected v1)");
      }
      continue;
    }
    auto record = ParseRecordLine(obj, check);
    if (!record) continue;
    if (!seen.emplace(record->id, record->source).second) {
      check.Fail("id", "duplicate (id, source) = (" + record->id + ", " +
                           std::string(SourceName(record->source)) + ")");
      continue;
    }
    records.push_back(std::move(*record));
  }
  if (!have_header) {
    violations.push_back("line 1: version: missing header {\"version\": \"v1\"}");
  }
  if (!violations.empty()) throw RecordFileError(std::move(violations));
  return records;
}

std::vector<PredictionRecord> ValidateAndLoad(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RecordFileError({"cannot open " + path});
  return ParseRecords(in);
}

nlohmann::ordered_json RecordToJson(const PredictionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["gold_answers"] = r.gold_answers;
  j["source"] = SourceName(r.source);
  j["contexts"] = r.contexts;
  j["answer"] = r.answer;
  if (!r.token_probs.empty()) j["token_probs"] = r.token_probs;
  if (r.p_true) j["p_true"] = *r.p_true;
  if (r.p_high) j["p_high"] = *r.p_high;
  if (r.p_medium) j["p_medium"] = *r.p_medium;
  if (r.samples) j["samples"] = *r.samples;
  if (r.question_overlap) j["question_overlap"] = *r.question_overlap;
  return j;
}

void WriteRecords(std::ostream& out, std::span<const PredictionRecord> records) {
  out << "{\"version\":\"" << kSchemaVersion << "\"}\n";
  for (const auto& r : records) out << RecordToJson(r).dump() << '\n';
}

RunConfig ParseRunConfig(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> kFields = {
      "global_seed", "n_samples", "bins", "length_normalize", "criterion",
      "quantiles"};
  RunConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!kFields.contains(key)) {
        throw ValidationError("config: unknown field '" + key + "'");
      }
    }
    if (doc.contains("global_seed")) {
      config.global_seed = doc["global_seed"].get<uint64_t>();
    }
    if (doc.contains("n_samples")) config.n_samples = doc["n_samples"].get<int>();
    if (doc.contains("bins")) config.bins = doc["bins"].get<int>();
    if (doc.contains("length_normalize")) {
      config.length_normalize = doc["length_normalize"].get<bool>();
    }
    if (doc.contains("criterion")) {
      config.criterion = ParseCriterion(doc["criterion"].get<std::string>());
    }
    if (doc.contains("quantiles")) {
      const json& q = doc["quantiles"];
      for (const auto& [key, value] : q.items()) {
        if (key != "t1" && key != "t2" && key != "fit_from") {
          throw ValidationError("config: unknown quantiles field '" + key + "'");
        }
      }
      if (q.contains("t1") != q.contains("t2")) {
        throw ValidationError("config: quantiles need both t1 and t2");
      }
      if (q.contains("t1")) {
        config.quantiles.t1 = q["t1"].get<double>();
        config.quantiles.t2 = q["t2"].get<double>();
        if (*config.quantiles.t1 > *config.quantiles.t2) {
          throw ValidationError("config: quantiles need t1 <= t2");
        }
      }
      if (q.contains("fit_from")) {
        config.quantiles.fit_from = q["fit_from"].get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (config.n_samples < 1) throw ValidationError("config: n_samples < 1");
  if (config.bins < 1) throw ValidationError("config: bins < 1");
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str());
}

namespace {

ScoredPrediction ScoreWithLikelihood(const PredictionRecord& r,
                                     std::optional<double> likelihood,
                                     const ScoreOptions& options) {
  RequireUnitOr(r.p_true, "p_true");
  RequireUnitOr(r.p_high, "p_high");
  RequireUnitOr(r.p_medium, "p_medium");
  ScoredPrediction out;
  out.answer = r.answer;
  out.correct = ExactMatch(r.answer, r.gold_answers);
  if (likelihood && options.temperature) {
    likelihood = TemperatureScale(*likelihood, *options.temperature);
  }
  out.scores.likelihood = likelihood;
  const bool has_consistency = r.p_high && r.p_medium;
  const VerbalProbs verbal =
      ExtractVerbalProbs(r.p_true.value_or(0.0), r.p_high.value_or(0.0),
                         r.p_medium.value_or(0.0));
  if (r.p_true) out.scores.answerability = verbal.p_answerable;
  if (has_consistency) out.scores.consistency = verbal.p_consistent;
  if (likelihood && r.p_true && has_consistency) {
    out.scores.ensemble =
        EnsembleConfidence(*likelihood, verbal.p_answerable,
                           verbal.p_consistent)
            .ensemble;
  }
  return out;
}

}  // namespace

ScoredPrediction ScoreRecord(const PredictionRecord& record,
                             const ScoreOptions& options) {
  std::optional<double> likelihood;
  if (!record.token_probs.empty()) {
    likelihood = SequenceLikelihood(record.token_probs, options.length_normalize);
  }
  return ScoreWithLikelihood(record, likelihood, options);
}

std::vector<ScoredPrediction> ScoreRecords(
    std::span<const PredictionRecord> records, const ScoreOptions& options) {
  std::vector<size_t> with_probs;
  std::vector<std::vector<double>> step_probs;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].token_probs.empty()) continue;
    with_probs.push_back(i);
    step_probs.push_back(records[i].token_probs);
  }
  const std::vector<double> likelihoods =
      kernels::parallel::BatchSequenceLikelihood(step_probs,
                                                 options.length_normalize);
  std::vector<std::optional<double>> by_record(records.size());
  for (size_t j = 0; j < with_probs.size(); ++j) {
    by_record[with_probs[j]] = likelihoods[j];
  }
  std::vector<ScoredPrediction> out;
  out.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    out.push_back(ScoreWithLikelihood(records[i], by_record[i], options));
  }
  return out;
}

std::optional<ConfidenceBreakdown> Breakdown(const PredictionRecord& record,
                                             const ScoreOptions& options) {
  if (record.token_probs.empty() || !record.p_true || !record.p_high ||
      !record.p_medium) {
    return std::nullopt;
  }
  double likelihood =
      SequenceLikelihood(record.token_probs, options.length_normalize);
  if (options.temperature) {
    likelihood = TemperatureScale(likelihood, *options.temperature);
  }
  const VerbalProbs verbal =
      ExtractVerbalProbs(*record.p_true, *record.p_high, *record.p_medium);
  return EnsembleConfidence(likelihood, verbal.p_answerable,
                            verbal.p_consistent);
}

PairingResult PairRecords(std::span<const PredictionRecord> records,
                          const ScoreOptions& options) {
  const std::vector<ScoredPrediction> scored = ScoreRecords(records, options);
  std::map<std::string, std::pair<const PredictionRecord*, size_t>> docs;
  std::map<std::string, std::pair<const PredictionRecord*, size_t>> qas;
  for (size_t i = 0; i < records.size(); ++i) {
    auto& side =
        records[i].source == KnowledgeSource::kDocument ? docs : qas;
    side[records[i].id] = {&records[i], i};
  }

  PairingResult result;
  for (const auto& [id, doc] : docs) {
    auto it = qas.find(id);
    if (it == qas.end()) {
      result.unpaired.push_back({id, KnowledgeSource::kDocument});
      continue;
    }
    const PredictionRecord& d = *doc.first;
    const PredictionRecord& k = *it->second.first;
    PairedPrediction pair;
    pair.question = {d.id, d.question, d.gold_answers,
                     d.question_overlap ? d.question_overlap
                                        : k.question_overlap};
    pair.doc = scored[doc.second];
    pair.qa = scored[it->second.second];
    result.pairs.push_back(std::move(pair));
  }
  for (const auto& [id, qa] : qas) {
    if (!docs.contains(id)) {
      result.unpaired.push_back({id, KnowledgeSource::kQAHistory});
    }
  }
  std::sort(result.unpaired.begin(), result.unpaired.end(),
            [](const UnpairedRecord& a, const UnpairedRecord& b) {
              return std::tie(a.id, a.source) < std::tie(b.id, b.source);
            });
  return result;
}

}  // namespace selqa
