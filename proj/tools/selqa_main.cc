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

// selqa: selective QA calibration and evaluation.
//
// Exit codes: 0 success, 1 invalid input, 2 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selqa/pipeline.h"
#include "selqa/records.h"
#include "selqa/toy_lm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInternal = 2;

constexpr const char* kConfigEnv = "SELQA_CONFIG";

struct CommonFlags {
  std::string input;
  std::string config;
  std::string criterion;
  std::optional<int> bins;
  bool no_length_norm = false;
  std::optional<uint64_t> seed;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonFlags* f, bool needs_input) {
  auto* in = cmd->add_option("--input", f->input, "Record file (JSONL, v1)");
  if (needs_input) in->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", f->config,
                  std::string("Run config JSON (default: $") + kConfigEnv + ")");
  cmd->add_option("--criterion", f->criterion, "Selection/calibration score")
      ->check(CLI::IsMember(
          {"likelihood", "answerability", "consistency", "ensemble"}));
  cmd->add_option("--bins", f->bins, "ECE bin count")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-length-norm", f->no_length_norm,
                "Use the raw product instead of the geometric mean");
  cmd->add_option("--seed", f->seed, "Global seed");
  cmd->add_option("--out", f->out, "Output path (stdout when omitted)");
}

selqa::RunConfig ResolveConfig(const CommonFlags& f) {
  selqa::RunConfig config;
  std::string path = f.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  }
  if (!path.empty()) config = selqa::LoadRunConfig(path);
  if (!f.criterion.empty()) config.criterion = selqa::ParseCriterion(f.criterion);
  if (f.bins) config.bins = *f.bins;
  if (f.no_length_norm) config.length_normalize = false;
  if (f.seed) config.global_seed = *f.seed;
  return config;
}

void Emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

void EmitFiles(const std::filesystem::path& dir,
               const std::map<std::string, std::string>& files) {
  for (const auto& [name, contents] : files) {
    const auto path = dir / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selqa: calibrated answer selection between documents and QA "
               "history"};
  app.require_subcommand(1);

  CommonFlags f;
  auto* validate = app.add_subcommand("validate", "Check a record file");
  AddCommon(validate, &f, true);
  auto* label = app.add_subcommand(
      "label", "Answerability / consistency labels and calibration targets");
  AddCommon(label, &f, true);
  auto* score = app.add_subcommand("score", "Per-record confidence breakdown");
  AddCommon(score, &f, true);
  auto* select = app.add_subcommand("select", "Pick document or QA-history answer");
  AddCommon(select, &f, true);
  auto* eval = app.add_subcommand("eval", "EM, ECE, risk-coverage AUC, oracle");
  AddCommon(eval, &f, true);
  auto* curves = app.add_subcommand("curves", "Risk-coverage and reliability CSVs");
  AddCommon(curves, &f, true);
  auto* recall = app.add_subcommand("recall", "Retrieval recall@K");
  AddCommon(recall, &f, true);
  std::vector<int> ks = {1, 5, 10, 20};
  recall->add_option("--k", ks, "K values")->delimiter(',')->check(
      CLI::PositiveNumber);
  auto* demo = app.add_subcommand("demo", "End-to-end run on the toy model");
  AddCommon(demo, &f, false);
  std::string model_path = SELQA_DATA_DIR "/demo/model.json";
  std::string questions_path = SELQA_DATA_DIR "/demo/questions.json";
  demo->add_option("--model", model_path, "Toy model fixture")
      ->check(CLI::ExistingFile);
  demo->add_option("--questions", questions_path, "Demo question set")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    const selqa::RunConfig config = ResolveConfig(f);
    if (demo->parsed()) {
      const auto model = selqa::LoadConditionalTable(model_path);
      const auto questions = selqa::LoadDemoDataset(questions_path);
      const auto files = selqa::RunDemo(model, questions, config);
      const std::string dir = f.out.empty() ? "selqa_demo" : f.out;
      EmitFiles(dir, files);
      std::cout << files.at("report.json");
      return kExitOk;
    }

    const auto records = selqa::ValidateAndLoad(f.input);
    if (validate->parsed()) {
      Emit(f.out, "ok: " + std::to_string(records.size()) + " records\n");
    } else if (label->parsed()) {
      const auto thresholds = selqa::ResolveQuantiles(records, config);
      Emit(f.out, selqa::RenderLabels(selqa::LabelRecords(records, thresholds),
                                      thresholds));
    } else if (score->parsed()) {
      Emit(f.out, selqa::RenderScores(records, config));
    } else if (select->parsed()) {
      Emit(f.out, selqa::RenderSelections(records, config));
    } else if (eval->parsed()) {
      Emit(f.out, selqa::EvalReportToJson(selqa::BuildEvalReport(records, config))
                          .dump(2) +
                      "\n");
    } else if (curves->parsed()) {
      if (f.out.empty()) throw selqa::ValidationError("curves needs --out DIR");
      EmitFiles(f.out, selqa::BuildCurves(records, config));
    } else if (recall->parsed()) {
      Emit(f.out, selqa::RecallReport(records, ks).dump(2) + "\n");
    }
    return kExitOk;
  } catch (const selqa::RecordFileError& e) {
    for (const auto& v : e.violations()) std::cerr << v << '\n';
    return kExitInvalid;
  } catch (const selqa::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const selqa::ModelCoverageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
