// src/crossval.cc

// Copyright 2026  The sapser Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "sapser/crossval.h"

#include <algorithm>
#include <exception>
#include <fstream>
#include <mutex>

#include "json.hpp"
#include "sapser/audio_io.h"
#include "sapser/checkpoint.h"
#include "sapser/error.h"
#include "sapser/manifest.h"
#include "sapser/pooling.h"

namespace sapser {

using nlohmann::ordered_json;

std::string_view VadSourceName(VadSource source) {
  switch (source) {
    case VadSource::kBuiltin: return "builtin";
    case VadSource::kExternal: return "external";
    case VadSource::kGroundTruth: return "truth";
  }
  return "?";
}

VadSource ParseVadSource(std::string_view name) {
  if (name == "builtin") return VadSource::kBuiltin;
  if (name == "external") return VadSource::kExternal;
  if (name == "truth" || name == "ground_truth") return VadSource::kGroundTruth;
  Fail(ErrorCode::kInvalidArgument, "unknown VAD source '" + std::string(name) + "'");
}

std::vector<Example> PreparedCorpus::Examples(std::span<const size_t> indices) const {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (size_t i : indices) {
    const UtteranceRecord &r = records[i];
    out.push_back({r.id, &features[i].values, keep[i], r.label,
                   static_cast<float>(r.ScaledValence()),
                   static_cast<float>(r.ScaledArousal())});
  }
  return out;
}

PreparedCorpus PrepareCorpus(std::span<const UtteranceRecord> records,
                             const CrossValOptions &options,
                             const std::filesystem::path &manifest_dir) {
  options.frames.Validate();
  options.vad.Validate();
  std::filesystem::path mask_dir = options.mask_dir;
  if (mask_dir.empty() && options.vad_source == VadSource::kGroundTruth)
    mask_dir = manifest_dir / "truth";
  if (mask_dir.empty() && options.vad_source == VadSource::kExternal)
    Fail(ErrorCode::kInvalidArgument, "external VAD needs a mask directory");

  PreparedCorpus corpus;
  corpus.records.assign(records.begin(), records.end());
  const size_t n = records.size();
  corpus.features.resize(n);
  corpus.keep.resize(n);
  corpus.speech_ratio.resize(n);

  std::exception_ptr error;
  std::mutex error_mutex;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long li = 0; li < count; ++li) {
    const size_t i = static_cast<size_t>(li);
    try {
      const UtteranceRecord &r = records[i];
      const bool need_audio =
          r.feature_path.empty() || options.vad_source == VadSource::kBuiltin;
      std::optional<AudioClip> full;
      std::optional<AudioClip> clip;
      if (need_audio) {
        if (r.audio_path.empty())
          Fail(ErrorCode::kInvalidArgument, r.id + ": no audio path");
        full = LoadWav(r.audio_path, r.id);
        clip = Truncate(*full, options.max_seconds);
      }
      if (r.feature_path.empty()) {
        MelConfig mel = options.mel;
        mel.n_mels = static_cast<int>(options.model.feature_dim);
        corpus.features[i] = ExtractLogMel(*clip, options.frames, mel);
      } else {
        corpus.features[i] = LoadFeatures(r.feature_path);
      }
      corpus.features[i].utterance_id = r.id;

      VadMask mask;
      if (options.vad_source == VadSource::kBuiltin) {
        mask = DetectSpeech(*clip, options.vad);
      } else {
        std::optional<size_t> expected;
        if (full) expected = VadFrameCount(*full, options.vad.frame_ms);
        mask = LoadExternalMask(mask_dir / (r.id + ".txt"), expected,
                                options.vad.frame_ms);
      }
      corpus.keep[i] = AlignMask(mask, corpus.features[i]);
      corpus.speech_ratio[i] = static_cast<double>(corpus.keep[i].count()) /
                               static_cast<double>(corpus.keep[i].size());
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return corpus;
}

EvaluationResult EvaluateModel(const SerModel<float> &model,
                               std::span<const Example> examples) {
  if (examples.empty()) Fail(ErrorCode::kEmptyMatrix, "no evaluation examples");
  const auto preds = Predict(model, examples);
  std::vector<int> truth, predicted;
  std::vector<float> v, vt, a, at;
  EvaluationResult out;
  for (size_t i = 0; i < examples.size(); ++i) {
    truth.push_back(examples[i].label);
    predicted.push_back(preds[i].label);
    v.push_back(preds[i].valence);
    vt.push_back(examples[i].valence);
    a.push_back(preds[i].arousal);
    at.push_back(examples[i].arousal);
    out.fallbacks += preds[i].fallback ? 1 : 0;
  }
  out.confusion = Confusion(truth, predicted, model.config().num_classes);
  out.wa = WeightedAccuracy(out.confusion);
  bool all_rows = true;
  for (size_t c = 0; c < out.confusion.num_classes; ++c)
    all_rows = all_rows && out.confusion.RowSum(c) > 0;
  if (all_rows) out.ua = UnweightedAccuracy(out.confusion);
  out.mae_valence = MeanAbsoluteError(v, vt);
  out.mae_arousal = MeanAbsoluteError(a, at);
  return out;
}

void WriteEvaluationReport(const EvaluationResult &result,
                           const std::filesystem::path &out_dir) {
  const auto names = EmotionNames();
  EmitReport(result.confusion, {}, names, out_dir);
  const auto path = out_dir / "report.json";
  ordered_json j;
  {
    std::ifstream in(path);
    j = ordered_json::parse(in);
  }
  j["mae_valence"] = result.mae_valence;
  j["mae_arousal"] = result.mae_arousal;
  j["sap_fallbacks"] = result.fallbacks;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
}

AggregateReport Aggregate(std::span<const FoldReport> folds) {
  AggregateReport report;
  report.folds.assign(folds.begin(), folds.end());
  if (folds.empty()) return report;
  report.pooled = ConfusionMatrix(folds.front().metrics.confusion.num_classes);
  std::vector<double> ua, wa, mv, ma;
  for (const FoldReport &f : folds) {
    report.pooled.Add(f.metrics.confusion);
    if (f.metrics.ua) ua.push_back(100.0 * *f.metrics.ua);
    wa.push_back(100.0 * f.metrics.wa);
    mv.push_back(f.metrics.mae_valence);
    ma.push_back(f.metrics.mae_arousal);
  }
  auto add = [&](const char *name, const std::vector<double> &values) {
    if (values.size() >= 2) report.summaries.emplace_back(name, SummarizeFolds(values));
  };
  add("ua", ua);
  add("wa", wa);
  add("mae_valence", mv);
  add("mae_arousal", ma);
  return report;
}

namespace {

ordered_json SummaryJson(const FoldSummary &s) {
  return {{"values", s.values}, {"mean", s.mean}, {"stddev", s.stddev},
          {"ci95", {s.ci_low, s.ci_high}}};
}

ordered_json ConfusionJson(const ConfusionMatrix &cm) {
  ordered_json rows = ordered_json::array();
  for (size_t t = 0; t < cm.num_classes; ++t) {
    std::vector<size_t> row(cm.num_classes);
    for (size_t p = 0; p < cm.num_classes; ++p) row[p] = cm.at(t, p);
    rows.push_back(row);
  }
  return rows;
}

ordered_json FoldJson(const FoldReport &f) {
  ordered_json j;
  j["test_speaker"] = f.test_speaker;
  j["val_speaker"] = f.val_speaker;
  j["n_train"] = f.n_train;
  j["n_val"] = f.n_val;
  j["n_test"] = f.n_test;
  j["ua"] = f.metrics.ua ? ordered_json(*f.metrics.ua) : ordered_json(nullptr);
  j["wa"] = f.metrics.wa;
  j["mae_valence"] = f.metrics.mae_valence;
  j["mae_arousal"] = f.metrics.mae_arousal;
  j["sap_fallbacks"] = f.metrics.fallbacks;
  j["best_epoch"] = f.best_epoch;
  j["epochs_run"] = f.epochs_run;
  j["early_stopped"] = f.early_stopped;
  j["confusion"] = ConfusionJson(f.metrics.confusion);
  return j;
}

void WriteText(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
}

}  // namespace

std::string AggregateJson(const AggregateReport &report,
                          const CrossValOptions &options) {
  ordered_json j;
  j["pooling"] = PoolingModeName(options.model.pooling);
  j["vad_source"] = VadSourceName(options.vad_source);
  j["seed"] = options.model.seed;
  j["config"] = options.model.Serialize();
  j["classes"] = EmotionNames();
  j["runs"] = report.folds.size();
  ordered_json summaries = ordered_json::object();
  for (const auto &[name, s] : report.summaries) summaries[name] = SummaryJson(s);
  j["summaries"] = summaries;
  j["pooled_confusion"] = ConfusionJson(report.pooled);
  ordered_json folds = ordered_json::array();
  for (const FoldReport &f : report.folds) folds.push_back(FoldJson(f));
  j["folds"] = folds;
  return j.dump(2) + "\n";
}

AggregateReport RunCrossValidation(const PreparedCorpus &corpus,
                                   const CrossValOptions &options,
                                   const std::filesystem::path &out_dir) {
  options.model.Validate();
  const FoldPlan plan = BuildFolds(corpus.records);
  const size_t runs = plan.runs.size();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot create " + out_dir.string());

  std::vector<FoldReport> reports(runs);
  std::vector<std::string> status(runs, "pending");
  std::vector<std::exception_ptr> errors(runs);
  std::mutex status_mutex;
  auto write_status = [&] {
    ordered_json j = ordered_json::array();
    for (size_t r = 0; r < runs; ++r)
      j.push_back({{"run", r}, {"test_speaker", plan.folds[plan.runs[r].test_fold][0]},
                   {"status", status[r]}});
    WriteText(out_dir / "run_status.json", j.dump(2) + "\n");
  };
  {
    std::lock_guard<std::mutex> lock(status_mutex);
    write_status();
  }

  const long count = static_cast<long>(runs);
#pragma omp parallel for schedule(dynamic)
  for (long lr = 0; lr < count; ++lr) {
    const size_t r = static_cast<size_t>(lr);
    try {
      const RunSplit split = SplitForRun(plan, r, corpus.records);
      FoldReport &rep = reports[r];
      rep.test_speaker = plan.folds[plan.runs[r].test_fold][0];
      rep.val_speaker = plan.folds[plan.runs[r].val_fold][0];
      rep.n_train = split.train.size();
      rep.n_val = split.val.size();
      rep.n_test = split.test.size();
      const auto train = corpus.Examples(split.train);
      const auto val = corpus.Examples(split.val);
      const auto test = corpus.Examples(split.test);

      const auto run_dir = out_dir / ("run_" + rep.test_speaker);
      std::filesystem::create_directories(run_dir);
      std::ofstream log(run_dir / "train_log.jsonl", std::ios::binary);
      const TrainedModel trained = Train(options.model, train, val, &log);
      if (!log) Fail(ErrorCode::kIoError, "cannot write training log");
      rep.best_epoch = trained.diagnostics.best_epoch;
      rep.epochs_run = trained.diagnostics.epochs.size();
      rep.early_stopped = trained.diagnostics.early_stopped;
      rep.metrics = EvaluateModel(trained.model, test);
      if (options.save_checkpoints)
        SaveCheckpoint(trained.model, run_dir / "checkpoint.bin");
      WriteEvaluationReport(rep.metrics, run_dir);
      std::lock_guard<std::mutex> lock(status_mutex);
      status[r] = "ok";
      write_status();
    } catch (const std::exception &e) {
      std::lock_guard<std::mutex> lock(status_mutex);
      errors[r] = std::current_exception();
      status[r] = std::string("failed: ") + e.what();
      write_status();
    }
  }
  for (const auto &e : errors)
    if (e) std::rethrow_exception(e);

  AggregateReport aggregate = Aggregate(reports);
  WriteText(out_dir / "aggregate.json", AggregateJson(aggregate, options));
  EmitReport(aggregate.pooled, aggregate.summaries, EmotionNames(), out_dir);
  return aggregate;
}

}  // namespace sapser
