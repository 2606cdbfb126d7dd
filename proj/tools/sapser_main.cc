// tools/sapser_main.cc

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

// Command-line front end: vad, extract, train, evaluate, crossval, synth,
// gradcheck. Exit status 0 on success, 1 on runtime errors, 2 on usage
// errors.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sapser/audio_io.h"
#include "sapser/checkpoint.h"
#include "sapser/crossval.h"
#include "sapser/error.h"
#include "sapser/features.h"
#include "sapser/folds.h"
#include "sapser/grad_check.h"
#include "sapser/manifest.h"
#include "sapser/synth.h"
#include "sapser/vad.h"

namespace {

using namespace sapser;
namespace fs = std::filesystem;

constexpr int kUsageExit = 2;

// Reads a flat key=value file into "--key=value" tokens. Blank lines and
// lines starting with '#' are skipped; underscores in keys become dashes
// so the file can reuse the names of a saved model configuration.
std::vector<std::string> ConfigTokens(const fs::path &path,
                                      const std::set<std::string> &explicit_flags) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open config " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kParseError, "config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\"");
      const auto e = s.find_last_not_of(" \t\r\"");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (explicit_flags.count("--" + key)) continue;
    out.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

// Expands "--config FILE" into its tokens, placed before the remaining
// arguments of the subcommand.
std::vector<std::string> ExpandConfig(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty()) return rest;
  std::set<std::string> explicit_flags;
  for (const auto &a : rest)
    if (a.rfind("--", 0) == 0) explicit_flags.insert(a.substr(0, a.find('=')));
  const auto tokens = ConfigTokens(config, explicit_flags);
  // rest[0] is the program, rest[1] the subcommand.
  const size_t at = std::min<size_t>(2, rest.size());
  rest.insert(rest.begin() + static_cast<long>(at), tokens.begin(), tokens.end());
  return rest;
}

struct ModelFlags {
  ModelConfig config;
  std::vector<std::string> pooling{"sr"};
  int num_classes = 4;

  void Register(CLI::App *app, bool multi_pooling) {
    app->add_option("--feature-dim,--n-mels", config.feature_dim,
                    "Feature dimension (mel bands when extracting)")
        ->capture_default_str();
    app->add_option("--projection-dim", config.projection_dim)->capture_default_str();
    app->add_option("--heads", config.heads)->capture_default_str();
    app->add_flag("--residual,!--no-residual", config.residual,
                  "Residual connection around attention");
    app->add_flag("--bypass-attention", config.bypass_attention,
                  "SAP averages raw speech frames");
    auto *p = app->add_option("--pooling", pooling, "gap | sap | sr")
                  ->check(CLI::IsMember({"gap", "gap_only", "sap", "sap_only", "sr"}));
    if (!multi_pooling) p->expected(1);
    app->add_option("--num-classes", num_classes)->check(CLI::Range(4, 4));
    app->add_option("--alpha", config.loss.alpha)->capture_default_str();
    app->add_option("--beta", config.loss.beta)->capture_default_str();
    app->add_option("--gamma", config.loss.gamma)->capture_default_str();
    app->add_option("--batch-size", config.batch_size)->capture_default_str();
    app->add_option("--epochs", config.epochs)->capture_default_str();
    app->add_option("--base-lr,--lr", config.base_lr)->capture_default_str();
    app->add_option("--warmup-ratio", config.warmup_ratio)->capture_default_str();
    app->add_option("--patience", config.patience)->capture_default_str();
    app->add_option("--seed", config.seed)->capture_default_str();
  }

  ModelConfig For(const std::string &mode) const {
    ModelConfig c = config;
    c.pooling = ParsePoolingMode(mode);
    c.Validate();
    return c;
  }
};

struct CorpusFlags {
  std::string manifest;
  std::string vad = "builtin";
  std::string mask_dir;
  double max_seconds = 19.0;
  int aggressiveness = 2;

  void Register(CLI::App *app) {
    app->add_option("--manifest", manifest, "Manifest CSV")->required();
    app->add_option("--vad", vad, "builtin | external | truth")
        ->check(CLI::IsMember({"builtin", "external", "truth", "ground_truth"}))
        ->capture_default_str();
    app->add_option("--mask-dir", mask_dir, "Directory of <id>.txt masks");
    app->add_option("--max-seconds", max_seconds, "Audio truncation length")
        ->capture_default_str();
    app->add_option("--aggressiveness", aggressiveness)
        ->check(CLI::Range(0, 3))
        ->capture_default_str();
  }

  CrossValOptions Options(const ModelConfig &model) const {
    CrossValOptions o;
    o.model = model;
    o.vad_source = ParseVadSource(vad);
    o.vad.aggressiveness = aggressiveness;
    o.mask_dir = mask_dir;
    o.max_seconds = max_seconds;
    return o;
  }
};

void PrintSummaries(const AggregateReport &report, const std::string &label) {
  for (const auto &[name, s] : report.summaries)
    std::printf("%s %s mean=%.4f ci95=[%.4f, %.4f]\n", label.c_str(), name.c_str(),
                s.mean, s.ci_low, s.ci_high);
}

int Run(int argc, char **argv) {
  CLI::App app{"sapser: speech emotion recognition with speech-aware pooling", "sapser"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  SynthConfig synth_cfg;
  uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--speakers", synth_cfg.n_speakers)->capture_default_str();
  synth->add_option("--utterances", synth_cfg.utterances_per_speaker)->capture_default_str();
  synth->add_option("--duration", synth_cfg.duration_s)->capture_default_str();
  synth->add_option("--speech-fraction", synth_cfg.speech_fraction)->capture_default_str();
  synth->add_option("--segments", synth_cfg.speech_segments)->capture_default_str();
  synth->add_option("--distractor-db", synth_cfg.distractor_db)->capture_default_str();
  synth->add_option("--background-rms", synth_cfg.background_rms)->capture_default_str();
  synth->add_option("--sample-rate", synth_cfg.sample_rate)->capture_default_str();

  // vad
  auto *vad = app.add_subcommand("vad", "Detect speech frames in a WAV file");
  std::string vad_wav, vad_out;
  VadConfig vad_cfg;
  vad->add_option("--wav", vad_wav)->required();
  vad->add_option("--out", vad_out, "Mask file (default: stdout)");
  vad->add_option("--aggressiveness", vad_cfg.aggressiveness)
      ->check(CLI::Range(0, 3))
      ->capture_default_str();
  vad->add_option("--frame-ms", vad_cfg.frame_ms)
      ->check(CLI::IsMember({10, 20, 30}))
      ->capture_default_str();
  vad->add_option("--hangover", vad_cfg.hangover_frames)->capture_default_str();

  // extract
  auto *extract = app.add_subcommand("extract", "Compute log-mel features");
  std::string ex_wav, ex_out;
  FrameSpec ex_frames;
  MelConfig ex_mel;
  double ex_max_seconds = 19.0;
  extract->add_option("--wav", ex_wav)->required();
  extract->add_option("--out", ex_out)->required();
  extract->add_option("--n-mels", ex_mel.n_mels)->capture_default_str();
  extract->add_option("--window-ms", ex_frames.window_ms)->capture_default_str();
  extract->add_option("--stride-ms", ex_frames.stride_ms)->capture_default_str();
  extract->add_option("--max-seconds", ex_max_seconds)->capture_default_str();

  // train
  auto *train = app.add_subcommand("train", "Train one model");
  ModelFlags train_model;
  CorpusFlags train_corpus;
  std::string train_out, train_val;
  train_model.Register(train, false);
  train_corpus.Register(train);
  train->add_option("--out", train_out)->required();
  train->add_option("--val-speaker", train_val,
                    "Validation speaker (default: last speaker id)");

  // evaluate
  auto *evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  CorpusFlags eval_corpus;
  std::string eval_ckpt, eval_out;
  std::vector<std::string> eval_speakers;
  eval_corpus.Register(evaluate);
  evaluate->add_option("--checkpoint", eval_ckpt)->required();
  evaluate->add_option("--out", eval_out)->required();
  evaluate->add_option("--speaker", eval_speakers, "Restrict to these speakers");

  // crossval
  auto *crossval = app.add_subcommand("crossval", "Leave-one-speaker-out runs");
  ModelFlags cv_model;
  CorpusFlags cv_corpus;
  std::string cv_out;
  bool cv_no_ckpt = false;
  cv_model.Register(crossval, true);
  cv_corpus.Register(crossval);
  crossval->add_option("--out", cv_out)->required();
  crossval->add_flag("--no-checkpoints", cv_no_ckpt);

  // gradcheck
  auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  uint64_t gc_seed = 0;
  int gc_instances = 20;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  gradcheck->add_option("--seed", gc_seed)->capture_default_str();
  gradcheck->add_option("--instances", gc_instances)->check(CLI::PositiveNumber)
      ->capture_default_str();
  gradcheck->add_option("--eps", gc_eps)->capture_default_str();
  gradcheck->add_option("--tolerance", gc_tol)->capture_default_str();

  std::vector<std::string> args;
  try {
    args = ExpandConfig(argc, argv);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageExit;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    if (code != 0) {
      std::cerr << app.help();
      return kUsageExit;
    }
    return 0;
  }

  if (*synth) {
    const auto manifest = GenerateSyntheticCorpus(synth_cfg, synth_seed, synth_out);
    std::printf("wrote %s\n", manifest.string().c_str());
    return 0;
  }

  if (*vad) {
    const AudioClip clip = LoadWav(vad_wav);
    const VadMask mask = DetectSpeech(clip, vad_cfg);
    if (vad_out.empty()) {
      for (size_t i = 0; i < mask.size(); ++i)
        std::printf("%s%d", i ? " " : "", mask.decisions[i]);
      std::printf("\n");
    } else {
      WriteMask(mask, vad_out);
    }
    std::fprintf(stderr, "frames=%zu speech_ratio=%.4f\n", mask.size(),
                 SpeechRatio(mask));
    return 0;
  }

  if (*extract) {
    const AudioClip clip = Truncate(LoadWav(ex_wav), ex_max_seconds);
    const FeatureMatrix f = ExtractLogMel(clip, ex_frames, ex_mel);
    SaveFeatures(f, ex_out);
    std::printf("frames=%zu dim=%zu\n", f.num_frames(), f.dim());
    return 0;
  }

  if (*train) {
    const ModelConfig cfg = train_model.For(train_model.pooling.front());
    const auto records = LoadManifest(train_corpus.manifest);
    const auto options = train_corpus.Options(cfg);
    const PreparedCorpus corpus =
        PrepareCorpus(records, options, fs::path(train_corpus.manifest).parent_path());
    std::set<std::string> speakers;
    for (const auto &r : records) speakers.insert(r.speaker_id);
    if (speakers.size() < 2)
      Fail(ErrorCode::kSingleSpeaker, "training needs at least two speakers");
    const std::string val_speaker = train_val.empty() ? *speakers.rbegin() : train_val;
    if (!speakers.count(val_speaker))
      Fail(ErrorCode::kInvalidArgument, "unknown speaker " + val_speaker);
    std::vector<size_t> tr, va;
    for (size_t i = 0; i < records.size(); ++i)
      (records[i].speaker_id == val_speaker ? va : tr).push_back(i);
    fs::create_directories(train_out);
    std::ofstream log(fs::path(train_out) / "train_log.jsonl", std::ios::binary);
    const auto train_ex = corpus.Examples(tr), val_ex = corpus.Examples(va);
    const TrainedModel trained = Train(cfg, train_ex, val_ex, &log);
    SaveCheckpoint(trained.model, fs::path(train_out) / "checkpoint.bin");
    const auto result = EvaluateModel(trained.model, val_ex);
    WriteEvaluationReport(result, train_out);
    std::printf("best_epoch=%zu val_loss=%.6f val_wa=%.4f\n",
                trained.diagnostics.best_epoch, trained.diagnostics.best_val_loss,
                result.wa);
    return 0;
  }

  if (*evaluate) {
    const SerModel<float> model = LoadCheckpoint(eval_ckpt);
    auto records = LoadManifest(eval_corpus.manifest);
    if (!eval_speakers.empty()) {
      const std::set<std::string> keep(eval_speakers.begin(), eval_speakers.end());
      std::erase_if(records, [&](const auto &r) { return !keep.count(r.speaker_id); });
    }
    const auto options = eval_corpus.Options(model.config());
    const PreparedCorpus corpus =
        PrepareCorpus(records, options, fs::path(eval_corpus.manifest).parent_path());
    std::vector<size_t> all(records.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto result = EvaluateModel(model, corpus.Examples(all));
    WriteEvaluationReport(result, eval_out);
    std::printf("wa=%.4f ua=%s mae_valence=%.4f mae_arousal=%.4f\n", result.wa,
                result.ua ? std::to_string(*result.ua).c_str() : "null",
                result.mae_valence, result.mae_arousal);
    return 0;
  }

  if (*crossval) {
    const auto records = LoadManifest(cv_corpus.manifest);
    // Features and masks do not depend on the pooling mode; prepare once.
    CrossValOptions options = cv_corpus.Options(cv_model.For(cv_model.pooling.front()));
    options.save_checkpoints = !cv_no_ckpt;
    const PreparedCorpus corpus =
        PrepareCorpus(records, options, fs::path(cv_corpus.manifest).parent_path());
    const bool sweep = cv_model.pooling.size() > 1;
    for (const auto &mode : cv_model.pooling) {
      options.model = cv_model.For(mode);
      const fs::path out = sweep ? fs::path(cv_out) / std::string(PoolingModeName(
                                                          options.model.pooling))
                                 : fs::path(cv_out);
      const AggregateReport report = RunCrossValidation(corpus, options, out);
      PrintSummaries(report, std::string(PoolingModeName(options.model.pooling)));
      std::printf("wrote %s\n", (out / "aggregate.json").string().c_str());
    }
    return 0;
  }

  if (*gradcheck) {
    const auto checks = RunGradCheckSuite(gc_seed, gc_instances, gc_eps);
    double worst = 0.0;
    for (const auto &c : checks) {
      std::printf("%-24s instances=%d max_rel_error=%.3e\n", c.fragment.c_str(),
                  c.instances, c.max_rel_error);
      worst = std::max(worst, c.max_rel_error);
    }
    std::printf("max_rel_error=%.3e tolerance=%.1e %s\n", worst, gc_tol,
                worst < gc_tol ? "PASS" : "FAIL");
    return worst < gc_tol ? 0 : 1;
  }
  return kUsageExit;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return Run(argc, argv);
  } catch (const sapser::Error &e) {
    std::cerr << "error [" << sapser::ErrorCodeName(e.code()) << "]: " << e.what()
              << "\n";
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
