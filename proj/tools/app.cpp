/*
 * Copyright 2026 The escounts Authors.
 *
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

#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string_view>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

namespace escounts::app {
namespace {

namespace fs = std::filesystem;

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RepetitionAnnotation> LoadAnnotations(const fs::path& dir, const std::string& split) {
  std::vector<RepetitionAnnotation> out;
  for (const auto& id : ReadManifest(dir, split)) out.push_back(LoadSidecar(SidecarPath(dir, id)));
  return out;
}

std::vector<CountPrediction> ReadPredictions(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read predictions " + path.string());
  std::vector<CountPrediction> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(PredictionFromJsonLine(line));
  }
  return out;
}

fs::path PredictionsPath(const RunConfig& cfg) {
  return cfg.predictions.empty() ? cfg.out / "predictions.jsonl" : cfg.predictions;
}

// predictions reordered to follow `annotations`
std::vector<CountPrediction> MatchPredictions(std::span<const RepetitionAnnotation> annotations,
                                              std::span<const CountPrediction> predictions) {
  std::map<std::string, const CountPrediction*> by_id;
  for (const auto& p : predictions) by_id[p.video_id] = &p;
  std::vector<CountPrediction> out;
  for (const auto& a : annotations) {
    const auto it = by_id.find(a.video_id);
    if (it == by_id.end()) throw std::runtime_error("no prediction for " + a.video_id);
    out.push_back(*it->second);
  }
  return out;
}

std::vector<GroupRow> PresetOrEqual(std::span<const GroupedItem> items, const GroupSpec& preset, std::string& name) {
  try {
    return GroupedReport(items, preset);
  } catch (const MetricsError&) {
    name += " (equal population)";
    return EqualPopulationReport(items, std::min<std::size_t>(5, items.size()));
  }
}

void WriteEvalReports(const fs::path& out, const FullReport& metrics, std::span<const CountPair> pairs) {
  WriteText(out / "metrics.txt", ReportToText(metrics));
  WriteText(out / "metrics.json", ReportToJson(metrics) + "\n");
  WriteText(out / "scatter.svg", ScatterSvg(pairs, "predicted vs ground-truth count"));
}

}  // namespace

void RunConfig::Resolve() {
  synth.seed = seed;
  synth.video.channels = decoder.channels;
  synth.video.window_grid = decoder.window_grid;
  train.seed = seed;
  train.threads = threads;
  train.exemplars.exemplar_tokens = decoder.exemplar_tokens;
  infer.seed = seed;
  infer.threads = threads;
  infer.positional = train.positional;
}

FullReport BuildFullReport(std::span<const RepetitionAnnotation> annotations,
                           std::span<const CountPrediction> predictions) {
  const auto matched = MatchPredictions(annotations, predictions);
  FullReport report;
  std::vector<CountPair> pairs;
  std::vector<GroupedItem> by_count, by_rep, by_video;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const auto& p = matched[i];
    const CountPair pair{static_cast<double>(a.count), p.raw_count};
    pairs.push_back(pair);
    const double frames = p.density.frames_per_token * static_cast<double>(p.density.size());
    double rep_frames = 0;
    for (const auto& r : a.repetitions) rep_frames += static_cast<double>(r.length());
    if (a.repetitions.empty()) rep_frames = frames;
    const double reps = a.repetitions.empty() ? std::max(1.0, static_cast<double>(a.count)) : a.repetitions.size();
    by_count.push_back({pair, static_cast<double>(a.count)});
    by_rep.push_back({pair, rep_frames / reps / a.fps});
    by_video.push_back({pair, frames / a.fps});
  }
  report.overall = ComputeMetrics(pairs);
  report.obn = OffByN(pairs, 5);
  report.groups.push_back({"count", EqualPopulationReport(by_count, std::min<std::size_t>(5, pairs.size()))});
  std::string rep_name = "repetition_duration_s", video_name = "video_duration_s";
  auto rep_rows = PresetOrEqual(by_rep, GroupSpec::RepetitionDuration(), rep_name);
  auto video_rows = PresetOrEqual(by_video, GroupSpec::VideoDuration(), video_name);
  report.groups.push_back({rep_name, std::move(rep_rows)});
  report.groups.push_back({video_name, std::move(video_rows)});
  return report;
}

void CmdSynth(const RunConfig& cfg) {
  WriteSynthCorpus(cfg.synth, cfg.corpus);
  spdlog::info("wrote {} train and {} test videos to {}", cfg.synth.n_train, cfg.synth.n_test, cfg.corpus.string());
}

EpochReport CmdTrain(const RunConfig& cfg) {
  const auto corpus = LoadSplit(cfg.corpus, "train");
  if (corpus.empty()) throw std::runtime_error("training split is empty");
  const CorpusIndex index(corpus);
  std::optional<Trainer> trainer;
  if (!cfg.resume.empty()) {
    trainer.emplace(cfg.train, LoadCheckpoint(cfg.resume));
    spdlog::info("resuming from {} at epoch {}", cfg.resume.string(), trainer->epoch());
  } else {
    auto params = DecoderParams::Init(cfg.decoder, cfg.seed);
    if (cfg.head_prior) SetHeadPrior(params, MeanTargetDensity(corpus));
    trainer.emplace(cfg.train, std::move(params));
  }
  const auto channels = trainer->params().config.channels;
  for (const auto& item : corpus) {
    if (item.features.channels() != channels) {
      throw std::runtime_error(item.annotation.video_id + " has " + std::to_string(item.features.channels()) +
                               " channels, model expects " + std::to_string(channels));
    }
  }
  if (cfg.log.has_parent_path()) fs::create_directories(cfg.log.parent_path());
  std::ofstream log(cfg.log, cfg.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw std::runtime_error("cannot write training log " + cfg.log.string());
  trainer->SetStepCallback([&](const StepRecord& r) { log << StepRecordToJson(r) << '\n'; });
  if (cfg.checkpoint.has_parent_path()) fs::create_directories(cfg.checkpoint.parent_path());
  EpochReport last;
  while (trainer->epoch() < cfg.train.epochs) {
    last = trainer->TrainEpoch(corpus, index);
    spdlog::info("epoch {} loss {:.4f} (mse {:.4f}, mae {:.4f}) lr {:.3g}", last.epoch, last.loss.total, last.loss.mse,
                 last.loss.mae, last.lr);
    if (cfg.checkpoint_every > 0 && trainer->epoch() % cfg.checkpoint_every == 0) trainer->Save(cfg.checkpoint);
  }
  trainer->Save(cfg.checkpoint);
  return last;
}

EvalOutputs CmdEval(const RunConfig& cfg) {
  const auto ck = LoadCheckpoint(cfg.checkpoint);
  const auto test = LoadSplit(cfg.corpus, "test");
  std::vector<CorpusItem> train;
  std::optional<CorpusIndex> donors;
  if (cfg.infer.shots > 0 && cfg.infer.source == InferenceExemplarSource::kTrainDonor) {
    train = LoadSplit(cfg.corpus, "train");
    donors.emplace(train);
  }
  EvalOutputs out;
  out.evaluation = EvaluateSplit(ck.params, test, cfg.infer, donors ? &*donors : nullptr);
  std::vector<RepetitionAnnotation> anns;
  std::map<std::string, DensityMap> maps;
  std::string dump;
  for (std::size_t i = 0; i < test.size(); ++i) {
    anns.push_back(test[i].annotation);
    maps[anns.back().video_id] = out.evaluation.predictions[i].density;
    dump += PredictionToJsonLine(out.evaluation.predictions[i]) + "\n";
  }
  out.metrics = BuildFullReport(anns, out.evaluation.predictions);
  out.localisation = MakeLocalisationReport(maps, anns, cfg.thetas);
  WriteText(cfg.out / "predictions.jsonl", dump);
  WriteEvalReports(cfg.out, out.metrics, out.evaluation.pairs);
  WriteText(cfg.out / "localisation.txt", LocalisationToText(out.localisation));
  WriteText(cfg.out / "localisation.json", LocalisationToJson(out.localisation) + "\n");
  if (cfg.echo) std::printf("%s\nlocalisation (mean Jaccard)\n%s", ReportToText(out.metrics).c_str(),
              LocalisationToText(out.localisation).c_str());
  return out;
}

CountPrediction CmdInfer(const RunConfig& cfg) {
  if (cfg.features.empty()) throw std::runtime_error("infer needs --features");
  const auto ck = LoadCheckpoint(cfg.checkpoint);
  CorpusItem query;
  query.features = LoadFeatures(cfg.features);
  if (!cfg.sidecar.empty()) query.annotation = LoadSidecar(cfg.sidecar);
  if (query.annotation.video_id.empty()) query.annotation.video_id = query.features.source_id;
  std::vector<CorpusItem> train;
  std::optional<CorpusIndex> donors;
  std::vector<ExemplarLatent> exemplars;
  if (cfg.infer.shots > 0) {
    if (cfg.infer.source == InferenceExemplarSource::kTrainDonor) {
      train = LoadSplit(cfg.corpus, "train");
      donors.emplace(train);
    }
    std::mt19937_64 rng(cfg.seed);
    exemplars = ExemplarsForInference(cfg.infer.shots, cfg.infer.source, query, donors ? &*donors : nullptr,
                                      ck.params.config.exemplar_tokens, rng);
  }
  auto p = PredictCount(ck.params, query.features, exemplars, cfg.infer.shifts, cfg.infer.positional);
  p.video_id = query.annotation.video_id;
  if (cfg.echo) std::printf("%s raw_count %.4f rounded_count %lld\n", p.video_id.c_str(), p.raw_count,
              static_cast<long long>(p.rounded_count));
  if (!cfg.predictions.empty()) WriteText(cfg.predictions, PredictionToJsonLine(p) + "\n");
  return p;
}

LocalisationReport CmdLocalise(const RunConfig& cfg) {
  const auto preds = ReadPredictions(PredictionsPath(cfg));
  std::map<std::string, DensityMap> maps;
  for (const auto& p : preds) maps[p.video_id] = p.density;
  const auto anns = LoadAnnotations(cfg.corpus, cfg.split);
  auto report = MakeLocalisationReport(maps, anns, cfg.thetas);
  WriteText(cfg.out / "localisation.txt", LocalisationToText(report));
  WriteText(cfg.out / "localisation.json", LocalisationToJson(report) + "\n");
  if (cfg.echo) std::printf("%s", LocalisationToText(report).c_str());
  return report;
}

FullReport CmdReport(const RunConfig& cfg) {
  const auto preds = ReadPredictions(PredictionsPath(cfg));
  const auto anns = LoadAnnotations(cfg.corpus, cfg.split);
  auto report = BuildFullReport(anns, preds);
  std::vector<CountPair> pairs;
  const auto matched = MatchPredictions(anns, preds);
  for (std::size_t i = 0; i < anns.size(); ++i) pairs.push_back({static_cast<double>(anns[i].count), matched[i].raw_count});
  WriteEvalReports(cfg.out, report, pairs);
  if (cfg.echo) std::printf("%s", ReportToText(report).c_str());
  return report;
}

std::string CmdBench(const RunConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  if (cfg.bench_windows == 0 || cfg.bench_iters == 0) throw std::runtime_error("bench needs windows and iterations");
  auto params = DecoderParams::Init(cfg.decoder, cfg.seed);
  std::mt19937_64 rng(cfg.seed);
  FeatureSequence seq;
  seq.grid = {cfg.decoder.window_grid.t * cfg.bench_windows, cfg.decoder.window_grid.h, cfg.decoder.window_grid.w};
  seq.tokens = Tensor::RandomNormal({seq.grid.tokens(), cfg.decoder.channels}, 1.0, rng);
  seq.frames_per_window = cfg.synth.video.frames_per_window;
  seq.raw_frames = cfg.bench_windows * seq.frames_per_window;
  seq.source_id = "bench";
  auto ann = MakePseudoLabels(std::max<std::uint32_t>(1, cfg.bench_windows / 2), seq.raw_frames);
  ann.video_id = "bench";
  const auto inst = PrepareInstance(seq, ann, {}, cfg.train.density, cfg.train.positional);

  auto t0 = Clock::now();
  for (std::uint32_t i = 0; i < cfg.bench_iters; ++i) ComputeGradients(params, std::span<const PreparedInstance>(&inst, 1));
  const double train_s = std::chrono::duration<double>(Clock::now() - t0).count() / cfg.bench_iters;
  t0 = Clock::now();
  for (std::uint32_t i = 0; i < cfg.bench_iters; ++i) PredictCount(params, seq, {}, cfg.infer.shifts, cfg.infer.positional);
  const double infer_s = std::chrono::duration<double>(Clock::now() - t0).count() / cfg.bench_iters;

  nlohmann::ordered_json j;
  j["windows"] = cfg.bench_windows;
  j["tokens"] = seq.grid.tokens();
  j["channels"] = cfg.decoder.channels;
  j["shifts"] = cfg.infer.shifts;
  j["train_sec_per_sample"] = train_s;
  j["infer_sec_per_sample"] = infer_s;
  WriteText(cfg.out / "bench.json", j.dump(2) + "\n");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "tokens %zu  channels %u  shifts %u\n  train (sec/sample)  %.4f\n  infer (sec/sample)  %.4f\n",
                seq.grid.tokens(), cfg.decoder.channels, cfg.infer.shifts, train_s, infer_s);
  if (cfg.echo) std::printf("%s", buf);
  return buf;
}

ParsedCli ParseCli(int argc, const char* const* argv) {
  ParsedCli parsed;
  RunConfig& cfg = parsed.config;
  CLI::App app{"escounts: exemplar-based repetition counting on encoded video features"};
  app.set_config("--config", "", "TOML/INI file of option values (command-line flags take precedence)");
  app.require_subcommand(1);
  app.fallthrough();

  auto* common = app.add_option_group("common");
  common->add_option("--seed", cfg.seed, "global seed")->envname("ESCOUNTS_SEED")->capture_default_str();
  common->add_option("--threads", cfg.threads, "worker cap for training and evaluation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  common->add_option("--corpus", cfg.corpus, "corpus directory (features/, annotations/, <split>.txt)")
      ->capture_default_str();
  common->add_option("--checkpoint", cfg.checkpoint, "model checkpoint path")->capture_default_str();
  common->add_option("--out", cfg.out, "report directory")->capture_default_str();
  common->add_option("--log", cfg.log, "training log (one JSON record per optimizer step)")->capture_default_str();

  auto& v = cfg.synth.video;
  auto* synth = app.add_option_group("synthetic corpus");
  synth->add_option("--train-videos", cfg.synth.n_train, "train videos")->capture_default_str();
  synth->add_option("--test-videos", cfg.synth.n_test, "test videos")->capture_default_str();
  synth->add_option("--classes", cfg.synth.classes, "action classes (one motif each)")->capture_default_str();
  synth->add_option("--count-min", v.count_min, "minimum repetitions per video")->capture_default_str();
  synth->add_option("--count-max", v.count_max, "maximum repetitions per video")->capture_default_str();
  synth->add_option("--rep-min-frames", v.duration_min_frames, "shortest repetition (raw frames)")->capture_default_str();
  synth->add_option("--rep-max-frames", v.duration_max_frames, "longest repetition (raw frames)")->capture_default_str();
  synth->add_option("--pause-prob", v.pause_probability, "chance of an idle gap after a repetition")
      ->capture_default_str();
  synth->add_option("--pause-min-frames", v.pause_min_frames, "shortest idle gap")->capture_default_str();
  synth->add_option("--pause-max-frames", v.pause_max_frames, "longest idle gap")->capture_default_str();
  synth->add_option("--edge-max-frames", v.edge_max_frames, "longest idle lead-in / tail")->capture_default_str();
  synth->add_option("--warp", v.warp_max, "per-repetition time warp strength in [0, 1)")->capture_default_str();
  synth->add_option("--noise", v.noise_sigma, "feature noise standard deviation")->capture_default_str();
  synth->add_option("--motif-dim", v.motif_dim, "harmonics per class motif")->capture_default_str();
  synth->add_option("--frames-per-window", v.frames_per_window,
                    "raw frames per encoder window (sampling rate x frames per clip)")
      ->capture_default_str();
  synth->add_option("--max-windows", v.max_windows, "longest video in encoder windows")->capture_default_str();

  auto& d = cfg.decoder;
  std::vector<std::uint32_t> grid{d.window_grid.t, d.window_grid.h, d.window_grid.w};
  std::vector<std::uint32_t> window{d.window[0], d.window[1], d.window[2]};
  const std::map<std::string, HeadAggregation> aggs{{"sum", HeadAggregation::kSum}, {"mean", HeadAggregation::kMean}};
  const std::map<std::string, HeadActivation> acts{{"softplus", HeadActivation::kSoftplus},
                                                   {"linear", HeadActivation::kLinear}};
  auto* model = app.add_option_group("model");
  model->add_option("--ca-blocks", d.ca_blocks, "cross-attention blocks (L)")->capture_default_str();
  model->add_option("--wsa-blocks", d.wsa_blocks, "windowed self-attention blocks (L')")->capture_default_str();
  model->add_option("--channels", d.channels, "latent channels C (features must match)")->capture_default_str();
  model->add_option("--heads", d.heads, "attention heads")->capture_default_str();
  model->add_option("--exemplar-tokens", d.exemplar_tokens, "tokens per exemplar latent (M_e)")->capture_default_str();
  model->add_option("--mlp-ratio", d.mlp_ratio, "MLP hidden width / C")->capture_default_str();
  model->add_option("--grid", grid, "encoder token grid per window t,h,w")
      ->expected(3)
      ->delimiter(',')
      ->capture_default_str();
  model->add_option("--window", window, "self-attention window t,h,w")
      ->expected(3)
      ->delimiter(',')
      ->capture_default_str();
  model->add_option("--head-agg", d.aggregation, "spatial aggregation in the density head")
      ->transform(CLI::CheckedTransformer(aggs, CLI::ignore_case))
      ->default_str("sum");
  model->add_option("--head-act", d.activation, "density head activation")
      ->transform(CLI::CheckedTransformer(acts, CLI::ignore_case))
      ->default_str("softplus");
  model->add_flag("--head-prior,!--no-head-prior", cfg.head_prior,
                  "start the head bias at the mean training density")
      ->capture_default_str();

  auto& t = cfg.train;
  const std::map<std::string, PositionalEncodingMode> pes{{"flattened", PositionalEncodingMode::kFlattened},
                                                          {"factorized", PositionalEncodingMode::kFactorized}};
  auto* train = app.add_option_group("training");
  train->add_option("--epochs", t.epochs, "total epochs")->capture_default_str();
  train->add_option("--lr", t.lr, "learning rate")->capture_default_str();
  train->add_option("--lr-decay", t.lr_decay, "step decay factor")->capture_default_str();
  train->add_option("--decay-every", t.decay_every, "epochs between decays")->capture_default_str();
  train->add_option("--warmup", t.warmup_steps, "linear warmup optimizer steps")->capture_default_str();
  train->add_option("--weight-decay", t.weight_decay, "decoupled weight decay")->capture_default_str();
  train->add_option("--accumulation", t.accumulation, "instances per optimizer step")->capture_default_str();
  train->add_option("--shot-set", t.exemplars.shot_set, "exemplar counts |S| sampled per instance")
      ->delimiter(',')
      ->capture_default_str();
  train->add_option("--p-cross", t.exemplars.p_cross_video, "chance an exemplar comes from another video (p)")
      ->capture_default_str();
  train->add_flag("--shared-draw", t.exemplars.per_instance_decision,
                  "one cross-video draw per instance instead of per exemplar")
      ->capture_default_str();
  train->add_option("--sigma", t.density.sigma, "density kernel width in tokens")->capture_default_str();
  train->add_flag("--variable-sigma", t.density.variable, "kernel width proportional to repetition length")
      ->capture_default_str();
  train->add_option("--sigma-ratio", t.density.variable_ratio, "width / length for --variable-sigma")
      ->capture_default_str();
  train->add_flag("--time-shift,!--no-time-shift", t.time_shift, "random start-time shifts")->capture_default_str();
  train->add_option("--pe", t.positional, "positional encoding")
      ->transform(CLI::CheckedTransformer(pes, CLI::ignore_case))
      ->default_str("flattened");
  train->add_option("--checkpoint-every", cfg.checkpoint_every, "epochs between checkpoints (0: final only)")
      ->capture_default_str();
  train->add_option("--resume", cfg.resume, "checkpoint to resume from");

  const std::map<std::string, InferenceExemplarSource> sources{{"test", InferenceExemplarSource::kTestVideo},
                                                               {"train", InferenceExemplarSource::kTrainDonor}};
  auto* infer = app.add_option_group("inference");
  infer->add_option("--shifts", cfg.infer.shifts, "time-shift ensemble size |K|")->capture_default_str();
  infer->add_option("--shots", cfg.infer.shots, "exemplars at inference (0: zero-shot)")->capture_default_str();
  infer->add_option("--exemplar-source", cfg.infer.source, "test (same video) or train (same-class donor)")
      ->transform(CLI::CheckedTransformer(sources, CLI::ignore_case))
      ->default_str("test");
  infer->add_option("--thetas", cfg.thetas, "localisation relative thresholds")->delimiter(',')->capture_default_str();
  infer->add_option("--features", cfg.features, "ESCF file for infer");
  infer->add_option("--sidecar", cfg.sidecar, "annotation sidecar for infer exemplars");
  infer->add_option("--predictions", cfg.predictions, "prediction dump (default <out>/predictions.jsonl)");
  infer->add_option("--split", cfg.split, "annotation split for localise and report")->capture_default_str();
  infer->add_option("--bench-windows", cfg.bench_windows, "bench sequence length in windows")->capture_default_str();
  infer->add_option("--bench-iters", cfg.bench_iters, "bench repetitions")->capture_default_str();

  app.add_subcommand("synth", "write a synthetic corpus");
  app.add_subcommand("train", "train the decoder");
  app.add_subcommand("eval", "evaluate the test split (metrics, localisation, predictions)");
  app.add_subcommand("infer", "count repetitions in one feature file");
  app.add_subcommand("localise", "localisation report from a prediction dump");
  app.add_subcommand("report", "metric report and scatter plot from a prediction dump");
  app.add_subcommand("bench", "train and inference throughput");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    parsed.exit_code = app.exit(e);
    return parsed;
  }
  parsed.command = app.get_subcommands().front()->get_name();
  // CLI11 lets a config file beat the environment; flip that
  const char* env_seed = std::getenv("ESCOUNTS_SEED");
  const bool seed_flag = std::any_of(argv + 1, argv + argc, [](const char* a) {
    return std::string_view(a) == "--seed" || std::string_view(a).starts_with("--seed=");
  });
  if (env_seed && !seed_flag && !app.get_config_ptr()->empty()) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env_seed, &used);
      if (used != std::string_view(env_seed).size()) throw std::invalid_argument(env_seed);
    } catch (const std::exception&) {
      std::fprintf(stderr, "ESCOUNTS_SEED: not an unsigned integer: %s\n", env_seed);
      parsed.exit_code = 2;
      return parsed;
    }
  }
  d.window_grid = {grid[0], grid[1], grid[2]};
  d.window = {window[0], window[1], window[2]};
  cfg.Resolve();
  return parsed;
}

int RunCli(int argc, char** argv) {
  try {
    const auto parsed = ParseCli(argc, argv);
    if (parsed.exit_code) return *parsed.exit_code;
    const auto& cfg = parsed.config;
    cfg.decoder.Validate();
    const auto& c = parsed.command;
    if (c == "synth") CmdSynth(cfg);
    if (c == "train") CmdTrain(cfg);
    if (c == "eval") CmdEval(cfg);
    if (c == "infer") CmdInfer(cfg);
    if (c == "localise") CmdLocalise(cfg);
    if (c == "report") CmdReport(cfg);
    if (c == "bench") CmdBench(cfg);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace escounts::app
