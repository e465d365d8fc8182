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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "escounts/corpus.hpp"
#include "escounts/decoder.hpp"
#include "escounts/inference.hpp"
#include "escounts/localisation.hpp"
#include "escounts/metrics.hpp"
#include "escounts/training.hpp"

namespace escounts::app {

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path corpus = "corpus";
  std::filesystem::path checkpoint = "model.ck";
  std::filesystem::path out = "reports";
  std::filesystem::path log = "train_log.jsonl";

  SynthCorpusSpec synth;
  DecoderConfig decoder;
  bool head_prior = true;

  TrainConfig train;
  std::uint32_t checkpoint_every = 10;
  std::filesystem::path resume;

  InferenceConfig infer;
  std::vector<double> thetas = DefaultThetaGrid();
  std::filesystem::path features;     // infer
  std::filesystem::path sidecar;      // infer, for same-video exemplars
  std::filesystem::path predictions;  // localise / report; defaults to <out>/predictions.jsonl
  std::string split = "test";
  bool echo = true;                   // print reports to stdout         // annotations for localise / report

  std::uint32_t bench_windows = 8;
  std::uint32_t bench_iters = 3;

  // Copies shared values (seed, threads, channels, grid) into the module configs.
  void Resolve();
};

struct EvalOutputs {
  Evaluation evaluation;
  FullReport metrics;
  LocalisationReport localisation;
};

void CmdSynth(const RunConfig& cfg);
// Returns the final epoch report.
EpochReport CmdTrain(const RunConfig& cfg);
EvalOutputs CmdEval(const RunConfig& cfg);
CountPrediction CmdInfer(const RunConfig& cfg);
LocalisationReport CmdLocalise(const RunConfig& cfg);
FullReport CmdReport(const RunConfig& cfg);
std::string CmdBench(const RunConfig& cfg);

// Overall metrics, OBN curve and grouped tables (count, repetition duration,
// video duration). Duration presets are used when they cover every video,
// equal-population bins otherwise.
FullReport BuildFullReport(std::span<const RepetitionAnnotation> annotations,
                           std::span<const CountPrediction> predictions);

struct ParsedCli {
  RunConfig config;    // resolved
  std::string command;
  std::optional<int> exit_code;  // set for --help or a parse error (already printed)
};
ParsedCli ParseCli(int argc, const char* const* argv);
int RunCli(int argc, char** argv);

}  // namespace escounts::app
