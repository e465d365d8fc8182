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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"

namespace escounts::app {
namespace {

namespace fs = std::filesystem;

struct Argv {
  explicit Argv(std::vector<std::string> args) : args_(std::move(args)) {
    args_.insert(args_.begin(), "escounts");
    for (auto& a : args_) ptrs_.push_back(a.data());
  }
  int argc() const { return static_cast<int>(ptrs_.size()); }
  char** argv() { return ptrs_.data(); }

 private:
  std::vector<std::string> args_;
  std::vector<char*> ptrs_;
};

ParsedCli Parse(std::vector<std::string> args) {
  Argv a(std::move(args));
  return ParseCli(a.argc(), a.argv());
}

int Invoke(std::vector<std::string> args) {
  Argv a(std::move(args));
  return RunCli(a.argc(), a.argv());
}

std::string Slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path Scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("escounts_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

class EnvSeed {
 public:
  explicit EnvSeed(const char* value) { setenv("ESCOUNTS_SEED", value, 1); }
  ~EnvSeed() { unsetenv("ESCOUNTS_SEED"); }
};

TEST(Cli, DefaultsAndResolve) {
  const auto p = Parse({"train", "--seed", "5", "--threads", "2", "--exemplar-tokens", "8"});
  ASSERT_FALSE(p.exit_code);
  EXPECT_EQ(p.command, "train");
  const auto& c = p.config;
  EXPECT_EQ(c.train.seed, 5u);
  EXPECT_EQ(c.infer.seed, 5u);
  EXPECT_EQ(c.synth.seed, 5u);
  EXPECT_EQ(c.train.threads, 2u);
  EXPECT_EQ(c.infer.threads, 2u);
  EXPECT_EQ(c.train.exemplars.exemplar_tokens, 8u);
  EXPECT_EQ(c.synth.video.channels, c.decoder.channels);
  EXPECT_DOUBLE_EQ(c.train.lr, 5e-5);
  EXPECT_EQ(c.train.epochs, 300u);
  EXPECT_EQ(c.infer.shifts, 4u);
  EXPECT_EQ(c.infer.shots, 0u);
  EXPECT_TRUE(c.head_prior);
  EXPECT_EQ(c.train.time_shift, TrainConfig{}.time_shift);
  EXPECT_TRUE(Parse({"train", "--no-head-prior", "--head-prior"}).config.head_prior);
  EXPECT_FALSE(Parse({"train", "--no-time-shift"}).config.train.time_shift);
}

TEST(Cli, ParsesStructuredOptions) {
  const auto p = Parse({"eval", "--grid", "2,3,3", "--window", "1,3,3", "--shot-set", "0,2", "--head-agg", "MEAN",
                        "--head-act", "linear", "--pe", "factorized", "--exemplar-source", "train", "--no-head-prior",
                        "--thetas", "0.25,0.75"});
  ASSERT_FALSE(p.exit_code);
  const auto& c = p.config;
  EXPECT_EQ(c.decoder.window_grid, (TokenGrid{2, 3, 3}));
  EXPECT_EQ(c.synth.video.window_grid, (TokenGrid{2, 3, 3}));
  EXPECT_EQ(c.decoder.window[1], 3u);
  EXPECT_EQ(c.train.exemplars.shot_set, (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(c.decoder.aggregation, HeadAggregation::kMean);
  EXPECT_EQ(c.decoder.activation, HeadActivation::kLinear);
  EXPECT_EQ(c.train.positional, PositionalEncodingMode::kFactorized);
  EXPECT_EQ(c.infer.positional, PositionalEncodingMode::kFactorized);
  EXPECT_EQ(c.infer.source, InferenceExemplarSource::kTrainDonor);
  EXPECT_FALSE(c.head_prior);
  EXPECT_EQ(c.thetas, (std::vector<double>{0.25, 0.75}));
}

TEST(Cli, RejectsBadInput) {
  EXPECT_TRUE(Parse({}).exit_code.value_or(0) != 0);
  EXPECT_TRUE(Parse({"train", "--head-act", "relu"}).exit_code.value_or(0) != 0);
  EXPECT_TRUE(Parse({"train", "--grid", "4,2"}).exit_code.value_or(0) != 0);
  EXPECT_TRUE(Parse({"fly"}).exit_code.value_or(0) != 0);
  EXPECT_EQ(Invoke({"infer", "--checkpoint", "/nonexistent/model.ck", "--features", "/nonexistent/x.escf"}), 1);
}

TEST(Cli, HelpListsEveryKnob) {
  testing::internal::CaptureStdout();
  const auto p = Parse({"--help"});
  const auto help = testing::internal::GetCapturedStdout();
  EXPECT_EQ(p.exit_code, 0);
  for (const char* knob : {"--seed", "--threads", "--config", "--ca-blocks", "--wsa-blocks", "--channels", "--heads",
                           "--exemplar-tokens", "--grid", "--window", "--epochs", "--lr", "--lr-decay",
                           "--decay-every", "--weight-decay", "--accumulation", "--shot-set", "--p-cross", "--sigma",
                           "--time-shift", "--shifts", "--shots", "--exemplar-source", "--thetas",
                           "--frames-per-window", "ESCOUNTS_SEED"}) {
    EXPECT_NE(help.find(knob), std::string::npos) << knob;
  }
  for (const char* cmd : {"synth", "train", "eval", "infer", "localise", "report", "bench"}) {
    EXPECT_NE(help.find(cmd), std::string::npos) << cmd;
  }
}

TEST(Cli, PrecedenceFlagOverEnvOverFileOverDefault) {
  const auto dir = Scratch("precedence");
  const auto file = dir / "run.toml";
  std::ofstream(file) << "seed = 7\nepochs = 12\nlr = 1e-3\nshot-set = [1, 2]\n";

  auto p = Parse({"train", "--config", file.string()});
  EXPECT_EQ(p.config.seed, 7u);
  EXPECT_EQ(p.config.train.epochs, 12u);
  EXPECT_DOUBLE_EQ(p.config.train.lr, 1e-3);
  EXPECT_EQ(p.config.train.exemplars.shot_set, (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(p.config.train.accumulation, RunConfig{}.train.accumulation);
  {
    EnvSeed env("9");
    p = Parse({"train", "--config", file.string()});
    EXPECT_EQ(p.config.seed, 9u);
    p = Parse({"train", "--config", file.string(), "--seed", "11", "--epochs", "2"});
    EXPECT_EQ(p.config.seed, 11u);
    EXPECT_EQ(p.config.train.epochs, 2u);
    p = Parse({"train"});
    EXPECT_EQ(p.config.seed, 9u);
  }
  EXPECT_EQ(Parse({"train"}).config.seed, 0u);
}

TEST(Cli, ShippedDeskConfigParses) {
  const auto p = Parse({"train", "--config", ESCOUNTS_SOURCE_DIR "/configs/desk.toml"});
  ASSERT_FALSE(p.exit_code);
  EXPECT_EQ(p.config.train.epochs, 30u);
  EXPECT_DOUBLE_EQ(p.config.train.lr, 5e-4);
  EXPECT_EQ(p.config.train.warmup_steps, 100u);
  EXPECT_EQ(p.config.train.decay_every, 6u);
  EXPECT_EQ(p.config.decoder.channels, 64u);
}

TEST(Cli, PipelineIsDeterministic) {
  const auto dir = Scratch("pipeline");
  const auto corpus = (dir / "corpus").string();
  const std::vector<std::string> knobs{"--seed", "3", "--corpus", corpus, "--train-videos", "6", "--test-videos",
                                       "3", "--epochs", "1", "--lr", "5e-4", "--accumulation", "2"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), knobs.begin(), knobs.end());
    return args;
  };
  ASSERT_EQ(Invoke(with({"synth"})), 0);
  std::string ck[2], preds[2], log[2];
  for (int run = 0; run < 2; ++run) {
    const auto tag = std::to_string(run);
    const auto model = (dir / ("m" + tag + ".ck")).string();
    const auto out = (dir / ("r" + tag)).string();
    const auto train_log = (dir / ("log" + tag + ".jsonl")).string();
    ASSERT_EQ(Invoke(with({"train", "--checkpoint", model, "--log", train_log})), 0);
    testing::internal::CaptureStdout();
    ASSERT_EQ(Invoke(with({"eval", "--checkpoint", model, "--out", out, "--shots", "1"})), 0);
    testing::internal::GetCapturedStdout();
    ck[run] = Slurp(model);
    preds[run] = Slurp(fs::path(out) / "predictions.jsonl");
    log[run] = Slurp(train_log);
  }
  EXPECT_FALSE(ck[0].empty());
  EXPECT_EQ(ck[0], ck[1]);
  EXPECT_EQ(preds[0], preds[1]);
  EXPECT_EQ(std::count(preds[0].begin(), preds[0].end(), '\n'), 3);
  EXPECT_EQ(log[0], log[1]);
  for (const char* f : {"metrics.txt", "metrics.json", "localisation.txt", "localisation.json", "scatter.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "r0" / f)) << f;
  }

  testing::internal::CaptureStdout();
  ASSERT_EQ(Invoke(with({"report", "--predictions", (dir / "r0" / "predictions.jsonl").string(), "--out",
                      (dir / "rep").string()})),
            0);
  ASSERT_EQ(Invoke(with({"localise", "--predictions", (dir / "r0" / "predictions.jsonl").string(), "--out",
                      (dir / "rep").string()})),
            0);
  testing::internal::GetCapturedStdout();
  EXPECT_EQ(Slurp(dir / "rep" / "metrics.json"), Slurp(dir / "r0" / "metrics.json"));
  EXPECT_EQ(Slurp(dir / "rep" / "localisation.json"), Slurp(dir / "r0" / "localisation.json"));
}

TEST(Cli, ResumeContinuesTraining) {
  const auto dir = Scratch("resume");
  const auto corpus = (dir / "corpus").string();
  const std::vector<std::string> knobs{"--seed", "4", "--corpus", corpus, "--train-videos", "4", "--test-videos",
                                       "2", "--lr", "5e-4", "--accumulation", "2"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), knobs.begin(), knobs.end());
    return args;
  };
  ASSERT_EQ(Invoke(with({"synth"})), 0);
  const auto straight = (dir / "straight.ck").string();
  const auto half = (dir / "half.ck").string();
  const auto resumed = (dir / "resumed.ck").string();
  ASSERT_EQ(Invoke(with({"train", "--epochs", "2", "--checkpoint", straight, "--log", (dir / "a.jsonl").string()})), 0);
  ASSERT_EQ(Invoke(with({"train", "--epochs", "1", "--checkpoint", half, "--log", (dir / "b.jsonl").string()})), 0);
  ASSERT_EQ(Invoke(with({"train", "--epochs", "2", "--resume", half, "--checkpoint", resumed, "--log",
                      (dir / "b.jsonl").string()})),
            0);
  EXPECT_EQ(Slurp(straight), Slurp(resumed));
  EXPECT_EQ(Slurp(dir / "a.jsonl"), Slurp(dir / "b.jsonl"));
}

}  // namespace
}  // namespace escounts::app
