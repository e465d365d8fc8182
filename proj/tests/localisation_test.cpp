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
#include <random>

#include "escounts/localisation.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

namespace escounts {
namespace {

using testing::EnumeratedJaccard;
using testing::RandomJaccardCase;

using Peaks = std::vector<std::size_t>;

Peaks PeaksOf(std::vector<float> d, double theta) { return DetectPeaks(d, theta).indices; }

TEST(DetectPeaks, ConstantMapHasNoPeaks) {
  EXPECT_TRUE(PeaksOf({0.3f, 0.3f, 0.3f, 0.3f}, 0.5).empty());
  EXPECT_TRUE(PeaksOf({0.3f, 0.3f, 0.3f, 0.3f}, 0.0).empty());
  EXPECT_TRUE(PeaksOf({0.7f}, 0.0).empty());
}

TEST(DetectPeaks, RelativeThreshold) {
  const std::vector<float> d{0, 1, 0, 2, 0};
  const auto p = DetectPeaks(d, 0.4);
  EXPECT_DOUBLE_EQ(p.threshold, 0.8);
  // value 1 clears r = 0.8
  EXPECT_EQ(p.indices, (Peaks{1, 3}));
  EXPECT_EQ(PeaksOf(d, 0.6), (Peaks{3}));
  EXPECT_EQ(PeaksOf(d, 0.0), (Peaks{1, 3}));
  EXPECT_EQ(PeaksOf(d, 1.0), (Peaks{3}));
}

TEST(DetectPeaks, PlateausAndBoundaries) {
  EXPECT_EQ(PeaksOf({0, 2, 2, 0}, 0.0), (Peaks{1}));
  EXPECT_EQ(PeaksOf({0, 2, 2, 3}, 0.0), (Peaks{3}));
  EXPECT_EQ(PeaksOf({3, 1, 2}, 0.0), (Peaks{0, 2}));
  EXPECT_EQ(PeaksOf({2, 2, 1}, 0.0), (Peaks{0}));
  EXPECT_EQ(PeaksOf({1, 2, 2, 1, 2, 2}, 0.0), (Peaks{1, 4}));
}

TEST(DetectPeaks, RejectsBadInput) {
  EXPECT_THROW(PeaksOf({}, 0.5), LocalisationError);
  EXPECT_THROW(PeaksOf({1, 2}, 1.5), LocalisationError);
  EXPECT_THROW(PeaksOf({1, 2}, -0.1), LocalisationError);
}

TEST(DetectPeaks, CountNonIncreasingInTheta) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> d(30);
    for (auto& v : d) v = u(rng);
    Peaks prev = PeaksOf(d, 0.0);
    for (int i = 1; i <= 10; ++i) {
      const auto cur = PeaksOf(d, i / 10.0);
      ASSERT_LE(cur.size(), prev.size());
      for (auto p : cur) ASSERT_NE(std::find(prev.begin(), prev.end(), p), prev.end());
      prev = cur;
    }
  }
}

TEST(Jaccard, Fixtures) {
  const std::vector<TokenInterval> two{{0, 3}, {5, 8}};
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{1, 6}, two), 1.0);
  // one hit, one stray peak, one missed repetition
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{2, 4}, two), 1.0 / 3.0);
  const std::vector<TokenInterval> three{{0, 1}, {2, 3}, {4, 5}};
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{}, three), 0.0);
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{}, std::vector<TokenInterval>{}), 1.0);
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{3}, std::vector<TokenInterval>{}), 0.0);
  // repeated hits in one repetition count once
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{0, 1, 2}, two), 0.5);
  // closed intervals
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{3, 8}, two), 1.0);
  EXPECT_DOUBLE_EQ(Jaccard(Peaks{0, 5}, two), 1.0);
}

TEST(Jaccard, MatchesEnumerationOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = RandomJaccardCase(rng);
    ASSERT_EQ(Jaccard(c.peaks, c.reps), EnumeratedJaccard(c.peaks, c.reps, c.tokens)) << trial;
  }
}

TEST(Jaccard, ShiftInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = RandomJaccardCase(rng);
    const double before = Jaccard(c.peaks, c.reps);
    const std::size_t k = trial % 7;
    for (auto& p : c.peaks) p += k;
    for (auto& r : c.reps) r = {r.first + k, r.last + k};
    ASSERT_EQ(Jaccard(c.peaks, c.reps), before);
  }
}

RepetitionAnnotation Ann(std::string id, std::vector<FrameInterval> reps) {
  RepetitionAnnotation a;
  a.video_id = std::move(id);
  a.count = static_cast<std::uint32_t>(reps.size());
  a.repetitions = std::move(reps);
  return a;
}

TEST(LocalisationReport, PerfectlyLocalisedCorpusScoresOne) {
  std::vector<RepetitionAnnotation> anns{Ann("a", {{0, 64}, {64, 128}, {160, 224}}), Ann("b", {{32, 96}}),
                                         Ann("empty", {})};
  std::map<std::string, DensityMap> preds;
  for (const auto& a : anns) preds[a.video_id] = MakeDensityMap(a, 16, 16.0, DensityConfig{.sigma = 0.0});
  const auto grid = DefaultThetaGrid();
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.1);
  EXPECT_DOUBLE_EQ(grid.back(), 0.9);
  const auto r = MakeLocalisationReport(preds, anns, grid);
  for (const auto& row : r.rows) EXPECT_DOUBLE_EQ(row.mean_jaccard, 1.0) << row.theta;
  EXPECT_DOUBLE_EQ(r.average, 1.0);
  EXPECT_EQ(r.videos, 3u);
}

TEST(LocalisationReport, AveragesOverVideosAndThresholds) {
  // video x: peaks at 1 and 3 (values 1 and 2); one repetition covering token 3
  std::vector<RepetitionAnnotation> anns{Ann("x", {{48, 64}})};
  std::map<std::string, DensityMap> preds;
  preds["x"] = DensityMap{{0, 1, 0, 2, 0}, 16.0};
  const std::vector<double> thetas{0.4, 0.6};
  const auto r = MakeLocalisationReport(preds, anns, thetas);
  EXPECT_DOUBLE_EQ(r.rows[0].mean_jaccard, 0.5);
  EXPECT_DOUBLE_EQ(r.rows[1].mean_jaccard, 1.0);
  EXPECT_DOUBLE_EQ(r.average, 0.75);
  const auto j = nlohmann::json::parse(LocalisationToJson(r));
  EXPECT_DOUBLE_EQ(j["average"].get<double>(), 0.75);
  EXPECT_NE(LocalisationToText(r).find("0.7500"), std::string::npos);
}

TEST(LocalisationReport, CountOnlyAnnotationsUsePseudoLabels) {
  auto ann = Ann("c", {});
  ann.count = 2;
  std::map<std::string, DensityMap> preds;
  // pseudo-labels split 8 tokens into [0,3] and [4,7]
  preds["c"] = DensityMap{{0, 1, 0, 0, 0, 0, 1, 0}, 8.0};
  const std::vector<double> theta{0.5};
  EXPECT_DOUBLE_EQ(MakeLocalisationReport(preds, std::vector<RepetitionAnnotation>{ann}, theta).average, 1.0);
}

TEST(LocalisationReport, MissingPredictionRejected) {
  std::vector<RepetitionAnnotation> anns{Ann("z", {{0, 16}})};
  const std::vector<double> theta{0.5};
  EXPECT_THROW(MakeLocalisationReport({}, anns, theta), LocalisationError);
  EXPECT_THROW(MakeLocalisationReport({}, anns, {}), LocalisationError);
}

}  // namespace
}  // namespace escounts
