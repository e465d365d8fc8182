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

#include "escounts/annotations.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace escounts {
namespace {

TEST(PseudoLabels, UniformDivision) {
  const auto ann = MakePseudoLabels(4, 100);
  ASSERT_EQ(ann.repetitions.size(), 4u);
  EXPECT_TRUE(ann.is_pseudo);
  EXPECT_EQ(ann.repetitions[0], (FrameInterval{0, 25}));
  EXPECT_EQ(ann.repetitions[1], (FrameInterval{25, 50}));
  EXPECT_EQ(ann.repetitions[2], (FrameInterval{50, 75}));
  EXPECT_EQ(ann.repetitions[3], (FrameInterval{75, 100}));
}

TEST(PseudoLabels, SingleRepetitionCoversVideo) {
  const auto ann = MakePseudoLabels(1, 10);
  ASSERT_EQ(ann.repetitions.size(), 1u);
  EXPECT_EQ(ann.repetitions[0], (FrameInterval{0, 10}));
}

TEST(PseudoLabels, ZeroCountIsEmpty) {
  const auto ann = MakePseudoLabels(0, 10);
  EXPECT_EQ(ann.count, 0u);
  EXPECT_TRUE(ann.repetitions.empty());
}

TEST(PseudoLabels, FewerFramesThanCountThrows) { EXPECT_THROW(MakePseudoLabels(5, 4), AnnotationError); }

// Integer partition oracle: contiguous, covering, lengths within one frame.
TEST(PseudoLabels, PartitionOracle) {
  for (std::uint32_t c = 1; c <= 12; ++c) {
    for (std::int64_t r = c; r <= 60; ++r) {
      const auto ann = MakePseudoLabels(c, r);
      ASSERT_EQ(ann.repetitions.size(), c);
      EXPECT_EQ(ann.repetitions.front().start, 0);
      EXPECT_EQ(ann.repetitions.back().end, r);
      std::int64_t lo = r, hi = 0;
      for (std::size_t i = 0; i < c; ++i) {
        if (i > 0) EXPECT_EQ(ann.repetitions[i].start, ann.repetitions[i - 1].end);
        lo = std::min(lo, ann.repetitions[i].length());
        hi = std::max(hi, ann.repetitions[i].length());
      }
      EXPECT_LE(hi - lo, 1) << "c=" << c << " R=" << r;
      EXPECT_GE(lo, r / c);
    }
  }
  const auto ann = MakePseudoLabels(3, 10);
  EXPECT_EQ(ann.repetitions.back().end, 10);
}

TEST(Density, SingleRepetitionHasUnitMass) {
  for (double sigma : {0.0, 0.1, 0.5, 1.0, 3.0, 50.0}) {
    RepetitionAnnotation ann;
    ann.count = 1;
    ann.repetitions = {{40, 72}};
    const auto d = MakeDensityMap(ann, 12, 16.0, {.sigma = sigma});
    EXPECT_NEAR(d.Sum(), 1.0, 1e-6) << sigma;
  }
}

TEST(Density, ImpulseAtRoundedCenter) {
  const auto d = DensityFromCenters({5.0}, {0.0}, 10);
  for (std::size_t t = 0; t < 10; ++t) EXPECT_EQ(d[t], t == 5 ? 1.0 : 0.0);
}

TEST(Density, CenterMappedToTokenCoordinates) {
  // repetition [32, 48) at 16 frames/token lies exactly in token 2
  RepetitionAnnotation ann;
  ann.count = 1;
  ann.repetitions = {{32, 48}};
  const auto d = MakeDensityMap(ann, 6, 16.0, {.sigma = 0.0});
  EXPECT_EQ(d.values[2], 1.0f);
}

TEST(Density, CenterOutsideRangeThrows) {
  RepetitionAnnotation ann;
  ann.count = 1;
  ann.repetitions = {{90, 130}};
  EXPECT_THROW(MakeDensityMap(ann, 6, 16.0), AnnotationError);
}

TEST(Density, SumMatchesCountForRandomAnnotations) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t tokens = 4 + rng() % 60;
    const double fpt = 8.0;
    const auto count = static_cast<std::uint32_t>(rng() % 21);
    RepetitionAnnotation ann;
    ann.count = count;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto s = static_cast<std::int64_t>(rng() % (tokens * 8 - 1));
      ann.repetitions.push_back({s, s + 1 + static_cast<std::int64_t>(rng() % 40)});
    }
    std::sort(ann.repetitions.begin(), ann.repetitions.end(),
              [](const auto& a, const auto& b) { return a.start < b.start; });
    for (auto& r : ann.repetitions) {
      // keep centers inside the grid
      r.end = std::min<std::int64_t>(r.end, static_cast<std::int64_t>(tokens * 8));
    }
    for (const DensityConfig cfg : {DensityConfig{.sigma = 0.0}, DensityConfig{.sigma = 0.5},
                                    DensityConfig{.sigma = 2.0}, DensityConfig{.variable = true}}) {
      const auto d = MakeDensityMap(ann, tokens, fpt, cfg);
      EXPECT_NEAR(d.Sum(), static_cast<double>(count), 1e-5);
      for (float v : d.values) EXPECT_GE(v, 0.0f);
    }
  }
}

TEST(Density, TranslationEquivariance) {
  RepetitionAnnotation ann;
  ann.count = 2;
  ann.repetitions = {{64, 100}, {120, 170}};
  const double fpt = 16.0;
  const auto base = MakeDensityMap(ann, 40, fpt, {.sigma = 0.5});
  for (int k = 1; k <= 5; ++k) {
    auto shifted = ann;
    for (auto& r : shifted.repetitions) {
      r.start += static_cast<std::int64_t>(k * fpt);
      r.end += static_cast<std::int64_t>(k * fpt);
    }
    const auto d = MakeDensityMap(shifted, 40, fpt, {.sigma = 0.5});
    for (std::size_t t = k; t < 40; ++t) EXPECT_NEAR(d.values[t], base.values[t - k], 1e-6);
  }
}

TEST(Density, VariableWidthScalesWithLength) {
  RepetitionAnnotation ann;
  ann.count = 1;
  ann.repetitions = {{0, 160}};  // 10 tokens at 16 frames/token -> sigma 2.5
  const auto d = MakeDensityMap(ann, 20, 16.0, {.variable = true});
  const auto expected = DensityFromCenters({4.5}, {2.5}, 20);
  for (std::size_t t = 0; t < 20; ++t) EXPECT_NEAR(d.values[t], expected[t], 1e-6);
}

TEST(Downsample, FirstAndLastFrames) {
  EXPECT_EQ(DownsampleAlignment(0, 16.0, 12), 0u);
  EXPECT_EQ(DownsampleAlignment(191, 16.0, 12), 11u);
  EXPECT_THROW(DownsampleAlignment(192, 16.0, 12), AnnotationError);
  EXPECT_THROW(DownsampleAlignment(-1, 16.0, 12), AnnotationError);
}

TEST(Downsample, FullScaleEightFramesPerToken) {
  // a 64-frame window encodes to 8 temporal tokens
  const double fpt = 64.0 / 8.0;
  EXPECT_EQ(fpt, 8.0);
  EXPECT_EQ(DownsampleAlignment(7, fpt, 8), 0u);
  EXPECT_EQ(DownsampleAlignment(8, fpt, 8), 1u);
  EXPECT_EQ(DownsampleAlignment(63, fpt, 8), 7u);
}

TEST(Sidecar, JsonRoundTrip) {
  RepetitionAnnotation ann;
  ann.video_id = "v001";
  ann.class_label = "squat";
  ann.fps = 25.0;
  ann.count = 2;
  ann.repetitions = {{3, 40}, {41, 90}};
  const auto back = SidecarFromJson(SidecarToJson(ann));
  EXPECT_EQ(back.video_id, "v001");
  EXPECT_EQ(back.class_label, "squat");
  EXPECT_EQ(back.fps, 25.0);
  EXPECT_EQ(back.count, 2u);
  EXPECT_EQ(back.repetitions, ann.repetitions);
}

TEST(Sidecar, CountMismatchRejected) {
  EXPECT_THROW(SidecarFromJson(R"({"video_id":"a","class_label":"x","fps":30,"count":3,"repetitions":[[0,4]]})"),
               AnnotationError);
  EXPECT_THROW(SidecarFromJson("{not json"), AnnotationError);
}

TEST(Sidecar, CountOnlyResolvesToPseudoLabels) {
  auto ann = SidecarFromJson(R"({"video_id":"a","class_label":"x","fps":30,"count":4,"repetitions":[]})");
  ann = ResolvePseudoLabels(ann, 100);
  EXPECT_TRUE(ann.is_pseudo);
  ASSERT_EQ(ann.repetitions.size(), 4u);
  EXPECT_EQ(ann.repetitions[3], (FrameInterval{75, 100}));
}

TEST(TokenIntervals, ClosedIntervalsInTokenUnits) {
  RepetitionAnnotation ann;
  ann.count = 2;
  ann.repetitions = {{0, 48}, {48, 192}};
  const auto iv = ToTokenIntervals(ann, 16.0, 12);
  EXPECT_EQ(iv[0].first, 0u);
  EXPECT_EQ(iv[0].last, 2u);
  EXPECT_EQ(iv[1].first, 3u);
  EXPECT_EQ(iv[1].last, 11u);
}

}  // namespace
}  // namespace escounts
