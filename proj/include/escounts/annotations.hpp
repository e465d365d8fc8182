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
#include <stdexcept>
#include <string>
#include <vector>

namespace escounts {

class AnnotationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Half-open raw-frame interval [start, end).
struct FrameInterval {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - start; }
  double center() const { return 0.5 * static_cast<double>(start + end); }
  bool operator==(const FrameInterval&) const = default;
};

// Ground-truth (or pseudo) repetition labels for one video, in raw frames.
struct RepetitionAnnotation {
  std::string video_id;
  std::string class_label;
  double fps = 30.0;
  std::uint32_t count = 0;
  std::vector<FrameInterval> repetitions;
  bool is_pseudo = false;

  // Throws AnnotationError when the invariants do not hold.
  void Validate() const;
};

// c contiguous intervals partitioning [0, raw_frames); lengths differ by at most 1.
RepetitionAnnotation MakePseudoLabels(std::uint32_t count, std::int64_t raw_frames);

// Fills missing intervals with pseudo-labels when only a count is known.
RepetitionAnnotation ResolvePseudoLabels(RepetitionAnnotation ann, std::int64_t raw_frames);

// Raw frame -> temporal token: floor(frame / frames_per_token), clamped to [0, tokens - 1].
std::size_t DownsampleAlignment(std::int64_t raw_frame, double frames_per_token, std::size_t tokens);

struct DensityConfig {
  // Kernel width in temporal-token units. 0 gives a unit impulse.
  double sigma = 0.5;
  // Per-repetition width proportional to the interval length.
  bool variable = false;
  double variable_ratio = 0.25;
};

struct DensityMap {
  std::vector<float> values;
  double frames_per_token = 1.0;

  double Sum() const;
  std::size_t size() const { return values.size(); }
};

// Sum of per-repetition Gaussians, each renormalized over the visible bins so
// that it contributes exactly one unit of mass.
DensityMap MakeDensityMap(const RepetitionAnnotation& ann, std::size_t tokens, double frames_per_token,
                          const DensityConfig& config = {});

// Same construction from centers and widths already in token units. Bin t sits
// at coordinate t.
std::vector<double> DensityFromCenters(const std::vector<double>& centers, const std::vector<double>& sigmas,
                                       std::size_t tokens);

// Closed token-unit interval [first, last] holding frames start .. end - 1.
struct TokenInterval {
  std::size_t first = 0;
  std::size_t last = 0;
};
std::vector<TokenInterval> ToTokenIntervals(const RepetitionAnnotation& ann, double frames_per_token,
                                            std::size_t tokens);

// JSON sidecar {video_id, class_label, fps, count, repetitions: [[start, end], ...]}.
std::string SidecarToJson(const RepetitionAnnotation& ann);
RepetitionAnnotation SidecarFromJson(const std::string& text);
void SaveSidecar(const RepetitionAnnotation& ann, const std::filesystem::path& path);
RepetitionAnnotation LoadSidecar(const std::filesystem::path& path);

}  // namespace escounts
