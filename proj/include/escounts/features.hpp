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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "escounts/annotations.hpp"
#include "escounts/numerics/tensor.hpp"

namespace escounts {

// Spatiotemporal token grid (T', H', W'); tokens are laid out row-major in (t, h, w).
struct TokenGrid {
  std::uint32_t t = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;

  std::size_t spatial() const { return std::size_t{h} * w; }
  std::size_t tokens() const { return std::size_t{t} * h * w; }
  bool operator==(const TokenGrid&) const = default;
};

// Encoded video latents plus raw-frame provenance.
struct FeatureSequence {
  Tensor tokens;  // [M, C], M = T' H' W'
  TokenGrid grid;
  std::uint32_t raw_frames = 0;
  std::uint32_t frames_per_window = 64;
  std::string source_id;

  std::size_t channels() const { return tokens.rank() == 2 ? tokens.dim(1) : 0; }
  double frames_per_token() const { return static_cast<double>(raw_frames) / grid.t; }
  // Throws ShapeError on M != T' H' W' or a zero-sized grid.
  void Validate() const;
  // Tokens of temporal indices [first, first + count).
  FeatureSequence TemporalSlice(std::size_t first, std::size_t count) const;
};

enum class ExemplarOrigin { kSameVideo, kOtherVideo, kLearnedZ0 };

struct ExemplarLatent {
  Tensor tokens;  // [M_e, C]
  ExemplarOrigin origin = ExemplarOrigin::kSameVideo;
  std::optional<FrameInterval> source_interval;  // empty for the learned latent
  std::string source_id;
  std::string class_label;
};

enum class PositionalEncodingMode { kFlattened, kFactorized };

// Standard sinusoid table [positions, channels]: sin at even, cos at odd channels.
Tensor SinusoidalTable(std::size_t positions, std::size_t channels);

// Adds sinusoidal encoding over the flattened token index (default) or as a sum
// of per-axis encodings. Not idempotent: applying twice adds it twice.
FeatureSequence AddPositionalEncoding(const FeatureSequence& seq,
                                      PositionalEncodingMode mode = PositionalEncodingMode::kFlattened);

// ESCF container: "ESCF", u32 version, T', H', W', C, R, frames_per_window,
// then M*C little-endian f32.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

enum class FeatureFormatErrorKind { kIo, kBadMagic, kVersionMismatch, kDimensionMismatch, kTruncated };

class FeatureFormatError : public std::runtime_error {
 public:
  FeatureFormatError(FeatureFormatErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  FeatureFormatErrorKind kind() const { return kind_; }

 private:
  FeatureFormatErrorKind kind_;
};

std::vector<std::uint8_t> EncodeFeatures(const FeatureSequence& seq);
FeatureSequence DecodeFeatures(std::span<const std::uint8_t> bytes, std::string source_id = {});
void SaveFeatures(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence LoadFeatures(const std::filesystem::path& path);

// Generator of feature sequences with planted repetitions of a class motif.
struct SyntheticSpec {
  std::uint32_t count_min = 2;
  std::uint32_t count_max = 10;
  std::uint32_t duration_min_frames = 48;
  std::uint32_t duration_max_frames = 112;
  double pause_probability = 0.3;
  std::uint32_t pause_min_frames = 16;
  std::uint32_t pause_max_frames = 48;
  // Leading and trailing idle spans are drawn from [0, edge_max_frames].
  std::uint32_t edge_max_frames = 48;
  // Per-repetition warp strength in [0, 1); 0 gives linear phase.
  double warp_max = 0.4;
  std::uint32_t motif_dim = 3;
  double noise_sigma = 0.1;
  std::uint32_t channels = 64;
  TokenGrid window_grid{4, 2, 2};
  std::uint32_t frames_per_window = 64;
  std::uint32_t max_windows = 32;
  std::string class_label = "class0";
  // Seeds the class motif; videos of one class share it.
  std::uint64_t motif_seed = 1;
  // Seeds everything specific to this video.
  std::uint64_t seed = 0;
  std::string video_id = "synthetic";

  // Throws std::invalid_argument when the worst-case layout exceeds max_windows.
  void Validate() const;
};

std::pair<FeatureSequence, RepetitionAnnotation> SynthSequence(const SyntheticSpec& spec);

// Uniformly samples the exemplar's temporal budget (M_e / (H' W') indices) over
// the tokens covering `interval` by nearest index, and gathers every spatial
// token of each sampled index.
ExemplarLatent ExtractExemplar(const FeatureSequence& seq, FrameInterval interval, std::size_t exemplar_tokens);

}  // namespace escounts
