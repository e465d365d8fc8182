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

#include <cmath>
#include <numbers>
#include <random>

#include "escounts/features.hpp"

namespace escounts {
namespace {

// Class-level motif: a closed curve phi -> R^C built from `dim` harmonics,
// modulated per spatial position.
struct Motif {
  std::vector<float> basis;  // [2 * dim, C]
  std::vector<double> amplitude;
  std::vector<double> phase;
  std::vector<double> spatial_gain;
  std::size_t dim = 0;
  std::size_t channels = 0;

  Motif(const SyntheticSpec& spec) : dim(spec.motif_dim), channels(spec.channels) {
    std::mt19937_64 rng(spec.motif_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    basis.resize(2 * dim * channels);
    for (auto& b : basis) b = static_cast<float>(normal(rng));
    for (std::size_t k = 0; k < dim; ++k) {
      amplitude.push_back((0.6 + 0.4 * unit(rng)) / std::sqrt(static_cast<double>(dim)));
      phase.push_back(2.0 * std::numbers::pi * unit(rng));
    }
    for (std::size_t s = 0; s < spec.window_grid.spatial(); ++s) spatial_gain.push_back(0.6 + 0.8 * unit(rng));
  }

  // Writes the motif at phase phi for spatial position s into out[0..C).
  void Evaluate(double phi, std::size_t s, float* out) const {
    const double envelope = std::sin(std::numbers::pi * phi) * spatial_gain[s];
    for (std::size_t j = 0; j < channels; ++j) out[j] = 0.0f;
    for (std::size_t k = 0; k < dim; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k + 1) * phi + phase[k];
      const double a = envelope * amplitude[k] * std::cos(angle);
      const double b = envelope * amplitude[k] * std::sin(angle);
      const float* ba = basis.data() + (2 * k) * channels;
      const float* bb = basis.data() + (2 * k + 1) * channels;
      for (std::size_t j = 0; j < channels; ++j) out[j] += static_cast<float>(a * ba[j] + b * bb[j]);
    }
  }
};

}  // namespace

void SyntheticSpec::Validate() const {
  if (count_min > count_max) throw std::invalid_argument("synth: count_min > count_max");
  if (window_grid.tokens() == 0 || channels == 0) throw std::invalid_argument("synth: empty grid");
  if (frames_per_window == 0 || frames_per_window % window_grid.t != 0) {
    throw std::invalid_argument("synth: frames_per_window must be a multiple of the window's T'");
  }
  const std::uint32_t frames_per_token = frames_per_window / window_grid.t;
  if (duration_min_frames < frames_per_token || duration_min_frames > duration_max_frames) {
    throw std::invalid_argument("synth: repetition durations must span at least one token");
  }
  if (pause_min_frames > pause_max_frames) throw std::invalid_argument("synth: pause_min > pause_max");
  if (pause_probability < 0 || pause_probability > 1) throw std::invalid_argument("synth: bad pause probability");
  if (warp_max < 0 || warp_max >= 1) throw std::invalid_argument("synth: warp_max must be in [0, 1)");
  if (noise_sigma < 0) throw std::invalid_argument("synth: negative noise");
  if (motif_dim == 0) throw std::invalid_argument("synth: motif_dim must be >= 1");
  std::uint64_t worst = 2ull * edge_max_frames + std::uint64_t{count_max} * duration_max_frames;
  if (pause_probability > 0 && count_max > 1) worst += std::uint64_t{count_max - 1} * pause_max_frames;
  if (worst > std::uint64_t{max_windows} * frames_per_window) {
    throw std::invalid_argument("synth: infeasible spec, worst-case length " + std::to_string(worst) +
                                " frames exceeds " + std::to_string(max_windows) + " windows");
  }
}

std::pair<FeatureSequence, RepetitionAnnotation> SynthSequence(const SyntheticSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  auto uniform_int = [&rng](std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RepetitionAnnotation ann;
  ann.video_id = spec.video_id;
  ann.class_label = spec.class_label;
  ann.count = uniform_int(spec.count_min, spec.count_max);

  std::vector<double> warps;
  std::int64_t cursor = uniform_int(0, spec.edge_max_frames);
  for (std::uint32_t i = 0; i < ann.count; ++i) {
    if (i > 0 && unit(rng) < spec.pause_probability) cursor += uniform_int(spec.pause_min_frames, spec.pause_max_frames);
    const std::int64_t duration = uniform_int(spec.duration_min_frames, spec.duration_max_frames);
    ann.repetitions.push_back({cursor, cursor + duration});
    warps.push_back(spec.warp_max * (2.0 * unit(rng) - 1.0));
    cursor += duration;
  }
  cursor += uniform_int(0, spec.edge_max_frames);
  const std::uint32_t windows =
      std::max<std::uint32_t>(1, static_cast<std::uint32_t>((cursor + spec.frames_per_window - 1) / spec.frames_per_window));

  FeatureSequence seq;
  seq.source_id = spec.video_id;
  seq.frames_per_window = spec.frames_per_window;
  seq.raw_frames = windows * spec.frames_per_window;
  seq.grid = {windows * spec.window_grid.t, spec.window_grid.h, spec.window_grid.w};
  const std::size_t c = spec.channels;
  const std::size_t spatial = seq.grid.spatial();
  seq.tokens = Tensor({seq.grid.tokens(), c});

  const Motif motif(spec);
  const double frames_per_token = seq.frames_per_token();
  std::size_t rep = 0;
  for (std::size_t t = 0; t < seq.grid.t; ++t) {
    const double frame = (static_cast<double>(t) + 0.5) * frames_per_token;
    while (rep < ann.repetitions.size() && frame >= static_cast<double>(ann.repetitions[rep].end)) ++rep;
    const bool active = rep < ann.repetitions.size() && frame >= static_cast<double>(ann.repetitions[rep].start);
    for (std::size_t s = 0; s < spatial; ++s) {
      float* row = seq.tokens.storage().data() + (t * spatial + s) * c;
      if (!active) continue;
      const auto& r = ann.repetitions[rep];
      const double tau = (frame - static_cast<double>(r.start)) / static_cast<double>(r.length());
      const double phi = tau + warps[rep] * std::sin(2.0 * std::numbers::pi * tau) / (2.0 * std::numbers::pi);
      motif.Evaluate(phi, s, row);
    }
  }
  if (spec.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (float& v : seq.tokens.storage()) v += static_cast<float>(noise(rng));
  }
  return {std::move(seq), std::move(ann)};
}

}  // namespace escounts
