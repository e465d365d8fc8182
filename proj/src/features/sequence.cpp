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

#include <algorithm>
#include <cmath>

#include "escounts/features.hpp"

namespace escounts {

void FeatureSequence::Validate() const {
  if (grid.t == 0 || grid.h == 0 || grid.w == 0) throw ShapeError(source_id + ": empty token grid");
  if (tokens.rank() != 2 || tokens.dim(0) != grid.tokens()) {
    throw ShapeError(source_id + ": token matrix " + ShapeToString(tokens.shape()) + " does not match grid " +
                     std::to_string(grid.t) + "x" + std::to_string(grid.h) + "x" + std::to_string(grid.w));
  }
  if (raw_frames == 0) throw ShapeError(source_id + ": zero raw frames");
}

FeatureSequence FeatureSequence::TemporalSlice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > grid.t) throw ShapeError("temporal slice out of range");
  const std::size_t per_t = grid.spatial() * channels();
  FeatureSequence out;
  out.grid = {static_cast<std::uint32_t>(count), grid.h, grid.w};
  std::vector<float> data(tokens.storage().begin() + first * per_t,
                          tokens.storage().begin() + (first + count) * per_t);
  out.tokens = Tensor({out.grid.tokens(), channels()}, std::move(data));
  out.raw_frames = static_cast<std::uint32_t>(std::llround(frames_per_token() * static_cast<double>(count)));
  out.frames_per_window = frames_per_window;
  out.source_id = source_id;
  return out;
}

Tensor SinusoidalTable(std::size_t positions, std::size_t channels) {
  if (channels % 2 != 0) throw ShapeError("positional encoding needs an even channel count");
  Tensor table({positions, channels});
  for (std::size_t i = 0; i < channels / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(channels));
    for (std::size_t p = 0; p < positions; ++p) {
      const double angle = static_cast<double>(p) * freq;
      table[p * channels + 2 * i] = static_cast<float>(std::sin(angle));
      table[p * channels + 2 * i + 1] = static_cast<float>(std::cos(angle));
    }
  }
  return table;
}

FeatureSequence AddPositionalEncoding(const FeatureSequence& seq, PositionalEncodingMode mode) {
  seq.Validate();
  const std::size_t c = seq.channels();
  if (c % 2 != 0) throw ShapeError("positional encoding needs an even channel count");
  FeatureSequence out = seq;
  auto& data = out.tokens.storage();
  if (mode == PositionalEncodingMode::kFlattened) {
    const Tensor table = SinusoidalTable(seq.grid.tokens(), c);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += table[i];
    return out;
  }
  const Tensor tt = SinusoidalTable(seq.grid.t, c);
  const Tensor th = SinusoidalTable(seq.grid.h, c);
  const Tensor tw = SinusoidalTable(seq.grid.w, c);
  std::size_t m = 0;
  for (std::size_t t = 0; t < seq.grid.t; ++t)
    for (std::size_t h = 0; h < seq.grid.h; ++h)
      for (std::size_t w = 0; w < seq.grid.w; ++w, ++m)
        for (std::size_t j = 0; j < c; ++j) data[m * c + j] += tt[t * c + j] + th[h * c + j] + tw[w * c + j];
  return out;
}

ExemplarLatent ExtractExemplar(const FeatureSequence& seq, FrameInterval interval, std::size_t exemplar_tokens) {
  seq.Validate();
  if (interval.start >= interval.end) throw std::invalid_argument("exemplar interval is empty");
  if (interval.start < 0 || interval.end > static_cast<std::int64_t>(seq.raw_frames)) {
    throw std::invalid_argument("exemplar interval outside [0, R)");
  }
  const std::size_t spatial = seq.grid.spatial();
  if (exemplar_tokens == 0 || exemplar_tokens % spatial != 0) {
    throw ShapeError("exemplar size must be a positive multiple of H' W'");
  }
  const std::size_t slots = exemplar_tokens / spatial;
  const double fpt = seq.frames_per_token();
  const std::size_t first = DownsampleAlignment(interval.start, fpt, seq.grid.t);
  std::size_t last = static_cast<std::size_t>(std::ceil(static_cast<double>(interval.end) / fpt));
  last = std::clamp<std::size_t>(last, first + 1, seq.grid.t);
  const std::size_t span = last - first;
  const std::size_t c = seq.channels();

  ExemplarLatent ex;
  ex.tokens = Tensor({exemplar_tokens, c});
  ex.origin = ExemplarOrigin::kSameVideo;
  ex.source_interval = interval;
  ex.source_id = seq.source_id;
  for (std::size_t j = 0; j < slots; ++j) {
    const std::size_t t = first + j * span / slots;
    std::copy_n(seq.tokens.storage().data() + t * spatial * c, spatial * c,
                ex.tokens.storage().data() + j * spatial * c);
  }
  return ex;
}

}  // namespace escounts
