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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace escounts {

void RepetitionAnnotation::Validate() const {
  if (!repetitions.empty() && repetitions.size() != count) {
    throw AnnotationError(video_id + ": count " + std::to_string(count) + " disagrees with " +
                          std::to_string(repetitions.size()) + " intervals");
  }
  for (std::size_t i = 0; i < repetitions.size(); ++i) {
    const auto& r = repetitions[i];
    if (r.start >= r.end) throw AnnotationError(video_id + ": empty repetition interval");
    if (i > 0 && r.start < repetitions[i - 1].start) {
      throw AnnotationError(video_id + ": repetition intervals are not sorted");
    }
  }
}

RepetitionAnnotation MakePseudoLabels(std::uint32_t count, std::int64_t raw_frames) {
  RepetitionAnnotation ann;
  ann.count = count;
  ann.is_pseudo = true;
  if (count == 0) return ann;
  if (raw_frames < static_cast<std::int64_t>(count)) {
    throw AnnotationError("pseudo-labels need at least one frame per repetition");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::int64_t s = raw_frames * i / count;
    const std::int64_t e = raw_frames * (i + 1) / count;
    ann.repetitions.push_back({s, e});
  }
  return ann;
}

RepetitionAnnotation ResolvePseudoLabels(RepetitionAnnotation ann, std::int64_t raw_frames) {
  if (ann.count == 0 || !ann.repetitions.empty()) return ann;
  auto pseudo = MakePseudoLabels(ann.count, raw_frames);
  ann.repetitions = std::move(pseudo.repetitions);
  ann.is_pseudo = true;
  return ann;
}

std::size_t DownsampleAlignment(std::int64_t raw_frame, double frames_per_token, std::size_t tokens) {
  if (tokens == 0 || frames_per_token <= 0) throw AnnotationError("downsample: empty token grid");
  const auto raw_frames = static_cast<std::int64_t>(std::llround(frames_per_token * static_cast<double>(tokens)));
  if (raw_frame < 0 || raw_frame >= raw_frames) {
    throw AnnotationError("downsample: frame " + std::to_string(raw_frame) + " outside [0, " +
                          std::to_string(raw_frames) + ")");
  }
  const auto t = static_cast<std::size_t>(std::floor(static_cast<double>(raw_frame) / frames_per_token));
  return std::min(t, tokens - 1);
}

double DensityMap::Sum() const {
  double s = 0;
  for (float v : values) s += v;
  return s;
}

std::vector<double> DensityFromCenters(const std::vector<double>& centers, const std::vector<double>& sigmas,
                                       std::size_t tokens) {
  if (centers.size() != sigmas.size()) throw AnnotationError("density: one width per center required");
  if (tokens == 0) throw AnnotationError("density: T' must be >= 1");
  std::vector<double> d(tokens, 0.0);
  std::vector<double> kernel(tokens);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double mu = centers[i];
    const double sigma = sigmas[i];
    if (!(mu >= -0.5 && mu < static_cast<double>(tokens) - 0.5)) {
      throw AnnotationError("density: repetition center outside the token range");
    }
    if (sigma < 0) throw AnnotationError("density: negative sigma");
    if (sigma == 0) {
      // ties round up
      const auto t = static_cast<std::size_t>(std::floor(mu + 0.5));
      d[std::min(t, tokens - 1)] += 1.0;
      continue;
    }
    // log-domain so narrow kernels do not underflow to an all-zero vector
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tokens; ++t) {
      const double z = (static_cast<double>(t) - mu) / sigma;
      kernel[t] = -0.5 * z * z;
      max_log = std::max(max_log, kernel[t]);
    }
    double total = 0;
    for (std::size_t t = 0; t < tokens; ++t) {
      kernel[t] = std::exp(kernel[t] - max_log);
      total += kernel[t];
    }
    for (std::size_t t = 0; t < tokens; ++t) d[t] += kernel[t] / total;
  }
  return d;
}

DensityMap MakeDensityMap(const RepetitionAnnotation& ann, std::size_t tokens, double frames_per_token,
                          const DensityConfig& config) {
  if (frames_per_token <= 0) throw AnnotationError("density: frames_per_token must be positive");
  if (config.sigma < 0 || config.variable_ratio < 0) throw AnnotationError("density: negative sigma");
  std::vector<double> centers, sigmas;
  for (const auto& r : ann.repetitions) {
    const double center_tokens = r.center() / frames_per_token;
    if (center_tokens < 0 || center_tokens >= static_cast<double>(tokens)) {
      throw AnnotationError(ann.video_id + ": repetition center outside [0, T')");
    }
    // token t covers frames [t f, (t + 1) f) and is centered at (t + 0.5) f
    centers.push_back(center_tokens - 0.5);
    sigmas.push_back(config.variable ? config.variable_ratio * static_cast<double>(r.length()) / frames_per_token
                                     : config.sigma);
  }
  const auto d = DensityFromCenters(centers, sigmas, tokens);
  DensityMap map;
  map.frames_per_token = frames_per_token;
  map.values.assign(d.begin(), d.end());
  return map;
}

std::vector<TokenInterval> ToTokenIntervals(const RepetitionAnnotation& ann, double frames_per_token,
                                            std::size_t tokens) {
  const auto raw_frames = static_cast<std::int64_t>(std::llround(frames_per_token * static_cast<double>(tokens)));
  std::vector<TokenInterval> out;
  out.reserve(ann.repetitions.size());
  for (const auto& r : ann.repetitions) {
    const auto s = std::clamp<std::int64_t>(r.start, 0, raw_frames - 1);
    const auto e = std::clamp<std::int64_t>(std::max(r.end - 1, r.start), 0, raw_frames - 1);
    out.push_back({DownsampleAlignment(s, frames_per_token, tokens), DownsampleAlignment(e, frames_per_token, tokens)});
  }
  return out;
}

std::string SidecarToJson(const RepetitionAnnotation& ann) {
  nlohmann::ordered_json j;
  j["video_id"] = ann.video_id;
  j["class_label"] = ann.class_label;
  j["fps"] = ann.fps;
  j["count"] = ann.count;
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : ann.repetitions) reps.push_back({r.start, r.end});
  j["repetitions"] = std::move(reps);
  return j.dump(2);
}

RepetitionAnnotation SidecarFromJson(const std::string& text) {
  RepetitionAnnotation ann;
  try {
    const auto j = nlohmann::json::parse(text);
    ann.video_id = j.at("video_id").get<std::string>();
    ann.class_label = j.value("class_label", std::string{});
    ann.fps = j.value("fps", 30.0);
    const auto count = j.at("count").get<std::int64_t>();
    if (count < 0) throw AnnotationError("negative count");
    ann.count = static_cast<std::uint32_t>(count);
    for (const auto& r : j.value("repetitions", nlohmann::json::array())) {
      if (!r.is_array() || r.size() != 2) throw AnnotationError("repetition must be [start, end]");
      ann.repetitions.push_back({r[0].get<std::int64_t>(), r[1].get<std::int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw AnnotationError(std::string("malformed sidecar: ") + e.what());
  }
  ann.Validate();
  return ann;
}

void SaveSidecar(const RepetitionAnnotation& ann, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << SidecarToJson(ann) << '\n';
}

RepetitionAnnotation LoadSidecar(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return SidecarFromJson(ss.str());
}

}  // namespace escounts
