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

#include "escounts/localisation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace escounts {

PeakSet DetectPeaks(std::span<const float> density, double theta) {
  if (density.empty()) throw LocalisationError("peaks: empty density map");
  if (!(theta >= 0 && theta <= 1)) throw LocalisationError("peaks: theta must lie in [0, 1]");
  const auto [lo_it, hi_it] = std::minmax_element(density.begin(), density.end());
  const double lo = *lo_it, hi = *hi_it;
  PeakSet out;
  out.theta = theta;
  out.threshold = theta * (hi - lo);
  const std::size_t n = density.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && density[j + 1] == density[i]) ++j;
    const bool has_neighbor = i > 0 || j + 1 < n;
    const bool left = i == 0 || density[i - 1] < density[i];
    const bool right = j + 1 == n || density[j + 1] < density[i];
    if (has_neighbor && left && right && density[i] - lo >= out.threshold) out.indices.push_back(i);
    i = j + 1;
  }
  return out;
}

double Jaccard(std::span<const std::size_t> peaks, std::span<const TokenInterval> intervals) {
  std::size_t tp = 0, fp = 0;
  for (const auto& iv : intervals) {
    if (iv.first > iv.last) throw LocalisationError("jaccard: interval end before start");
    tp += std::any_of(peaks.begin(), peaks.end(), [&](std::size_t p) { return p >= iv.first && p <= iv.last; });
  }
  for (std::size_t p : peaks) {
    fp += std::none_of(intervals.begin(), intervals.end(),
                       [&](const TokenInterval& iv) { return p >= iv.first && p <= iv.last; });
  }
  const std::size_t fn = intervals.size() - tp;
  const std::size_t total = tp + fp + fn;
  if (total == 0) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(total);
}

std::vector<double> DefaultThetaGrid() {
  std::vector<double> g;
  for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
  return g;
}

LocalisationReport MakeLocalisationReport(const std::map<std::string, DensityMap>& predictions,
                                          std::span<const RepetitionAnnotation> annotations,
                                          std::span<const double> thetas) {
  if (thetas.empty()) throw LocalisationError("localisation: empty threshold grid");
  LocalisationReport report;
  report.videos = annotations.size();
  std::vector<std::vector<TokenInterval>> truth;
  std::vector<const DensityMap*> maps;
  for (const auto& ann : annotations) {
    const auto it = predictions.find(ann.video_id);
    if (it == predictions.end()) throw LocalisationError("localisation: no prediction for " + ann.video_id);
    const auto& d = it->second;
    const double fpt = d.frames_per_token;
    const auto raw = static_cast<std::int64_t>(std::llround(fpt * static_cast<double>(d.size())));
    truth.push_back(ToTokenIntervals(ResolvePseudoLabels(ann, raw), fpt, d.size()));
    maps.push_back(&d);
  }
  for (double theta : thetas) {
    LocalisationRow row{theta, 0.0};
    for (std::size_t v = 0; v < maps.size(); ++v) {
      const auto peaks = DetectPeaks(maps[v]->values, theta);
      row.mean_jaccard += Jaccard(peaks.indices, truth[v]);
    }
    if (!maps.empty()) row.mean_jaccard /= static_cast<double>(maps.size());
    report.average += row.mean_jaccard;
    report.rows.push_back(row);
  }
  report.average /= static_cast<double>(report.rows.size());
  return report;
}

std::string LocalisationToText(const LocalisationReport& report) {
  std::ostringstream os;
  os << "videos " << report.videos << "\n  theta  jaccard\n";
  char line[64];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "  %5.2f  %7.4f\n", r.theta, r.mean_jaccard);
    os << line;
  }
  std::snprintf(line, sizeof line, "  avg    %7.4f\n", report.average);
  os << line;
  return os.str();
}

std::string LocalisationToJson(const LocalisationReport& report) {
  nlohmann::ordered_json j;
  j["videos"] = report.videos;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) rows.push_back({{"theta", r.theta}, {"jaccard", r.mean_jaccard}});
  j["rows"] = std::move(rows);
  j["average"] = report.average;
  return j.dump(2);
}

}  // namespace escounts
