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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "escounts/annotations.hpp"

namespace escounts {

class LocalisationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PeakSet {
  std::vector<std::size_t> indices;  // ascending
  double threshold = 0;              // r = theta (max - min)
  double theta = 0;
};

// Strict local maxima (a plateau counts once, at its leftmost bin; edge bins
// compare against their single neighbor) with d[t] - min(d) >= theta (max - min).
PeakSet DetectPeaks(std::span<const float> density, double theta);

// TP = intervals holding at least one peak, FP = peaks outside every interval,
// FN = intervals without a peak; TP / (TP + FP + FN), or 1 when both sides are empty.
// Intervals are closed.
double Jaccard(std::span<const std::size_t> peaks, std::span<const TokenInterval> intervals);

std::vector<double> DefaultThetaGrid();  // 0.1, 0.2, ..., 0.9

struct LocalisationRow {
  double theta = 0;
  double mean_jaccard = 0;
};

struct LocalisationReport {
  std::vector<LocalisationRow> rows;
  double average = 0;  // unweighted over rows
  std::size_t videos = 0;
};

// Annotations with empty intervals get pseudo-labels. Throws when a video has
// no prediction.
LocalisationReport MakeLocalisationReport(const std::map<std::string, DensityMap>& predictions,
                                          std::span<const RepetitionAnnotation> annotations,
                                          std::span<const double> thetas);

std::string LocalisationToText(const LocalisationReport& report);
std::string LocalisationToJson(const LocalisationReport& report);

}  // namespace escounts
