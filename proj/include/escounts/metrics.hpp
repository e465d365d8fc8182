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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace escounts {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CountPair {
  double truth = 0;  // c
  double pred = 0;   // raw predicted count
};

// Nearest integer, ties up.
std::int64_t RoundCount(double raw);

struct MetricReport {
  std::size_t n = 0;
  double mae = 0;   // mean |c - pred| / max(c, 1)
  double rmse = 0;  // sqrt mean (c - pred)^2
  double obo = 0;   // fraction |c - pred| <= 1 on the raw prediction
  double obz = 0;   // fraction round(pred) == c
};

MetricReport ComputeMetrics(std::span<const CountPair> pairs);

// Entry n is the fraction within +-n. Entry 0 is OBZ (rounded), n >= 1 uses
// the raw prediction so entry 1 equals OBO.
std::vector<double> OffByN(std::span<const CountPair> pairs, std::uint32_t n_max);

struct GroupSpec {
  std::vector<std::string> labels;
  // labels.size() + 1 ascending edges; bin i is [edges[i], edges[i+1]), the
  // last bin is closed. Infinity is allowed as the last edge.
  std::vector<double> edges;

  void Validate() const;
  // Mean repetition duration in seconds: XS..XL.
  static GroupSpec RepetitionDuration();
  // Video duration in seconds: XS..XL over [8, 68].
  static GroupSpec VideoDuration();
};

struct GroupedItem {
  CountPair pair;
  double key = 0;  // grouping value: count, duration, ...
};

struct GroupRow {
  std::string label;
  double lo = 0, hi = 0;
  MetricReport metrics;  // n == 0 and zeros for an empty bin
};

// Throws MetricsError for an item outside every bin.
std::vector<GroupRow> GroupedReport(std::span<const GroupedItem> items, const GroupSpec& spec);

// Equal-population variant: bin b holds items [b n / bins, (b + 1) n / bins) of
// the key-sorted order (stable), so every bin differs in size by at most one.
std::vector<GroupRow> EqualPopulationReport(std::span<const GroupedItem> items, std::size_t bins);

struct FullReport {
  MetricReport overall;
  std::vector<double> obn;
  std::vector<std::pair<std::string, std::vector<GroupRow>>> groups;
};

std::string ReportToText(const FullReport& report);
std::string ReportToJson(const FullReport& report);

// Ground truth vs prediction scatter with the identity line.
std::string ScatterSvg(std::span<const CountPair> pairs, const std::string& title);

}  // namespace escounts
