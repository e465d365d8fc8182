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

#include "escounts/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace escounts {
namespace {

const std::vector<std::string> kSizeLabels = {"XS", "S", "M", "L", "XL"};

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json MetricsJson(const MetricReport& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["obo"] = m.obo;
  j["obz"] = m.obz;
  return j;
}

}  // namespace

std::int64_t RoundCount(double raw) { return static_cast<std::int64_t>(std::floor(raw + 0.5)); }

MetricReport ComputeMetrics(std::span<const CountPair> pairs) {
  if (pairs.empty()) throw MetricsError("metrics: no predictions");
  MetricReport r;
  r.n = pairs.size();
  double sq = 0;
  for (const auto& p : pairs) {
    if (!(p.truth >= 0)) throw MetricsError("metrics: negative ground-truth count");
    if (!std::isfinite(p.pred)) throw MetricsError("metrics: non-finite prediction");
    const double err = std::abs(p.truth - p.pred);
    r.mae += err / std::max(p.truth, 1.0);
    sq += err * err;
    if (err <= 1.0) r.obo += 1;
    if (static_cast<double>(RoundCount(p.pred)) == p.truth) r.obz += 1;
  }
  const auto n = static_cast<double>(pairs.size());
  r.mae /= n;
  r.rmse = std::sqrt(sq / n);
  r.obo /= n;
  r.obz /= n;
  return r;
}

std::vector<double> OffByN(std::span<const CountPair> pairs, std::uint32_t n_max) {
  const auto base = ComputeMetrics(pairs);
  std::vector<double> curve(n_max + 1, 0.0);
  curve[0] = base.obz;
  for (std::uint32_t k = 1; k <= n_max; ++k) {
    std::size_t hit = 0;
    for (const auto& p : pairs) hit += std::abs(p.truth - p.pred) <= static_cast<double>(k);
    curve[k] = static_cast<double>(hit) / static_cast<double>(pairs.size());
  }
  return curve;
}

void GroupSpec::Validate() const {
  if (labels.empty()) throw MetricsError("group spec: no bins");
  if (edges.size() != labels.size() + 1) throw MetricsError("group spec: need one more edge than labels");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) throw MetricsError("group spec: edges must be strictly ascending");
  }
}

GroupSpec GroupSpec::RepetitionDuration() {
  return {kSizeLabels, {0.0, 0.96, 1.53, 2.29, 3.09, std::numeric_limits<double>::infinity()}};
}

GroupSpec GroupSpec::VideoDuration() { return {kSizeLabels, {8.0, 11.0, 26.0, 33.9, 45.9, 68.0}}; }

std::vector<GroupRow> GroupedReport(std::span<const GroupedItem> items, const GroupSpec& spec) {
  spec.Validate();
  const std::size_t bins = spec.labels.size();
  std::vector<std::vector<CountPair>> members(bins);
  for (const auto& it : items) {
    std::size_t b = bins;
    for (std::size_t i = 0; i < bins; ++i) {
      const bool last = i + 1 == bins;
      if (it.key >= spec.edges[i] && (it.key < spec.edges[i + 1] || (last && it.key == spec.edges[i + 1]))) {
        b = i;
        break;
      }
    }
    if (b == bins) throw MetricsError("grouped report: key " + std::to_string(it.key) + " outside every bin");
    members[b].push_back(it.pair);
  }
  std::vector<GroupRow> rows;
  for (std::size_t i = 0; i < bins; ++i) {
    GroupRow row{spec.labels[i], spec.edges[i], spec.edges[i + 1], {}};
    if (!members[i].empty()) row.metrics = ComputeMetrics(members[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GroupRow> EqualPopulationReport(std::span<const GroupedItem> items, std::size_t bins) {
  if (bins == 0) throw MetricsError("grouped report: zero bins");
  if (items.size() < bins) throw MetricsError("grouped report: fewer items than bins");
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return items[a].key < items[b].key; });
  std::vector<GroupRow> rows;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t first = b * items.size() / bins, last = (b + 1) * items.size() / bins;
    std::vector<CountPair> members;
    for (std::size_t i = first; i < last; ++i) members.push_back(items[order[i]].pair);
    GroupRow row;
    row.label = bins == kSizeLabels.size() ? kSizeLabels[b] : "G" + std::to_string(b + 1);
    row.lo = items[order[first]].key;
    row.hi = items[order[last - 1]].key;
    row.metrics = ComputeMetrics(members);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ReportToText(const FullReport& report) {
  std::ostringstream os;
  const auto& m = report.overall;
  os << "videos " << m.n << "\n";
  os << "MAE  " << Fixed(m.mae, 4) << "\nRMSE " << Fixed(m.rmse, 4) << "\nOBO  " << Fixed(m.obo, 4) << "\nOBZ  "
     << Fixed(m.obz, 4) << "\n";
  if (!report.obn.empty()) {
    os << "\noff-by-N\n";
    for (std::size_t k = 0; k < report.obn.size(); ++k) os << "  N=" << k << "  " << Fixed(report.obn[k], 4) << "\n";
  }
  for (const auto& [name, rows] : report.groups) {
    os << "\n" << name << "\n  bin  range              n     MAE     RMSE    OBO     OBZ\n";
    for (const auto& r : rows) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-4s [%7.2f, %7.2f]  %4zu  %6.4f  %6.4f  %6.4f  %6.4f\n", r.label.c_str(), r.lo,
                    r.hi, r.metrics.n, r.metrics.mae, r.metrics.rmse, r.metrics.obo, r.metrics.obz);
      os << line;
    }
  }
  return os.str();
}

std::string ReportToJson(const FullReport& report) {
  nlohmann::ordered_json j;
  j["overall"] = MetricsJson(report.overall);
  j["obn"] = report.obn;
  auto groups = nlohmann::ordered_json::object();
  for (const auto& [name, rows] : report.groups) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["label"] = r.label;
      row["lo"] = r.lo;
      // JSON has no infinity
      row["hi"] = std::isfinite(r.hi) ? nlohmann::ordered_json(r.hi) : nlohmann::ordered_json(nullptr);
      row["metrics"] = MetricsJson(r.metrics);
      arr.push_back(std::move(row));
    }
    groups[name] = std::move(arr);
  }
  j["groups"] = std::move(groups);
  return j.dump(2);
}

std::string ScatterSvg(std::span<const CountPair> pairs, const std::string& title) {
  constexpr double kSize = 400, kPad = 40;
  double top = 1;
  for (const auto& p : pairs) top = std::max({top, p.truth, p.pred});
  top = std::ceil(top);
  auto x = [&](double v) { return kPad + v / top * (kSize - 2 * kPad); };
  auto y = [&](double v) { return kSize - kPad - v / top * (kSize - 2 * kPad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string escaped;
  for (char c : title) {
    if (c == '<') escaped += "&lt;";
    else if (c == '>') escaped += "&gt;";
    else if (c == '&') escaped += "&amp;";
    else escaped += c;
  }
  os << "<text x=\"" << kSize / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escaped << "</text>\n";
  os << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(top) << "\" y2=\"" << y(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(0) << "\" y2=\"" << y(top)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(top) << "\" y2=\"" << y(top)
     << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  os << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 8 << "\" text-anchor=\"middle\" font-size=\"12\">ground truth"
     << "</text>\n";
  os << "<text x=\"12\" y=\"" << kSize / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << kSize / 2
     << ")\" text-anchor=\"middle\">predicted</text>\n";
  os << "<text x=\"" << x(top) << "\" y=\"" << y(0) + 14 << "\" font-size=\"10\" text-anchor=\"end\">" << top
     << "</text>\n";
  for (const auto& p : pairs) {
    os << "<circle cx=\"" << Fixed(x(p.truth), 2) << "\" cy=\"" << Fixed(y(p.pred), 2)
       << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace escounts
