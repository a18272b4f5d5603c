// ----------------------------------------------------------------------------
// Copyright 2026 The shapeprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#include "shapeprior/report.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "shapeprior/error.hpp"
#include "shapeprior/io.hpp"

namespace shapeprior {

namespace {

constexpr const char* kMetrics[] = {"dsc", "asd_mm", "hd_max_mm", "vol_err_pct"};

const MetricSummary& pick(const AggregateRow& a, const std::string& metric) {
  if (metric == "dsc") return a.dsc;
  if (metric == "asd_mm") return a.asd_mm;
  if (metric == "hd_max_mm") return a.hd_max_mm;
  if (metric == "vol_err_pct") return a.vol_err_pct;
  throw UsageError("unknown metric '" + metric + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string summary_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "strategy,n_slices,class_id";
  for (const char* m : kMetrics) os << ',' << m << "_n," << m << "_mean," << m << "_std";
  os << '\n';
  for (const auto& a : report.aggregate()) {
    os << a.strategy << ',' << a.n_slices << ',' << a.class_id;
    for (const char* m : kMetrics) {
      const auto& s = pick(a, m);
      os << ',' << s.count << ',' << (s.count ? fmt(s.mean) : "NA") << ',' << (s.count ? fmt(s.std) : "NA");
    }
    os << '\n';
  }
  return os.str();
}

std::string metric_table_csv(const MetricsReport& report, const std::string& metric) {
  const auto aggregates = report.aggregate();
  std::set<std::string> strategies;
  std::map<std::pair<int, int>, std::map<std::string, MetricSummary>> cells;
  for (const auto& a : aggregates) {
    strategies.insert(a.strategy);
    cells[{a.n_slices, a.class_id}][a.strategy] = pick(a, metric);
  }
  std::ostringstream os;
  os << "n_slices,class_id";
  for (const auto& s : strategies) os << ',' << s << "_mean," << s << "_std";
  os << '\n';
  for (const auto& [key, row] : cells) {
    os << key.first << ',' << key.second;
    for (const auto& s : strategies) {
      const auto it = row.find(s);
      if (it == row.end() || it->second.count == 0) {
        os << ",,";
      } else {
        os << ',' << fmt(it->second.mean) << ',' << fmt(it->second.std);
      }
    }
    os << '\n';
  }
  return os.str();
}

void write_report_tables(const MetricsReport& report, const std::filesystem::path& dir) {
  write_text_file(dir / "summary.csv", summary_csv(report));
  for (const char* m : kMetrics) write_text_file(dir / (std::string(m) + ".csv"), metric_table_csv(report, m));
}

}  // namespace shapeprior
