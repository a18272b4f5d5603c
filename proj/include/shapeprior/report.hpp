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

#pragma once

#include <filesystem>
#include <string>

#include "shapeprior/metrics.hpp"

namespace shapeprior {

// Mean and sample std per (strategy, n_slices, class_id); class_id 0 pools
// all foreground classes. Columns <metric>_n, <metric>_mean, <metric>_std.
std::string summary_csv(const MetricsReport& report);

// Plot-ready table for one metric ("dsc", "asd_mm", "hd_max_mm",
// "vol_err_pct"): rows (n_slices, class_id), columns <strategy>_mean and
// <strategy>_std; empty cells where a strategy has no entry.
std::string metric_table_csv(const MetricsReport& report, const std::string& metric);

// Writes summary.csv and <metric>.csv for every metric into dir.
void write_report_tables(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace shapeprior
