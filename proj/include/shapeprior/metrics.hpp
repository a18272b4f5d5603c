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

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeprior/volume.hpp"

namespace shapeprior {

// 2|P & G| / (|P| + |G|); 1 when both are empty.
double dsc(const LabelVolume& pred, const LabelVolume& gt, int class_id);

// Voxels of the class with at least one of the 6 face neighbours outside the
// class (the volume border counts as outside).
std::vector<VoxelIndex> boundary_voxels(const LabelVolume& mask, int class_id);
// Same set as physical voxel-center positions in mm.
std::vector<std::array<double, 3>> boundary_points(const LabelVolume& mask, int class_id, Spacing spacing);

// Symmetric average surface distance in mm; nullopt when either boundary is
// empty.
std::optional<double> asd(const LabelVolume& pred, const LabelVolume& gt, int class_id, Spacing spacing);

// max(sup_p d(p, dG), sup_g d(g, dP)) in mm, exact; nullopt when either
// boundary is empty.
std::optional<double> hausdorff_max(const LabelVolume& pred, const LabelVolume& gt, int class_id, Spacing spacing);

// 2D analogue on an axial slice with 4-neighbour boundaries; spacing is (sx, sy).
std::optional<double> hausdorff_2d(const LabelSlice& pred, const LabelSlice& gt, int class_id, double sx, double sy);

// 100 |V_pred - V_gt| / V_gt; nullopt when the class is absent from gt.
std::optional<double> volumetric_error_pct(const LabelVolume& pred, const LabelVolume& gt, int class_id,
                                           Spacing spacing);

struct MetricsRow {
  std::string subject_id;
  std::string strategy;
  int n_slices = 0;
  int class_id = 0;
  double dsc = 0.0;
  std::optional<double> asd_mm;
  std::optional<double> hd_max_mm;
  std::optional<double> vol_err_pct;
};

struct MetricSummary {
  int count = 0;  // defined entries
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single entry
};

struct AggregateRow {
  std::string strategy;
  int n_slices = 0;
  int class_id = 0;  // 0 denotes "all foreground classes"
  MetricSummary dsc, asd_mm, hd_max_mm, vol_err_pct;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<AggregateRow> aggregate() const;
};

struct EvaluationMeta {
  std::vector<std::string> subject_ids;
  std::string strategy;
  int n_slices = 0;
};

// All metrics for every foreground class of every subject (row count =
// subjects x (n_class - 1)). Uses the ground truth's spacing.
MetricsReport evaluate(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts,
                       const EvaluationMeta& meta, int threads = 1);

MetricSummary summarize(std::span<const double> values);

inline constexpr const char* kReportHeader = "subject_id,strategy,n_slices,class_id,dsc,asd_mm,hd_max_mm,vol_err_pct";

void write_report_csv(std::ostream& os, const MetricsReport& report, bool header = true);
MetricsReport read_report_csv(std::istream& is);

}  // namespace shapeprior
