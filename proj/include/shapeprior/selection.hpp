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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shapeprior/inference.hpp"
#include "shapeprior/model.hpp"
#include "shapeprior/plan.hpp"
#include "shapeprior/volume.hpp"

namespace shapeprior {

struct SelectionOptions {
  int threads = 1;
  std::function<void(const std::string&)> log;
};

// ---------------------------------------------------------------------------
// Equidistant baseline

// Centered bins over the full axial extent: floor((2j + 1) nz / (2k)).
SlicePlan equidistant_plan(int k, int nz);

// ---------------------------------------------------------------------------
// UC1: error-map driven selection for aligned multi-organ populations

// Mean per-voxel misclassification rate over a set of subjects.
struct ErrorMap {
  Dims dims;
  std::vector<double> values;

  double at(int i, int j, int k) const {
    return values[(static_cast<std::size_t>(k) * dims.ny + j) * dims.nx + i];
  }
  // Mean of the map over each axial slice.
  std::vector<double> slice_scores() const;
};

// Middle axial index of each foreground class, averaged over subjects and
// rounded half-down; ascending class order, duplicates collapsed.
SlicePlan uc1_minimal_plan(std::span<const LabelVolume> train_set);

ErrorMap error_map_from_predictions(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts);

// Infers every subject from the plan's oracle annotations and averages the
// misclassification indicators.
ErrorMap build_error_map(const ModelParams& params, std::span<const LabelVolume> train_set, const SlicePlan& plan,
                         const InferConfig& config, const SelectionOptions& options = {});

// Unselected axial slice with the highest mean error (ties: lowest index).
SliceSpecifier uc1_select_next(const ErrorMap& map, const SlicePlan& existing);

using ErrorMapProvider = std::function<ErrorMap(const SlicePlan&)>;

// Appends uc1_select_next picks until the plan holds max_slices specifiers.
SlicePlan uc1_extend_plan(SlicePlan plan, int max_slices, const ErrorMapProvider& provider);

SlicePlan uc1_build_plan(const ModelParams& params, std::span<const LabelVolume> train_set, int max_slices,
                         const InferConfig& config, const SelectionOptions& options = {});

// ---------------------------------------------------------------------------
// UC2: length-normalized, zone-based selection for elongated shapes

inline constexpr int kCurvePoints = 101;

// Values at integer percent positions 0..100 of the object length.
struct ErrorCurve {
  std::array<double, kCurvePoints> values{};
};

struct Uc2Curves {
  ErrorCurve hausdorff;  // subject-averaged, min-max normalized
  ErrorCurve volume;     // subject-averaged, min-max normalized
  ErrorCurve combined;   // (hausdorff + volume) / 2
};

Uc2Curves uc2_metric_curves(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts, int class_id = 1);
ErrorCurve uc2_error_curve(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts, int class_id = 1);

// Min-max normalization; a constant curve maps to all zeros.
ErrorCurve min_max_normalize(const ErrorCurve& curve);

enum class Zone { distal, proximal };  // zone 1 = [0, 100/3), zone 3 = (200/3, 100]

inline constexpr int kMinSliceGap = 5;

struct Uc2Pick {
  SliceSpecifier specifier;
  Zone zone = Zone::distal;    // zone the pick came from
  std::vector<PlanEvent> events;
};

// Highest-scoring percent of the active zone whose resolved index is at
// least kMinSliceGap slices from every selected slice in every volume
// (`spans` are the volumes' foreground spans). Falls back to the other zone,
// then to the largest feasible gap.
Uc2Pick uc2_select_next(const ErrorCurve& curve, const SlicePlan& existing,
                        std::span<const std::pair<int, int>> spans, Zone active);

using ErrorCurveProvider = std::function<ErrorCurve(const SlicePlan&)>;

// Starts from {0%, 100%, 50%} (when `plan` is empty) and alternates zones,
// distal first, until max_slices.
SlicePlan uc2_extend_plan(SlicePlan plan, std::span<const std::pair<int, int>> spans, int max_slices,
                          const ErrorCurveProvider& provider);

SlicePlan uc2_minimal_plan();

SlicePlan uc2_build_plan(const ModelParams& params, std::span<const LabelVolume> adaptation_set, int max_slices,
                         const InferConfig& config, const SelectionOptions& options = {});

// Infers every subject from its oracle annotations of the plan.
std::vector<LabelVolume> infer_all(const ModelParams& params, std::span<const LabelVolume> subjects,
                                   const SlicePlan& plan, const InferConfig& config, int threads);

}  // namespace shapeprior
