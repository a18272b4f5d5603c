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

#include <cstdint>
#include <vector>

#include "shapeprior/losses.hpp"
#include "shapeprior/model.hpp"
#include "shapeprior/plan.hpp"
#include "shapeprior/volume.hpp"

namespace shapeprior {

struct SliceAnnotation {
  int axial_index = 0;
  LabelSlice labels;
};

// Expert masks on a subset of axial slices of one target volume. Indices are
// distinct and ascending.
struct SliceAnnotationSet {
  Dims dims;
  Spacing spacing;
  int n_class = 0;
  std::vector<SliceAnnotation> slices;
};

void validate(const SliceAnnotationSet& set);

struct InferConfig {
  int epochs = 300;
  double lr_latent = 1e-3;
  std::uint64_t seed = 0;
  int n_latent_restarts = 1;
  LossConfig loss;  // lambda defaults to the training value
};

void validate(const InferConfig& config);

// Simulated expert: the ground-truth label grids at the plan's slices.
SliceAnnotationSet oracle_annotate(const LabelVolume& gt, const SlicePlan& plan);

struct LatentFit {
  LatentCode latent;
  double initial_objective = 0.0;  // at the random initialization
  double final_objective = 0.0;    // at the returned latent
  int restart = 0;                 // index of the winning restart
};

// Optimizes a fresh latent against every voxel of the annotated slices with
// the network frozen. With several restarts the lowest final objective wins
// (ties toward the earlier restart).
LatentFit infer_latent(const ModelParams& params, const SliceAnnotationSet& annotations, const InferConfig& config);

struct VolumePrediction {
  LabelVolume labels;
  Matrix probabilities;  // n_class x voxels, x-fastest
  LatentFit fit;
};

VolumePrediction infer_volume(const ModelParams& params, const SliceAnnotationSet& annotations,
                              const InferConfig& config);

}  // namespace shapeprior
