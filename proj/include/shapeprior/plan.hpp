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

#include <string>
#include <utility>
#include <vector>

#include "shapeprior/volume.hpp"

namespace shapeprior {

struct SliceSpecifier {
  enum class Kind { absolute, percent };
  Kind kind = Kind::absolute;
  double value = 0.0;  // slice index for absolute, [0, 100] for percent

  static SliceSpecifier absolute(int index);
  static SliceSpecifier percent(double p);
  friend bool operator==(const SliceSpecifier&, const SliceSpecifier&) = default;
};

void validate(const SliceSpecifier& spec);

// Something noteworthy that happened while building a plan (a skipped class,
// a zone fallback, a relaxed spacing constraint).
struct PlanEvent {
  std::string kind;
  std::string detail;
  friend bool operator==(const PlanEvent&, const PlanEvent&) = default;
};

// Ordered slice specifiers; order is selection order, so prefixes are plans
// with fewer slices.
struct SlicePlan {
  std::vector<SliceSpecifier> slices;
  std::string strategy;
  std::string provenance;
  std::vector<PlanEvent> events;

  std::size_t size() const { return slices.size(); }
  bool contains(const SliceSpecifier& s) const;
  // Appends unless an identical specifier is already present.
  bool append(const SliceSpecifier& s);
  SlicePlan prefix(std::size_t k) const;
};

// First and last axial indices that contain any foreground voxel.
std::pair<int, int> normalize_length(const LabelVolume& volume);

// round(first + p / 100 * (last - first)), halves rounded away from zero.
int percent_to_index(double percent, std::pair<int, int> span);

// Absolute indices of the plan on this volume, deduplicated and sorted.
std::vector<int> resolve_plan(const SlicePlan& plan, const LabelVolume& volume);
std::vector<int> resolve_plan(const SlicePlan& plan, int nz, std::pair<int, int> span);

}  // namespace shapeprior
