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

#include "shapeprior/plan.hpp"

#include <algorithm>
#include <cmath>

#include "shapeprior/error.hpp"

namespace shapeprior {

SliceSpecifier SliceSpecifier::absolute(int index) {
  SliceSpecifier s{Kind::absolute, static_cast<double>(index)};
  validate(s);
  return s;
}

SliceSpecifier SliceSpecifier::percent(double p) {
  SliceSpecifier s{Kind::percent, p};
  validate(s);
  return s;
}

void validate(const SliceSpecifier& s) {
  if (!std::isfinite(s.value)) throw StructuralError("slice specifier value must be finite");
  if (s.kind == SliceSpecifier::Kind::percent) {
    if (s.value < 0.0 || s.value > 100.0) throw StructuralError("percent specifier must be in [0, 100]");
  } else {
    if (s.value < 0.0 || s.value != std::floor(s.value)) {
      throw StructuralError("absolute specifier must be a non-negative integer");
    }
  }
}

bool SlicePlan::contains(const SliceSpecifier& s) const {
  return std::find(slices.begin(), slices.end(), s) != slices.end();
}

bool SlicePlan::append(const SliceSpecifier& s) {
  validate(s);
  if (contains(s)) return false;
  slices.push_back(s);
  return true;
}

SlicePlan SlicePlan::prefix(std::size_t k) const {
  SlicePlan p = *this;
  if (k < p.slices.size()) p.slices.resize(k);
  return p;
}

std::pair<int, int> normalize_length(const LabelVolume& volume) {
  int first = -1;
  int last = -1;
  for (int k = 0; k < volume.dims().nz; ++k) {
    if (volume.slice_count(k, 0) < volume.dims().slice_size()) {
      if (first < 0) first = k;
      last = k;
    }
  }
  if (first < 0) throw StructuralError("normalize_length: volume has no foreground");
  return {first, last};
}

int percent_to_index(double percent, std::pair<int, int> span) {
  return static_cast<int>(std::lround(span.first + percent / 100.0 * (span.second - span.first)));
}

std::vector<int> resolve_plan(const SlicePlan& plan, int nz, std::pair<int, int> span) {
  std::vector<int> out;
  out.reserve(plan.slices.size());
  for (const auto& s : plan.slices) {
    validate(s);
    int idx = 0;
    if (s.kind == SliceSpecifier::Kind::absolute) {
      idx = static_cast<int>(s.value);
    } else {
      if (span.first < 0) throw StructuralError("resolve_plan: percent specifier needs a foreground span");
      idx = percent_to_index(s.value, span);
    }
    if (idx < 0 || idx >= nz) {
      throw StructuralError("resolve_plan: slice " + std::to_string(idx) + " outside [0, " + std::to_string(nz) + ")");
    }
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> resolve_plan(const SlicePlan& plan, const LabelVolume& volume) {
  const bool needs_span = std::any_of(plan.slices.begin(), plan.slices.end(), [](const SliceSpecifier& s) {
    return s.kind == SliceSpecifier::Kind::percent;
  });
  const std::pair<int, int> span = needs_span ? normalize_length(volume) : std::pair<int, int>{-1, -1};
  return resolve_plan(plan, volume.dims().nz, span);
}

}  // namespace shapeprior
