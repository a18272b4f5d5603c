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

#include "shapeprior/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeprior/error.hpp"

namespace shapeprior {

const char* to_string(FormatIssue issue) {
  switch (issue) {
    case FormatIssue::missing_header: return "missing header line";
    case FormatIssue::header_not_json: return "header is not valid JSON";
    case FormatIssue::bad_magic: return "wrong magic";
    case FormatIssue::bad_dims: return "invalid dims";
    case FormatIssue::bad_spacing: return "invalid spacing";
    case FormatIssue::bad_n_class: return "invalid n_class";
    case FormatIssue::payload_length_mismatch: return "payload length mismatch";
    case FormatIssue::label_out_of_range: return "label out of range";
    case FormatIssue::bad_array_table: return "invalid array table";
    case FormatIssue::descriptor_mismatch: return "descriptor mismatch";
  }
  return "unknown format issue";
}

void validate_dims(const Dims& dims) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw StructuralError("dims must be positive, got (" + std::to_string(dims.nx) + "," +
                          std::to_string(dims.ny) + "," + std::to_string(dims.nz) + ")");
  }
}

void validate_spacing(const Spacing& spacing) {
  for (double s : {spacing.sx, spacing.sy, spacing.sz}) {
    if (!std::isfinite(s) || s <= 0.0) throw StructuralError("spacing must be positive and finite");
  }
}

LabelVolume::LabelVolume(Dims dims, Spacing spacing, int n_class)
    : LabelVolume(dims, spacing, n_class, std::vector<std::uint8_t>(dims.voxel_count(), 0)) {}

LabelVolume::LabelVolume(Dims dims, Spacing spacing, int n_class, std::vector<std::uint8_t> labels)
    : dims_(dims), spacing_(spacing), n_class_(n_class), labels_(std::move(labels)) {
  validate_dims(dims_);
  validate_spacing(spacing_);
  if (n_class_ < 1 || n_class_ > 256) throw StructuralError("n_class must be in [1, 256]");
  if (labels_.size() != dims_.voxel_count()) {
    throw StructuralError("label buffer has " + std::to_string(labels_.size()) + " entries, expected " +
                          std::to_string(dims_.voxel_count()));
  }
  const auto bad = std::find_if(labels_.begin(), labels_.end(), [&](std::uint8_t l) { return l >= n_class_; });
  if (bad != labels_.end()) {
    throw StructuralError("label " + std::to_string(*bad) + " at voxel " + std::to_string(bad - labels_.begin()) +
                          " is >= n_class " + std::to_string(n_class_));
  }
}

VoxelIndex LabelVolume::voxel(std::size_t flat) const {
  const std::size_t slice = dims_.slice_size();
  const int k = static_cast<int>(flat / slice);
  const std::size_t rem = flat % slice;
  return {static_cast<int>(rem % dims_.nx), static_cast<int>(rem / dims_.nx), k};
}

void LabelVolume::set(int i, int j, int k, int label) {
  if (!contains(i, j, k)) throw StructuralError("voxel index out of range");
  if (label < 0 || label >= n_class_) throw StructuralError("label out of range for this volume");
  labels_[index(i, j, k)] = static_cast<std::uint8_t>(label);
}

LabelSlice LabelVolume::axial_slice(int k) const {
  if (k < 0 || k >= dims_.nz) {
    throw StructuralError("axial index " + std::to_string(k) + " outside [0, " + std::to_string(dims_.nz) + ")");
  }
  LabelSlice s{dims_.nx, dims_.ny, {}};
  const auto begin = labels_.begin() + static_cast<std::ptrdiff_t>(index(0, 0, k));
  s.labels.assign(begin, begin + static_cast<std::ptrdiff_t>(dims_.slice_size()));
  return s;
}

std::size_t LabelVolume::count(int class_id) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(class_id)));
}

std::size_t LabelVolume::slice_count(int k, int class_id) const {
  const auto begin = labels_.begin() + static_cast<std::ptrdiff_t>(index(0, 0, k));
  return static_cast<std::size_t>(
      std::count(begin, begin + static_cast<std::ptrdiff_t>(dims_.slice_size()), static_cast<std::uint8_t>(class_id)));
}

bool LabelVolume::has_foreground() const {
  return std::any_of(labels_.begin(), labels_.end(), [](std::uint8_t l) { return l != 0; });
}

}  // namespace shapeprior
