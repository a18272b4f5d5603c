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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shapeprior {

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t slice_size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Physical voxel size in millimetres.
struct Spacing {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  double voxel_volume() const { return sx * sy * sz; }
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

// One axial (constant k) plane of a label volume, x-fastest.
struct LabelSlice {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int i, int j) const { return labels[static_cast<std::size_t>(j) * nx + i]; }
};

// Dense multi-class occupancy grid. Labels are stored x-fastest, then y, then
// z (axial). Every label is < n_class.
class LabelVolume {
 public:
  LabelVolume() = default;
  LabelVolume(Dims dims, Spacing spacing, int n_class);
  LabelVolume(Dims dims, Spacing spacing, int n_class, std::vector<std::uint8_t> labels);

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  int n_class() const { return n_class_; }
  std::span<const std::uint8_t> labels() const { return labels_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims_.ny + static_cast<std::size_t>(j)) * dims_.nx + static_cast<std::size_t>(i);
  }
  VoxelIndex voxel(std::size_t flat) const;
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_.nx && j < dims_.ny && k < dims_.nz;
  }

  std::uint8_t at(int i, int j, int k) const { return labels_[index(i, j, k)]; }
  std::uint8_t operator[](std::size_t flat) const { return labels_[flat]; }
  void set(int i, int j, int k, int label);

  LabelSlice axial_slice(int k) const;
  std::size_t count(int class_id) const;
  // Number of voxels with this class on axial slice k.
  std::size_t slice_count(int k, int class_id) const;
  bool has_foreground() const;

  friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
  int n_class_ = 0;
  std::vector<std::uint8_t> labels_;
};

void validate_dims(const Dims& dims);
void validate_spacing(const Spacing& spacing);

}  // namespace shapeprior
