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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeprior/network.hpp"
#include "shapeprior/volume.hpp"

namespace shapeprior {

struct ArchitectureDescriptor {
  int n_class = 2;       // includes background
  int latent_dim = 256;  // 128 * n_class by default
  int n_layers = 8;
  int skip_layer = 4;    // coords are concatenated to this layer's output (1-based)
  int hidden_width = 256;

  static ArchitectureDescriptor for_classes(int n_class, int hidden_width = 256);
  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

void validate(const ArchitectureDescriptor& arch);

struct LatentCode {
  std::string shape_id;
  Vector values;
};

// Latent codes of the training population in training order.
class LatentTable {
 public:
  void add(LatentCode code);
  const LatentCode& at(const std::string& shape_id) const;
  LatentCode& at(const std::string& shape_id);
  std::span<const LatentCode> codes() const { return codes_; }
  std::span<LatentCode> codes() { return codes_; }
  std::size_t size() const { return codes_.size(); }

 private:
  std::vector<LatentCode> codes_;
};

struct ModelParams {
  ArchitectureDescriptor arch;
  Mlp network;
};

struct NormalizedCoord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Glorot-initialized network for the descriptor, seeded per layer.
ModelParams init_model(const ArchitectureDescriptor& arch, std::uint64_t seed);

// i.i.d. Normal(0, 0.1^2) entries; reproducible per (seed, shape_id).
LatentCode init_latent(const std::string& shape_id, std::uint64_t seed, int latent_dim);

// Voxel-center coordinate mapped to [-1, 1] per axis: 2 i / (n - 1) - 1, or 0
// when the axis has a single voxel.
NormalizedCoord normalize_coord(VoxelIndex voxel, Dims dims);

// Coordinates of the listed voxels as a 3 x n matrix.
Matrix coord_matrix(std::span<const std::size_t> flat_indices, Dims dims);

Vector predict_voxel(const ModelParams& params, NormalizedCoord coord, const Vector& latent);

// classes x voxels probabilities over the full grid, evaluated in chunks.
Matrix predict_probabilities(const ModelParams& params, const Vector& latent, Dims dims);

// Per-voxel argmax with ties resolved toward the lowest class index.
LabelVolume predict_volume(const ModelParams& params, const Vector& latent, Dims dims, Spacing spacing = {});
LabelVolume argmax_volume(const Matrix& probabilities, Dims dims, Spacing spacing);

// FNV-1a over the raw bytes of every weight and bias.
std::uint64_t parameter_checksum(const ModelParams& params);

}  // namespace shapeprior
