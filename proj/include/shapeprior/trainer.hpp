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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shapeprior/losses.hpp"
#include "shapeprior/model.hpp"
#include "shapeprior/volume.hpp"

namespace shapeprior {

struct TrainConfig {
  int epochs = 2500;
  double lr_network = 1e-4;
  double lr_latent = 1e-3;
  int voxel_batch_per_shape = 8192;
  int slice_stride = 1;  // only axial indices k with k % slice_stride == 0 are sampled
  std::uint64_t seed = 0;
  bool deterministic = true;
  bool class_balanced_sampling = true;
  LossConfig loss;
  // Architecture. latent_dim 0 means 128 * n_class.
  int hidden_width = 256;
  int latent_dim = 0;
  int n_layers = 8;
  int skip_layer = 4;
};

void validate(const TrainConfig& config);
ArchitectureDescriptor architecture_for(const TrainConfig& config, int n_class);

struct EpochRecord {
  int epoch = 0;
  double objective = 0.0;  // means over shapes
  double dice = 0.0;
  double cross_entropy = 0.0;
  double latent_norm_mean = 0.0;
  double latent_norm_max = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// A batch of training voxels in ascending flat-index order (duplicates
// allowed, sampling is with replacement).
struct VoxelBatch {
  std::vector<std::size_t> voxels;
  std::vector<std::uint8_t> labels;
};

// Per-volume index of eligible voxels by class; built once, sampled per epoch.
class VoxelSampler {
 public:
  VoxelSampler(const LabelVolume& volume, int slice_stride);

  // Class-balanced: the budget is split evenly over the classes present
  // among eligible voxels, the remainder going one voxel each to the lowest
  // present class ids. Otherwise uniform over all eligible voxels. Seeded by
  // (seed, epoch, shape_id).
  VoxelBatch sample(int budget, bool class_balanced, std::uint64_t seed, int epoch, std::string_view shape_id) const;

 private:
  const LabelVolume* volume_;
  std::vector<std::size_t> eligible_;
  std::vector<std::vector<std::size_t>> by_class_;
};

VoxelBatch sample_voxels(const LabelVolume& volume, int budget, const TrainConfig& config, int epoch,
                         std::string_view shape_id);

struct TrainingResult {
  ModelParams params;
  LatentTable latents;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Joint optimization of the network and one latent per shape: every epoch,
// every shape in order gets one Adam step on the network (lr_network) and on
// its own latent (lr_latent, separate optimizer state).
TrainingResult train(std::span<const LabelVolume> dataset, std::span<const std::string> shape_ids,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

// Default ids subject_000, subject_001, ...
std::vector<std::string> default_shape_ids(std::size_t n);

// Network weights and biases as Adam parameter blocks.
std::vector<ParamBlock> network_blocks(Mlp& net, const std::vector<DenseLayer>& grads);

}  // namespace shapeprior
