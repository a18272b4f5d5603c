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

#include "shapeprior/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "shapeprior/error.hpp"
#include "shapeprior/objective.hpp"
#include "shapeprior/random.hpp"

namespace shapeprior {

namespace {
constexpr double kDivergenceLimit = 1e6;
}

void validate(const TrainConfig& c) {
  if (c.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (!(c.lr_network > 0.0) || !std::isfinite(c.lr_network)) throw ConfigError("train.lr_network must be > 0");
  if (!(c.lr_latent > 0.0) || !std::isfinite(c.lr_latent)) throw ConfigError("train.lr_latent must be > 0");
  if (c.voxel_batch_per_shape < 1) throw ConfigError("train.voxel_batch_per_shape must be >= 1");
  if (c.slice_stride < 1) throw ConfigError("train.slice_stride must be >= 1");
  if (c.hidden_width < 1) throw ConfigError("train.hidden_width must be >= 1");
  if (c.latent_dim < 0) throw ConfigError("train.latent_dim must be >= 0");
  if (c.n_layers < 2) throw ConfigError("train.n_layers must be >= 2");
  if (c.skip_layer < 1 || c.skip_layer >= c.n_layers) throw ConfigError("train.skip_layer must be in [1, n_layers)");
  validate(c.loss);
}

ArchitectureDescriptor architecture_for(const TrainConfig& c, int n_class) {
  ArchitectureDescriptor a = ArchitectureDescriptor::for_classes(n_class, c.hidden_width);
  if (c.latent_dim > 0) a.latent_dim = c.latent_dim;
  a.n_layers = c.n_layers;
  a.skip_layer = c.skip_layer;
  validate(a);
  return a;
}

VoxelSampler::VoxelSampler(const LabelVolume& volume, int slice_stride) : volume_(&volume) {
  if (volume.labels().empty()) throw StructuralError("sample_voxels: empty volume");
  if (slice_stride < 1) throw StructuralError("sample_voxels: slice_stride must be >= 1");
  by_class_.resize(static_cast<std::size_t>(volume.n_class()));
  const auto& d = volume.dims();
  for (int k = 0; k < d.nz; k += slice_stride) {
    const std::size_t base = volume.index(0, 0, k);
    for (std::size_t t = 0; t < d.slice_size(); ++t) {
      eligible_.push_back(base + t);
      by_class_[volume[base + t]].push_back(base + t);
    }
  }
}

VoxelBatch VoxelSampler::sample(int budget, bool class_balanced, std::uint64_t seed, int epoch,
                                std::string_view shape_id) const {
  if (budget < 1) throw StructuralError("sample_voxels: budget must be positive");
  if (class_balanced && budget < volume_->n_class()) {
    throw StructuralError("sample_voxels: class-balanced budget must be >= n_class");
  }
  Rng rng(stream_seed(seed, 0x73616d706c65ULL, static_cast<std::uint64_t>(epoch), hash_string(shape_id)));
  VoxelBatch batch;
  batch.voxels.reserve(static_cast<std::size_t>(budget));

  auto draw = [&](const std::vector<std::size_t>& pool, int n) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int t = 0; t < n; ++t) batch.voxels.push_back(pool[pick(rng)]);
  };

  if (class_balanced) {
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < by_class_.size(); ++c)
      if (!by_class_[c].empty()) present.push_back(c);
    const int share = budget / static_cast<int>(present.size());
    int remainder = budget % static_cast<int>(present.size());
    for (std::size_t c : present) {
      const int n = share + (remainder > 0 ? 1 : 0);
      if (remainder > 0) --remainder;
      draw(by_class_[c], n);
    }
  } else {
    draw(eligible_, budget);
  }

  std::sort(batch.voxels.begin(), batch.voxels.end());
  batch.labels.reserve(batch.voxels.size());
  for (std::size_t v : batch.voxels) batch.labels.push_back((*volume_)[v]);
  return batch;
}

VoxelBatch sample_voxels(const LabelVolume& volume, int budget, const TrainConfig& config, int epoch,
                         std::string_view shape_id) {
  return VoxelSampler(volume, config.slice_stride)
      .sample(budget, config.class_balanced_sampling, config.seed, epoch, shape_id);
}

std::vector<std::string> default_shape_ids(std::size_t n) {
  std::vector<std::string> ids;
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "subject_%03zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

std::vector<ParamBlock> network_blocks(Mlp& net, const std::vector<DenseLayer>& grads) {
  std::vector<ParamBlock> blocks;
  blocks.reserve(net.layers.size() * 2);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& w = net.layers[l].weights;
    auto& b = net.layers[l].biases;
    blocks.push_back({"layer" + std::to_string(l) + ".weights", {w.data(), static_cast<std::size_t>(w.size())},
                      {grads[l].weights.data(), static_cast<std::size_t>(grads[l].weights.size())}});
    blocks.push_back({"layer" + std::to_string(l) + ".biases", {b.data(), static_cast<std::size_t>(b.size())},
                      {grads[l].biases.data(), static_cast<std::size_t>(grads[l].biases.size())}});
  }
  return blocks;
}

TrainingResult train(std::span<const LabelVolume> dataset, std::span<const std::string> shape_ids,
                     const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config);
  if (dataset.empty()) throw StructuralError("train: dataset is empty");
  if (shape_ids.size() != dataset.size()) throw StructuralError("train: one shape id per volume required");
  const int n_class = dataset.front().n_class();
  for (const auto& v : dataset) {
    if (v.n_class() != n_class) throw StructuralError("train: all volumes must share n_class");
  }

  TrainingResult result;
  result.params = init_model(architecture_for(config, n_class), stream_seed(config.seed, 0x6d6f64656cULL));
  for (const auto& id : shape_ids) result.latents.add(init_latent(id, config.seed, result.params.arch.latent_dim));

  std::vector<VoxelSampler> samplers;
  samplers.reserve(dataset.size());
  for (const auto& v : dataset) samplers.emplace_back(v, config.slice_stride);

  AdamState network_state;
  std::vector<AdamState> latent_states(dataset.size());
  const double n_shapes = static_cast<double>(dataset.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t s = 0; s < dataset.size(); ++s) {
      const auto& id = shape_ids[s];
      const VoxelBatch batch =
          samplers[s].sample(config.voxel_batch_per_shape, config.class_balanced_sampling, config.seed, epoch, id);
      const Matrix coords = coord_matrix(batch.voxels, dataset[s].dims());
      LatentCode& z = result.latents.codes()[s];

      ObjectiveResult obj = evaluate_objective(result.params.network, coords, batch.labels, z.values, config.loss,
                                               GradientScope::parameters_and_latent);
      if (!std::isfinite(obj.loss.total)) {
        throw NumericError("train: non-finite objective at epoch " + std::to_string(epoch) + ", shape '" + id + "'");
      }
      if (obj.loss.total > kDivergenceLimit) {
        throw NumericError("train: objective diverged (> 1e6) at epoch " + std::to_string(epoch) + ", shape '" + id +
                           "'");
      }

      const auto blocks = network_blocks(result.params.network, obj.layer_grads);
      adam_step(blocks, network_state, config.lr_network);
      const ParamBlock latent_block{"latent[" + id + "]",
                                    {z.values.data(), static_cast<std::size_t>(z.values.size())},
                                    {obj.latent_grad.data(), static_cast<std::size_t>(obj.latent_grad.size())}};
      adam_step({&latent_block, 1}, latent_states[s], config.lr_latent);

      rec.objective += obj.loss.total / n_shapes;
      rec.dice += obj.loss.dice / n_shapes;
      rec.cross_entropy += obj.loss.cross_entropy / n_shapes;
    }
    for (const auto& z : result.latents.codes()) {
      const double n = z.values.norm();
      rec.latent_norm_mean += n / n_shapes;
      rec.latent_norm_max = std::max(rec.latent_norm_max, n);
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace shapeprior
