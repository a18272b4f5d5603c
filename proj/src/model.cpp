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

#include "shapeprior/model.hpp"

#include <algorithm>
#include <cstring>

#include "shapeprior/error.hpp"
#include "shapeprior/random.hpp"

namespace shapeprior {

namespace {
constexpr Eigen::Index kPredictChunk = 16384;
}

ArchitectureDescriptor ArchitectureDescriptor::for_classes(int n_class, int hidden_width) {
  ArchitectureDescriptor a;
  a.n_class = n_class;
  a.latent_dim = 128 * n_class;
  a.hidden_width = hidden_width;
  return a;
}

void validate(const ArchitectureDescriptor& a) {
  if (a.n_class < 1 || a.n_class > 256) throw StructuralError("n_class must be in [1, 256]");
  if (a.latent_dim < 1) throw StructuralError("latent_dim must be positive");
  if (a.hidden_width < 1) throw StructuralError("hidden_width must be positive");
  if (a.n_layers < 2) throw StructuralError("n_layers must be at least 2");
  if (a.skip_layer < 1 || a.skip_layer >= a.n_layers) throw StructuralError("skip_layer must be in [1, n_layers)");
}

void LatentTable::add(LatentCode code) {
  if (!codes_.empty() && code.values.size() != codes_.front().values.size()) {
    throw StructuralError("latent table: all codes must have the same length");
  }
  for (const auto& c : codes_) {
    if (c.shape_id == code.shape_id) throw StructuralError("latent table: duplicate shape id '" + code.shape_id + "'");
  }
  codes_.push_back(std::move(code));
}

const LatentCode& LatentTable::at(const std::string& shape_id) const {
  for (const auto& c : codes_)
    if (c.shape_id == shape_id) return c;
  throw StructuralError("latent table: unknown shape id '" + shape_id + "'");
}

LatentCode& LatentTable::at(const std::string& shape_id) {
  return const_cast<LatentCode&>(std::as_const(*this).at(shape_id));
}

ModelParams init_model(const ArchitectureDescriptor& arch, std::uint64_t seed) {
  validate(arch);
  ModelParams p;
  p.arch = arch;
  p.network.skip_input_layer = arch.skip_layer;
  p.network.coord_dim = 3;
  for (int l = 0; l < arch.n_layers; ++l) {
    Eigen::Index in = arch.hidden_width;
    if (l == 0) in = 3 + arch.latent_dim;
    if (l == arch.skip_layer) in = arch.hidden_width + 3;
    const Eigen::Index out = (l == arch.n_layers - 1) ? arch.n_class : arch.hidden_width;
    p.network.layers.push_back(glorot_layer(in, out, stream_seed(seed, 0x6c61796572ULL, l)));
  }
  validate_mlp(p.network);
  return p;
}

LatentCode init_latent(const std::string& shape_id, std::uint64_t seed, int latent_dim) {
  if (latent_dim < 1) throw StructuralError("latent_dim must be positive");
  Rng rng(stream_seed(seed, 0x6c6174656e74ULL, hash_string(shape_id)));
  std::normal_distribution<double> dist(0.0, 0.1);
  LatentCode code{shape_id, Vector(latent_dim)};
  for (int i = 0; i < latent_dim; ++i) code.values[i] = dist(rng);
  return code;
}

NormalizedCoord normalize_coord(VoxelIndex v, Dims dims) {
  validate_dims(dims);
  if (v.i < 0 || v.j < 0 || v.k < 0 || v.i >= dims.nx || v.j >= dims.ny || v.k >= dims.nz) {
    throw StructuralError("normalize_coord: voxel index outside the grid");
  }
  auto axis = [](int i, int n) { return n == 1 ? 0.0 : 2.0 * i / (n - 1) - 1.0; };
  return {axis(v.i, dims.nx), axis(v.j, dims.ny), axis(v.k, dims.nz)};
}

Matrix coord_matrix(std::span<const std::size_t> flat_indices, Dims dims) {
  Matrix c(3, static_cast<Eigen::Index>(flat_indices.size()));
  const std::size_t slice = dims.slice_size();
  for (std::size_t n = 0; n < flat_indices.size(); ++n) {
    const std::size_t f = flat_indices[n];
    const std::size_t rem = f % slice;
    const auto nc = normalize_coord(
        {static_cast<int>(rem % dims.nx), static_cast<int>(rem / dims.nx), static_cast<int>(f / slice)}, dims);
    c(0, static_cast<Eigen::Index>(n)) = nc.x;
    c(1, static_cast<Eigen::Index>(n)) = nc.y;
    c(2, static_cast<Eigen::Index>(n)) = nc.z;
  }
  return c;
}

Vector predict_voxel(const ModelParams& params, NormalizedCoord coord, const Vector& latent) {
  if (latent.size() != params.arch.latent_dim) throw StructuralError("predict_voxel: latent length mismatch");
  Matrix c(3, 1);
  c << coord.x, coord.y, coord.z;
  return softmax(mlp_logits(params.network, c, latent).col(0));
}

Matrix predict_probabilities(const ModelParams& params, const Vector& latent, Dims dims) {
  validate_dims(dims);
  if (latent.size() != params.arch.latent_dim) throw StructuralError("predict: latent length mismatch");
  const auto total = static_cast<Eigen::Index>(dims.voxel_count());
  Matrix probs(params.arch.n_class, total);
  std::vector<std::size_t> idx;
  for (Eigen::Index begin = 0; begin < total; begin += kPredictChunk) {
    const Eigen::Index n = std::min(kPredictChunk, total - begin);
    idx.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) idx[static_cast<std::size_t>(t)] = static_cast<std::size_t>(begin + t);
    probs.middleCols(begin, n) = softmax_columns(mlp_logits(params.network, coord_matrix(idx, dims), latent));
  }
  return probs;
}

LabelVolume argmax_volume(const Matrix& probabilities, Dims dims, Spacing spacing) {
  if (probabilities.cols() != static_cast<Eigen::Index>(dims.voxel_count())) {
    throw StructuralError("argmax_volume: probability grid does not match dims");
  }
  std::vector<std::uint8_t> labels(dims.voxel_count());
  for (Eigen::Index v = 0; v < probabilities.cols(); ++v) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probabilities.rows(); ++c) {
      if (probabilities(c, v) > probabilities(best, v)) best = c;
    }
    labels[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(best);
  }
  return LabelVolume(dims, spacing, static_cast<int>(probabilities.rows()), std::move(labels));
}

LabelVolume predict_volume(const ModelParams& params, const Vector& latent, Dims dims, Spacing spacing) {
  return argmax_volume(predict_probabilities(params, latent, dims), dims, spacing);
}

std::uint64_t parameter_checksum(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t b = 0; b < static_cast<std::size_t>(n) * sizeof(double); ++b) {
      h ^= bytes[b];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : params.network.layers) {
    feed(l.weights.data(), l.weights.size());
    feed(l.biases.data(), l.biases.size());
  }
  return h;
}

}  // namespace shapeprior
