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

#include <vector>

#include "shapeprior/numerics.hpp"

namespace shapeprior {

// Coordinate-conditioned MLP with one coordinate skip connection.
//
// Layer 0 consumes concat(coords, latent). Layer `skip_input_layer` consumes
// concat(previous hidden output, coords). Hidden layers are rectified, the
// last layer emits raw logits. Batches are column-major: one voxel per column.
struct Mlp {
  std::vector<DenseLayer> layers;
  int skip_input_layer = 4;  // 0-based index of the layer that re-reads coords
  int coord_dim = 3;

  Eigen::Index latent_dim() const { return layers.empty() ? 0 : layers.front().in_dim() - coord_dim; }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

// Record of one batched forward pass; required by mlp_backward.
struct ForwardTape {
  std::vector<Eigen::Index> signature;  // layer shapes of the producing network
  Matrix coords;                        // coord_dim x batch
  Vector latent;
  std::vector<Matrix> hidden;           // rectified outputs of layers 0..L-2
  Matrix logits;                        // classes x batch

  bool empty() const { return signature.empty(); }
  Eigen::Index batch() const { return coords.cols(); }
};

enum class GradientScope {
  latent_only,         // d/dz only (inference)
  parameters_and_latent,
};

struct MlpGradients {
  std::vector<DenseLayer> layers;  // empty when scope is latent_only
  Vector latent;
  Matrix coords;                   // d/dcoords, coord_dim x batch
};

// Structural check of layer shapes against the skip topology.
void validate_mlp(const Mlp& net);

ForwardTape mlp_forward(const Mlp& net, const Matrix& coords, const Vector& latent);

// Forward without keeping activations; returns logits.
Matrix mlp_logits(const Mlp& net, const Matrix& coords, const Vector& latent);

// Reverse pass of the scalar loss whose gradient w.r.t. the logits is
// `upstream` (classes x batch). Throws UsageError if the tape was not produced
// by a network of this shape or its batch size differs.
MlpGradients mlp_backward(const Mlp& net, const ForwardTape& tape, const Matrix& upstream, GradientScope scope);

// Zero-filled gradient container with the network's shapes.
std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers);
void accumulate(std::vector<DenseLayer>& into, const std::vector<DenseLayer>& from);

}  // namespace shapeprior
