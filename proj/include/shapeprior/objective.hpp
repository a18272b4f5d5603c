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
#include <span>
#include <vector>

#include "shapeprior/losses.hpp"
#include "shapeprior/network.hpp"

namespace shapeprior {

struct ObjectiveResult {
  LossBreakdown loss;
  std::vector<DenseLayer> layer_grads;  // empty for GradientScope::latent_only
  Vector latent_grad;
};

// Full per-shape objective L(f(coords, z), labels) + lambda |z|^2 and its
// exact gradient. Point sets larger than `chunk` are processed in two passes
// (logits first, then re-forward and backward per chunk) so memory stays
// bounded; chunk gradients are summed in ascending column order.
ObjectiveResult evaluate_objective(const Mlp& net, const Matrix& coords, std::span<const std::uint8_t> labels,
                                   const Vector& latent, const LossConfig& config, GradientScope scope,
                                   Eigen::Index chunk = 16384);

// Objective value only.
LossBreakdown objective_value(const Mlp& net, const Matrix& coords, std::span<const std::uint8_t> labels,
                              const Vector& latent, const LossConfig& config, Eigen::Index chunk = 16384);

}  // namespace shapeprior
