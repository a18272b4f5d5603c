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

#include "shapeprior/numerics.hpp"

namespace shapeprior {

struct LossConfig {
  double lambda = 1e-4;  // latent L2 weight
  double dice_epsilon = 1e-6;
  double dice_weight = 1.0;
  double ce_weight = 1.0;
};

void validate(const LossConfig& config);

// classes x batch one-hot matrix of the labels.
Matrix one_hot(std::span<const std::uint8_t> labels, Eigen::Index n_class);

// 1 - mean over all classes of (2 sum p y + eps) / (sum p + sum y + eps).
double soft_dice_loss(const Matrix& probs, const Matrix& targets, const LossConfig& config);

// Mean of -log p[label].
double cross_entropy_loss(const Matrix& probs, std::span<const std::uint8_t> labels);

// dice_weight * dice + ce_weight * ce + lambda * |z|^2, from probabilities.
double total_objective(const Matrix& probs, std::span<const std::uint8_t> labels, const Vector& latent,
                       const LossConfig& config);

struct LossBreakdown {
  double total = 0.0;
  double dice = 0.0;
  double cross_entropy = 0.0;
  double regularization = 0.0;
};

// Segmentation loss evaluated from logits (cross-entropy via log-sum-exp)
// together with its gradient w.r.t. the logits. The latent term is not
// included: regularization and total stay 0 / equal to the weighted sum.
struct LogitLoss {
  LossBreakdown loss;
  Matrix grad_logits;
};

LogitLoss segmentation_loss_from_logits(const Matrix& logits, std::span<const std::uint8_t> labels,
                                        const LossConfig& config);

}  // namespace shapeprior
