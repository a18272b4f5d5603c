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

#include "shapeprior/objective.hpp"

#include <algorithm>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace {

Matrix chunked_logits(const Mlp& net, const Matrix& coords, const Vector& latent, Eigen::Index chunk) {
  Matrix logits(net.output_dim(), coords.cols());
  for (Eigen::Index b = 0; b < coords.cols(); b += chunk) {
    const Eigen::Index n = std::min(chunk, coords.cols() - b);
    logits.middleCols(b, n) = mlp_logits(net, coords.middleCols(b, n), latent);
  }
  return logits;
}

void add_regularization(LossBreakdown& loss, const Vector& latent, const LossConfig& config) {
  loss.regularization = config.lambda * latent.squaredNorm();
  loss.total += loss.regularization;
}

}  // namespace

ObjectiveResult evaluate_objective(const Mlp& net, const Matrix& coords, std::span<const std::uint8_t> labels,
                                   const Vector& latent, const LossConfig& config, GradientScope scope,
                                   Eigen::Index chunk) {
  if (chunk < 1) throw UsageError("evaluate_objective: chunk must be positive");
  if (coords.cols() == 0) throw StructuralError("evaluate_objective: empty point set");

  ObjectiveResult out;
  if (coords.cols() <= chunk) {
    const ForwardTape tape = mlp_forward(net, coords, latent);
    const LogitLoss seg = segmentation_loss_from_logits(tape.logits, labels, config);
    MlpGradients g = mlp_backward(net, tape, seg.grad_logits, scope);
    out.loss = seg.loss;
    out.layer_grads = std::move(g.layers);
    out.latent_grad = std::move(g.latent);
  } else {
    const Matrix logits = chunked_logits(net, coords, latent, chunk);
    const LogitLoss seg = segmentation_loss_from_logits(logits, labels, config);
    out.loss = seg.loss;
    out.latent_grad = Vector::Zero(latent.size());
    if (scope == GradientScope::parameters_and_latent) out.layer_grads = zero_like(net.layers);
    for (Eigen::Index b = 0; b < coords.cols(); b += chunk) {
      const Eigen::Index n = std::min(chunk, coords.cols() - b);
      const ForwardTape tape = mlp_forward(net, coords.middleCols(b, n), latent);
      MlpGradients g = mlp_backward(net, tape, seg.grad_logits.middleCols(b, n), scope);
      out.latent_grad += g.latent;
      if (scope == GradientScope::parameters_and_latent) accumulate(out.layer_grads, g.layers);
    }
  }
  add_regularization(out.loss, latent, config);
  out.latent_grad += 2.0 * config.lambda * latent;
  return out;
}

LossBreakdown objective_value(const Mlp& net, const Matrix& coords, std::span<const std::uint8_t> labels,
                              const Vector& latent, const LossConfig& config, Eigen::Index chunk) {
  if (coords.cols() == 0) throw StructuralError("objective_value: empty point set");
  LossBreakdown loss =
      segmentation_loss_from_logits(chunked_logits(net, coords, latent, std::max<Eigen::Index>(chunk, 1)), labels,
                                    config)
          .loss;
  add_regularization(loss, latent, config);
  return loss;
}

}  // namespace shapeprior
