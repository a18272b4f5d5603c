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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shapeprior {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { rectifier, identity };

struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // out

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

// weights * input + biases, followed by the activation.
Vector dense_forward(const DenseLayer& layer, const Vector& input, Activation activation);

// Max-subtracted softmax of a single logit vector.
Vector softmax(const Vector& logits);
// Column-wise softmax of a (classes x batch) logit matrix.
Matrix softmax_columns(const Matrix& logits);

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
DenseLayer glorot_layer(Eigen::Index in_dim, Eigen::Index out_dim, std::uint64_t seed);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One named parameter block and its gradient, both flat views over the
// caller's storage.
struct ParamBlock {
  std::string name;
  std::span<double> values;
  std::span<const double> gradient;
};

// Moments are allocated lazily on the first step; they are zero until then.
struct AdamState {
  AdamHyper hyper;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step_count = 0;
};

// Bias-corrected Adam update of every block in place. Throws NumericError
// naming the block when a gradient is not finite; nothing is modified then.
void adam_step(std::span<const ParamBlock> blocks, AdamState& state, double learning_rate);

// max_i |analytic_i - central_i| / max(|analytic_i|, |central_i|, 1e-12) where
// central_i is the central difference of `loss` along coordinate i.
double finite_diff_check(const std::function<double(const Vector&)>& loss, const Vector& point,
                         const Vector& analytic_gradient, double step);

}  // namespace shapeprior
