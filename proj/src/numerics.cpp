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

#include "shapeprior/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "shapeprior/error.hpp"
#include "shapeprior/random.hpp"

namespace shapeprior {

Vector dense_forward(const DenseLayer& layer, const Vector& input, Activation activation) {
  if (input.size() != layer.in_dim()) {
    throw StructuralError("dense_forward: input has " + std::to_string(input.size()) + " entries, layer expects " +
                          std::to_string(layer.in_dim()));
  }
  if (layer.biases.size() != layer.out_dim()) throw StructuralError("dense_forward: bias length mismatch");
  Vector out = layer.weights * input + layer.biases;
  if (activation == Activation::rectifier) out = out.cwiseMax(0.0);
  return out;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - m).exp().matrix();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

DenseLayer glorot_layer(Eigen::Index in_dim, Eigen::Index out_dim, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer{Matrix(out_dim, in_dim), Vector::Zero(out_dim)};
  // Row-major fill so the stream order does not depend on Eigen's storage.
  for (Eigen::Index r = 0; r < out_dim; ++r)
    for (Eigen::Index c = 0; c < in_dim; ++c) layer.weights(r, c) = dist(rng);
  return layer;
}

void adam_step(std::span<const ParamBlock> blocks, AdamState& state, double learning_rate) {
  if (state.step_count == 0 && state.first_moment.empty()) {
    for (const auto& b : blocks) {
      state.first_moment.emplace_back(b.values.size(), 0.0);
      state.second_moment.emplace_back(b.values.size(), 0.0);
    }
  }
  if (state.first_moment.size() != blocks.size()) {
    throw StructuralError("adam_step: optimizer state has " + std::to_string(state.first_moment.size()) +
                          " blocks, got " + std::to_string(blocks.size()));
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (blk.values.size() != blk.gradient.size() || blk.values.size() != state.first_moment[b].size()) {
      throw StructuralError("adam_step: shape mismatch in block '" + blk.name + "'");
    }
    for (double g : blk.gradient) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in block '" + blk.name + "'");
    }
  }

  const auto& h = state.hyper;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    const auto& blk = blocks[b];
    for (std::size_t i = 0; i < blk.values.size(); ++i) {
      const double g = blk.gradient[i];
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      blk.values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

double finite_diff_check(const std::function<double(const Vector&)>& loss, const Vector& point,
                         const Vector& analytic_gradient, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("finite_diff_check: step must be positive");
  if (analytic_gradient.size() != point.size()) throw StructuralError("finite_diff_check: gradient length mismatch");
  double worst = 0.0;
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = loss(probe);
    probe[i] = point[i] - step;
    const double down = loss(probe);
    probe[i] = point[i];
    const double central = (up - down) / (2.0 * step);
    const double a = analytic_gradient[i];
    const double denom = std::max({std::abs(a), std::abs(central), 1e-12});
    worst = std::max(worst, std::abs(a - central) / denom);
  }
  return worst;
}

}  // namespace shapeprior
