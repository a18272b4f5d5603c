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

#include "shapeprior/losses.hpp"

#include <cmath>
#include <string>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace {

void check_batch(const Matrix& probs, std::size_t n_labels) {
  if (probs.cols() == 0) throw StructuralError("loss: empty batch");
  if (static_cast<std::size_t>(probs.cols()) != n_labels) {
    throw StructuralError("loss: " + std::to_string(probs.cols()) + " predictions but " + std::to_string(n_labels) +
                          " labels");
  }
}

void check_labels(std::span<const std::uint8_t> labels, Eigen::Index n_class) {
  for (auto l : labels) {
    if (l >= n_class) {
      throw StructuralError("loss: label " + std::to_string(l) + " >= n_class " + std::to_string(n_class));
    }
  }
}

}  // namespace

void validate(const LossConfig& c) {
  if (!std::isfinite(c.lambda) || c.lambda < 0.0) throw ConfigError("loss.lambda must be finite and >= 0");
  if (!std::isfinite(c.dice_epsilon) || c.dice_epsilon <= 0.0) throw ConfigError("loss.dice_epsilon must be > 0");
  if (!std::isfinite(c.dice_weight) || c.dice_weight < 0.0) throw ConfigError("loss.dice_weight must be >= 0");
  if (!std::isfinite(c.ce_weight) || c.ce_weight < 0.0) throw ConfigError("loss.ce_weight must be >= 0");
}

Matrix one_hot(std::span<const std::uint8_t> labels, Eigen::Index n_class) {
  check_labels(labels, n_class);
  Matrix y = Matrix::Zero(n_class, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) y(labels[j], static_cast<Eigen::Index>(j)) = 1.0;
  return y;
}

double soft_dice_loss(const Matrix& probs, const Matrix& targets, const LossConfig& config) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols()) {
    throw StructuralError("soft_dice_loss: prediction and target shapes differ");
  }
  if (probs.cols() == 0) throw StructuralError("soft_dice_loss: empty batch");
  const double eps = config.dice_epsilon;
  const Vector inter = probs.cwiseProduct(targets).rowwise().sum();
  const Vector psum = probs.rowwise().sum();
  const Vector ysum = targets.rowwise().sum();
  double mean_dice = 0.0;
  for (Eigen::Index c = 0; c < probs.rows(); ++c) {
    mean_dice += (2.0 * inter[c] + eps) / (psum[c] + ysum[c] + eps);
  }
  return 1.0 - mean_dice / static_cast<double>(probs.rows());
}

double cross_entropy_loss(const Matrix& probs, std::span<const std::uint8_t> labels) {
  check_batch(probs, labels.size());
  check_labels(labels, probs.rows());
  double sum = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) sum -= std::log(probs(labels[j], static_cast<Eigen::Index>(j)));
  return sum / static_cast<double>(labels.size());
}

double total_objective(const Matrix& probs, std::span<const std::uint8_t> labels, const Vector& latent,
                       const LossConfig& config) {
  check_batch(probs, labels.size());
  const Matrix y = one_hot(labels, probs.rows());
  return config.dice_weight * soft_dice_loss(probs, y, config) +
         config.ce_weight * cross_entropy_loss(probs, labels) + config.lambda * latent.squaredNorm();
}

LogitLoss segmentation_loss_from_logits(const Matrix& logits, std::span<const std::uint8_t> labels,
                                        const LossConfig& config) {
  check_batch(logits, labels.size());
  check_labels(labels, logits.rows());
  const Eigen::Index C = logits.rows();
  const Eigen::Index B = logits.cols();
  const double inv_b = 1.0 / static_cast<double>(B);

  // Softmax and log-sum-exp per column.
  Matrix probs(C, B);
  double ce = 0.0;
  for (Eigen::Index j = 0; j < B; ++j) {
    const double m = logits.col(j).maxCoeff();
    probs.col(j) = (logits.col(j).array() - m).exp().matrix();
    const double s = probs.col(j).sum();
    probs.col(j) /= s;
    const double lse = m + std::log(s);
    ce += lse - logits(labels[static_cast<std::size_t>(j)], j);
  }
  ce *= inv_b;

  Vector inter = Vector::Zero(C);
  Vector ysum = Vector::Zero(C);
  for (Eigen::Index j = 0; j < B; ++j) {
    const auto y = labels[static_cast<std::size_t>(j)];
    inter[y] += probs(y, j);
    ysum[y] += 1.0;
  }
  const Vector psum = probs.rowwise().sum();
  const double eps = config.dice_epsilon;

  double mean_dice = 0.0;
  Vector denom(C), numer(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    numer[c] = 2.0 * inter[c] + eps;
    denom[c] = psum[c] + ysum[c] + eps;
    mean_dice += numer[c] / denom[c];
  }
  const double dice = 1.0 - mean_dice / static_cast<double>(C);

  // d(dice loss)/dp_jc = -(1/C) * (2 y_jc D_c - N_c) / D_c^2
  Matrix g(C, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const auto y = labels[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < C; ++c) {
      const double two_y = (c == y) ? 2.0 : 0.0;
      g(c, j) = -(two_y * denom[c] - numer[c]) / (denom[c] * denom[c] * static_cast<double>(C));
    }
  }

  LogitLoss out;
  out.grad_logits.resize(C, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const double pg = probs.col(j).dot(g.col(j));
    const auto y = labels[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < C; ++c) {
      const double p = probs(c, j);
      const double dice_part = p * (g(c, j) - pg);
      const double ce_part = (p - (c == y ? 1.0 : 0.0)) * inv_b;
      out.grad_logits(c, j) = config.dice_weight * dice_part + config.ce_weight * ce_part;
    }
  }
  out.loss.dice = dice;
  out.loss.cross_entropy = ce;
  out.loss.total = config.dice_weight * dice + config.ce_weight * ce;
  return out;
}

}  // namespace shapeprior
