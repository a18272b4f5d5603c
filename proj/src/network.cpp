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

#include "shapeprior/network.hpp"

#include <string>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace {

std::vector<Eigen::Index> signature_of(const Mlp& net) {
  std::vector<Eigen::Index> sig;
  sig.reserve(net.layers.size() * 2 + 1);
  sig.push_back(net.skip_input_layer);
  for (const auto& l : net.layers) {
    sig.push_back(l.out_dim());
    sig.push_back(l.in_dim());
  }
  return sig;
}

// Layer 0 pre-activation. The latent part is identical for every column so it
// folds into an effective bias.
Matrix first_layer(const Mlp& net, const Matrix& coords, const Vector& latent) {
  const auto& l0 = net.layers.front();
  const Vector bias = l0.weights.rightCols(latent.size()) * latent + l0.biases;
  Matrix pre = l0.weights.leftCols(net.coord_dim) * coords;
  pre.colwise() += bias;
  return pre;
}

Matrix layer_pre(const Mlp& net, std::size_t l, const Matrix& h, const Matrix& coords) {
  const auto& layer = net.layers[l];
  Matrix pre;
  if (static_cast<int>(l) == net.skip_input_layer) {
    pre.noalias() = layer.weights.leftCols(h.rows()) * h;
    pre.noalias() += layer.weights.rightCols(net.coord_dim) * coords;
  } else {
    pre.noalias() = layer.weights * h;
  }
  pre.colwise() += layer.biases;
  return pre;
}

void check_inputs(const Mlp& net, const Matrix& coords, const Vector& latent) {
  if (net.layers.empty()) throw StructuralError("network has no layers");
  if (coords.rows() != net.coord_dim) throw StructuralError("coordinate block must have coord_dim rows");
  if (latent.size() != net.latent_dim()) {
    throw StructuralError("latent has length " + std::to_string(latent.size()) + ", network expects " +
                          std::to_string(net.latent_dim()));
  }
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
  return n;
}

void validate_mlp(const Mlp& net) {
  if (net.layers.size() < 2) throw StructuralError("network needs at least two layers");
  if (net.skip_input_layer < 1 || net.skip_input_layer >= static_cast<int>(net.layers.size())) {
    throw StructuralError("skip layer index out of range");
  }
  if (net.layers.front().in_dim() <= net.coord_dim) throw StructuralError("first layer must read coords and latent");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (layer.biases.size() != layer.out_dim()) {
      throw StructuralError("layer " + std::to_string(l) + ": bias length mismatch");
    }
    if (l == 0) continue;
    Eigen::Index expected_in = net.layers[l - 1].out_dim();
    if (static_cast<int>(l) == net.skip_input_layer) expected_in += net.coord_dim;
    if (layer.in_dim() != expected_in) {
      throw StructuralError("layer " + std::to_string(l) + ": expects " + std::to_string(layer.in_dim()) +
                            " inputs, topology provides " + std::to_string(expected_in));
    }
  }
}

ForwardTape mlp_forward(const Mlp& net, const Matrix& coords, const Vector& latent) {
  check_inputs(net, coords, latent);
  ForwardTape tape;
  tape.signature = signature_of(net);
  tape.coords = coords;
  tape.latent = latent;
  const std::size_t n_layers = net.layers.size();
  tape.hidden.reserve(n_layers - 1);

  Matrix pre = first_layer(net, coords, latent);
  for (std::size_t l = 1; l < n_layers; ++l) {
    tape.hidden.push_back(pre.cwiseMax(0.0));
    pre = layer_pre(net, l, tape.hidden.back(), coords);
  }
  tape.logits = std::move(pre);
  return tape;
}

Matrix mlp_logits(const Mlp& net, const Matrix& coords, const Vector& latent) {
  check_inputs(net, coords, latent);
  Matrix pre = first_layer(net, coords, latent);
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    pre = layer_pre(net, l, pre.cwiseMax(0.0), coords);
  }
  return pre;
}

MlpGradients mlp_backward(const Mlp& net, const ForwardTape& tape, const Matrix& upstream, GradientScope scope) {
  if (tape.empty()) throw UsageError("mlp_backward: no forward record");
  if (tape.signature != signature_of(net)) throw UsageError("mlp_backward: forward record belongs to another network");
  if (upstream.rows() != net.output_dim() || upstream.cols() != tape.batch()) {
    throw UsageError("mlp_backward: upstream gradient does not match the forward record");
  }

  const bool want_params = scope == GradientScope::parameters_and_latent;
  const int cd = net.coord_dim;
  MlpGradients g;
  if (want_params) g.layers.resize(net.layers.size());
  g.coords = Matrix::Zero(cd, tape.batch());

  Matrix delta = upstream;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& W = net.layers[l].weights;
    const Vector rowsum = delta.rowwise().sum();
    const bool is_skip = static_cast<int>(l) == net.skip_input_layer;

    if (want_params) {
      auto& gl = g.layers[l];
      gl.biases = rowsum;
      gl.weights.resize(W.rows(), W.cols());
      if (l == 0) {
        gl.weights.leftCols(cd).noalias() = delta * tape.coords.transpose();
        gl.weights.rightCols(tape.latent.size()).noalias() = rowsum * tape.latent.transpose();
      } else if (is_skip) {
        const Matrix& h = tape.hidden[l - 1];
        gl.weights.leftCols(h.rows()).noalias() = delta * h.transpose();
        gl.weights.rightCols(cd).noalias() = delta * tape.coords.transpose();
      } else {
        gl.weights.noalias() = delta * tape.hidden[l - 1].transpose();
      }
    }

    if (l == 0) {
      g.latent = W.rightCols(tape.latent.size()).transpose() * rowsum;
      g.coords.noalias() += W.leftCols(cd).transpose() * delta;
      break;
    }

    const Matrix& h = tape.hidden[l - 1];
    Matrix dh;
    if (is_skip) {
      g.coords.noalias() += W.rightCols(cd).transpose() * delta;
      dh.noalias() = W.leftCols(h.rows()).transpose() * delta;
    } else {
      dh.noalias() = W.transpose() * delta;
    }
    delta = (h.array() > 0.0).select(dh, 0.0);
  }
  return g;
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back({Matrix::Zero(l.out_dim(), l.in_dim()), Vector::Zero(l.out_dim())});
  return out;
}

void accumulate(std::vector<DenseLayer>& into, const std::vector<DenseLayer>& from) {
  if (into.size() != from.size()) throw StructuralError("gradient accumulation: layer count mismatch");
  for (std::size_t l = 0; l < into.size(); ++l) {
    into[l].weights += from[l].weights;
    into[l].biases += from[l].biases;
  }
}

}  // namespace shapeprior
