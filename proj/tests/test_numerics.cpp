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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shapeprior/error.hpp"
#include "shapeprior/model.hpp"
#include "shapeprior/network.hpp"
#include "shapeprior/numerics.hpp"
#include "shapeprior/objective.hpp"
#include "test_support.hpp"

namespace sp = shapeprior;
using sp::Matrix;
using sp::Vector;

namespace {

sp::DenseLayer layer(Matrix w, Vector b) { return {std::move(w), std::move(b)}; }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Small net with the skip topology: 3 layers, coords re-read by layer 1.
sp::Mlp small_net(Eigen::Index latent_dim, Eigen::Index width, Eigen::Index classes, std::uint64_t seed) {
  sp::Mlp net;
  net.skip_input_layer = 1;
  net.layers.push_back(sp::glorot_layer(3 + latent_dim, width, seed));
  net.layers.push_back(sp::glorot_layer(width + 3, width, seed + 1));
  net.layers.push_back(sp::glorot_layer(width, classes, seed + 2));
  std::mt19937_64 rng(seed);
  for (auto& l : net.layers) l.biases = sp::testing::random_vector(l.out_dim(), 0.1, rng);
  return net;
}

}  // namespace

TEST(DenseForward, IdentityRectifierClampsNegatives) {
  const auto l = layer(Matrix::Identity(2, 2), Vector::Zero(2));
  const Vector out = sp::dense_forward(l, vec({1, -1}), sp::Activation::rectifier);
  EXPECT_EQ(out, vec({1, 0}));
}

TEST(DenseForward, DiagonalWithBias) {
  Matrix w(2, 2);
  w << 2, 0, 0, 3;
  const Vector out = sp::dense_forward(layer(w, vec({1, 1})), vec({1, 1}), sp::Activation::identity);
  EXPECT_EQ(out, vec({3, 4}));
}

TEST(DenseForward, ZeroInputZeroBiasGivesZero) {
  std::mt19937_64 rng(3);
  Matrix w = Matrix::Random(4, 5);
  const Vector out = sp::dense_forward(layer(w, Vector::Zero(4)), Vector::Zero(5), sp::Activation::identity);
  EXPECT_EQ(out, Vector::Zero(4));
}

TEST(DenseForward, DimensionMismatchIsStructural) {
  const auto l = layer(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_THROW(sp::dense_forward(l, Vector::Zero(3), sp::Activation::identity), sp::StructuralError);
}

TEST(DenseForward, IsPure) {
  const auto l = layer(Matrix::Random(3, 3), Vector::Random(3));
  const auto copy = l;
  const Vector in = Vector::Random(3);
  const Vector a = sp::dense_forward(l, in, sp::Activation::rectifier);
  const Vector b = sp::dense_forward(l, in, sp::Activation::rectifier);
  EXPECT_EQ(a, b);
  EXPECT_EQ(l.weights, copy.weights);
  EXPECT_EQ(l.biases, copy.biases);
}

TEST(Softmax, UniformForEqualLogits) {
  const Vector p = sp::softmax(Vector::Zero(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p(i), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitsDoNotOverflow) {
  const Vector p = sp::softmax(vec({1000, 0}));
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(0), 1.0, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
}

TEST(Softmax, ClosedFormAndShiftInvariance) {
  for (double c : {-100.0, -3.5, 0.0, 7.0, 100.0}) {
    const Vector p = sp::softmax(vec({std::log(1.0) + c, std::log(2.0) + c, std::log(3.0) + c}));
    EXPECT_NEAR(p(0), 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(p(1), 2.0 / 6.0, 1e-12);
    EXPECT_NEAR(p(2), 3.0 / 6.0, 1e-12);
  }
}

TEST(Softmax, SumsToOneAndShiftInvariantOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int t = 0; t < 200; ++t) {
    const Vector v = sp::testing::random_vector(6, 10.0, rng);
    const Vector p = sp::softmax(v);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GT(p.minCoeff(), 0.0);
    const Vector q = sp::softmax((v.array() + u(rng)).matrix());
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, ColumnsMatchesVectorVersion) {
  const Matrix logits = Matrix::Random(4, 7) * 20.0;
  const Matrix p = sp::softmax_columns(logits);
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    EXPECT_LT((p.col(c) - sp::softmax(logits.col(c))).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(GlorotInit, BoundsAndZeroBiases) {
  const auto l = sp::glorot_layer(30, 20, 5);
  const double bound = std::sqrt(6.0 / 50.0);
  EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(l.biases, Vector::Zero(20));
  EXPECT_EQ(sp::glorot_layer(30, 20, 5).weights, l.weights);
  EXPECT_NE(sp::glorot_layer(30, 20, 6).weights, l.weights);
}

TEST(Backward, ZeroUpstreamAtOptimumGivesZeroGradients) {
  // Squared error at the optimum has zero gradient w.r.t. the outputs.
  sp::Mlp net = small_net(2, 4, 2, 1);
  std::mt19937_64 rng(2);
  const Matrix coords = sp::testing::random_coords(5, rng);
  const Vector z = sp::testing::random_vector(2, 0.1, rng);
  const auto tape = sp::mlp_forward(net, coords, z);
  const Matrix target = tape.logits;
  const auto g = sp::mlp_backward(net, tape, tape.logits - target, sp::GradientScope::parameters_and_latent);
  for (const auto& l : g.layers) {
    EXPECT_EQ(l.weights.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(l.biases.cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(g.latent.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, LatentGradientZeroWhenLatentUnused) {
  sp::Mlp net = small_net(3, 5, 2, 4);
  net.layers[0].weights.rightCols(3).setZero();
  std::mt19937_64 rng(5);
  const Matrix coords = sp::testing::random_coords(9, rng);
  const Vector z = sp::testing::random_vector(3, 0.5, rng);
  const auto tape = sp::mlp_forward(net, coords, z);
  const auto g = sp::mlp_backward(net, tape, Matrix::Random(2, 9), sp::GradientScope::parameters_and_latent);
  EXPECT_EQ(g.latent, Vector::Zero(3));
}

TEST(Backward, RandomThreeLayerNetMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (int probe = 0; probe < 5; ++probe) {
    sp::Mlp net = small_net(4, 6, 3, 100 + probe);
    const Matrix coords = sp::testing::random_coords(8, rng);
    const Vector z = sp::testing::random_vector(4, 0.3, rng);
    const Matrix weight = Matrix::Random(3, 8);  // loss = sum(weight .* logits)
    const auto tape = sp::mlp_forward(net, coords, z);
    const auto g = sp::mlp_backward(net, tape, weight, sp::GradientScope::parameters_and_latent);
    sp::Mlp grads;
    grads.layers = g.layers;
    const Vector analytic = sp::testing::flatten(grads, g.latent);
    const Vector point = sp::testing::flatten(net, z);
    auto loss = [&](const Vector& x) {
      sp::Mlp n = net;
      Vector lat = z;
      sp::testing::unflatten(x, n, lat);
      return (weight.array() * sp::mlp_logits(n, coords, lat).array()).sum();
    };
    EXPECT_LT(sp::finite_diff_check(loss, point, analytic, 1e-6), 1e-5) << "probe " << probe;
  }
}

TEST(Backward, WithoutForwardRecordIsUsageError) {
  sp::Mlp net = small_net(2, 3, 2, 9);
  sp::ForwardTape empty;
  EXPECT_THROW(sp::mlp_backward(net, empty, Matrix::Zero(2, 1), sp::GradientScope::parameters_and_latent),
               sp::UsageError);
  std::mt19937_64 rng(1);
  const auto tape = sp::mlp_forward(net, sp::testing::random_coords(4, rng), Vector::Zero(2));
  EXPECT_THROW(sp::mlp_backward(net, tape, Matrix::Zero(2, 3), sp::GradientScope::parameters_and_latent),
               sp::UsageError);
  sp::Mlp other = small_net(2, 5, 2, 9);
  EXPECT_THROW(sp::mlp_backward(other, tape, Matrix::Zero(2, 4), sp::GradientScope::parameters_and_latent),
               sp::UsageError);
}

TEST(Backward, LatentOnlyScopeMatchesFullScopeLatent) {
  sp::Mlp net = small_net(4, 6, 3, 21);
  std::mt19937_64 rng(8);
  const auto tape = sp::mlp_forward(net, sp::testing::random_coords(10, rng), sp::testing::random_vector(4, 0.2, rng));
  const Matrix up = Matrix::Random(3, 10);
  const auto full = sp::mlp_backward(net, tape, up, sp::GradientScope::parameters_and_latent);
  const auto lat = sp::mlp_backward(net, tape, up, sp::GradientScope::latent_only);
  EXPECT_TRUE(lat.layers.empty());
  EXPECT_LT((full.latent - lat.latent).cwiseAbs().maxCoeff(), 1e-13);
}

// ---------------------------------------------------------------------------

TEST(Adam, ZeroGradientKeepsParamsAndDecaysMoments) {
  std::vector<double> w{1.0, -2.0};
  std::vector<double> g{0.5, 0.5};
  sp::AdamState state;
  const sp::ParamBlock block{"w", w, g};
  sp::adam_step({&block, 1}, state, 0.1);
  const double m_before = state.first_moment[0][0];
  g = {0.0, 0.0};
  sp::adam_step({&block, 1}, state, 0.1);
  EXPECT_LT(std::abs(state.first_moment[0][0]), std::abs(m_before));
  EXPECT_NEAR(state.first_moment[0][0], 0.9 * m_before, 1e-15);

  std::vector<double> v{3.0};
  std::vector<double> zero{0.0};
  sp::AdamState fresh;
  const sp::ParamBlock b2{"v", v, zero};
  sp::adam_step({&b2, 1}, fresh, 0.1);
  EXPECT_EQ(v[0], 3.0);
  EXPECT_EQ(fresh.step_count, 1);
}

TEST(Adam, FirstStepIsExactlyLearningRate) {
  std::vector<double> w{1.0};
  std::vector<double> g{2.0};  // d/dw w^2 at 1
  sp::AdamState state;
  const sp::ParamBlock block{"w", w, g};
  sp::adam_step({&block, 1}, state, 0.1);
  // m_hat = g, v_hat = g^2: the step is lr * g / (|g| + eps).
  EXPECT_NEAR(w[0], 1.0 - 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(w[0], 0.9, 1e-8);
  EXPECT_EQ(state.step_count, 1);
}

TEST(Adam, ConvergesOnQuadratic) {
  std::vector<double> w{1.0};
  std::vector<double> g{0.0};
  sp::AdamState state;
  const sp::ParamBlock block{"w", w, g};
  // Scalar reference simulation of the same recurrence.
  double ref = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 500; ++t) {
    g[0] = 2.0 * w[0];
    sp::adam_step({&block, 1}, state, 0.1);
    const double gr = 2.0 * ref;
    m = 0.9 * m + 0.1 * gr;
    v = 0.999 * v + 0.001 * gr * gr;
    ref -= 0.1 * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(w[0], ref, 1e-12);
  EXPECT_LT(std::abs(w[0]), 1e-3);
  EXPECT_EQ(state.step_count, 500);
}

TEST(Adam, NaNGradientNamesBlockAndLeavesParams) {
  std::vector<double> a{1.0}, ga{1.0};
  std::vector<double> b{2.0}, gb{std::nan("")};
  sp::AdamState state;
  const sp::ParamBlock blocks[] = {{"alpha", a, ga}, {"layer3.weights", b, gb}};
  try {
    sp::adam_step(blocks, state, 0.1);
    FAIL() << "expected NumericError";
  } catch (const sp::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer3.weights"), std::string::npos);
  }
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(b[0], 2.0);
  EXPECT_EQ(state.step_count, 0);
}

TEST(Adam, ShapeMismatchIsStructural) {
  std::vector<double> w{1.0, 2.0};
  std::vector<double> g{1.0};
  sp::AdamState state;
  const sp::ParamBlock block{"w", w, g};
  EXPECT_THROW(sp::adam_step({&block, 1}, state, 0.1), sp::StructuralError);
}

TEST(Adam, IsBitDeterministic) {
  auto run = [] {
    std::vector<double> w{0.3, -0.7, 1.1};
    std::vector<double> g(3);
    sp::AdamState state;
    const sp::ParamBlock block{"w", w, g};
    for (int t = 0; t < 50; ++t) {
      for (int i = 0; i < 3; ++i) g[static_cast<std::size_t>(i)] = std::sin(w[static_cast<std::size_t>(i)] * (t + 1));
      sp::adam_step({&block, 1}, state, 0.01);
    }
    return w;
  };
  EXPECT_EQ(run(), run());
}

// ---------------------------------------------------------------------------

TEST(FiniteDiffCheck, LinearFunctionIsExact) {
  const Vector a = vec({1.5, -2.0, 0.25});
  auto f = [&](const Vector& x) { return a.dot(x) + 3.0; };
  EXPECT_LT(sp::finite_diff_check(f, vec({0.1, 0.2, 0.3}), a, 1e-6), 1e-9);
}

TEST(FiniteDiffCheck, DetectsWrongGradient) {
  auto f = [](const Vector& x) { return x.squaredNorm(); };
  EXPECT_GT(sp::finite_diff_check(f, vec({1.0, 2.0}), vec({2.0, 3.0}), 1e-6), 0.1);
}

TEST(FiniteDiffCheck, ZeroStepRejected) {
  auto f = [](const Vector& x) { return x.sum(); };
  EXPECT_THROW(sp::finite_diff_check(f, vec({1.0}), vec({1.0}), 0.0), sp::UsageError);
  EXPECT_THROW(sp::finite_diff_check(f, vec({1.0}), vec({1.0}), -1e-6), sp::UsageError);
}
