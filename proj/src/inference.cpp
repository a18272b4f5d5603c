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

#include "shapeprior/inference.hpp"

#include <cmath>

#include "shapeprior/error.hpp"
#include "shapeprior/objective.hpp"
#include "shapeprior/random.hpp"

namespace shapeprior {

void validate(const SliceAnnotationSet& set) {
  validate_dims(set.dims);
  if (set.slices.empty()) throw StructuralError("annotation set is empty");
  int previous = -1;
  for (const auto& s : set.slices) {
    if (s.axial_index < 0 || s.axial_index >= set.dims.nz) throw StructuralError("annotation index outside volume");
    if (s.axial_index <= previous) throw StructuralError("annotation indices must be distinct and ascending");
    previous = s.axial_index;
    if (s.labels.nx != set.dims.nx || s.labels.ny != set.dims.ny ||
        s.labels.labels.size() != set.dims.slice_size()) {
      throw StructuralError("annotation grid does not match the volume's in-plane dims");
    }
    for (auto l : s.labels.labels) {
      if (l >= set.n_class) throw StructuralError("annotation label >= n_class");
    }
  }
}

void validate(const InferConfig& c) {
  if (c.epochs < 1) throw ConfigError("infer.epochs must be >= 1");
  if (!(c.lr_latent > 0.0) || !std::isfinite(c.lr_latent)) throw ConfigError("infer.lr_latent must be > 0");
  if (c.n_latent_restarts < 1) throw ConfigError("infer.n_latent_restarts must be >= 1");
  validate(c.loss);
}

SliceAnnotationSet oracle_annotate(const LabelVolume& gt, const SlicePlan& plan) {
  SliceAnnotationSet set{gt.dims(), gt.spacing(), gt.n_class(), {}};
  for (int k : resolve_plan(plan, gt)) set.slices.push_back({k, gt.axial_slice(k)});
  return set;
}

namespace {

struct AnnotatedPoints {
  Matrix coords;
  std::vector<std::uint8_t> labels;
};

AnnotatedPoints gather(const SliceAnnotationSet& set) {
  std::vector<std::size_t> flat;
  AnnotatedPoints pts;
  const std::size_t slice = set.dims.slice_size();
  flat.reserve(slice * set.slices.size());
  pts.labels.reserve(flat.capacity());
  for (const auto& s : set.slices) {
    const std::size_t base = static_cast<std::size_t>(s.axial_index) * slice;
    for (std::size_t t = 0; t < slice; ++t) {
      flat.push_back(base + t);
      pts.labels.push_back(s.labels.labels[t]);
    }
  }
  pts.coords = coord_matrix(flat, set.dims);
  return pts;
}

}  // namespace

LatentFit infer_latent(const ModelParams& params, const SliceAnnotationSet& annotations, const InferConfig& config) {
  validate(config);
  validate(annotations);
  if (annotations.n_class != params.arch.n_class) {
    throw StructuralError("descriptor n_class " + std::to_string(params.arch.n_class) +
                          " does not match annotation n_class " + std::to_string(annotations.n_class));
  }
  const AnnotatedPoints pts = gather(annotations);
  const Mlp& net = params.network;

  LatentFit best;
  for (int r = 0; r < config.n_latent_restarts; ++r) {
    LatentFit fit;
    fit.restart = r;
    fit.latent = init_latent("inference", stream_seed(config.seed, 0x72657374ULL, static_cast<std::uint64_t>(r)),
                             params.arch.latent_dim);
    Vector& z = fit.latent.values;
    AdamState state;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const ObjectiveResult obj =
          evaluate_objective(net, pts.coords, pts.labels, z, config.loss, GradientScope::latent_only);
      if (!std::isfinite(obj.loss.total)) {
        throw NumericError("infer_latent: non-finite objective at epoch " + std::to_string(epoch));
      }
      if (epoch == 0) fit.initial_objective = obj.loss.total;
      const ParamBlock block{"latent", {z.data(), static_cast<std::size_t>(z.size())},
                             {obj.latent_grad.data(), static_cast<std::size_t>(obj.latent_grad.size())}};
      adam_step({&block, 1}, state, config.lr_latent);
    }
    fit.final_objective = objective_value(net, pts.coords, pts.labels, z, config.loss).total;
    if (!std::isfinite(fit.final_objective)) throw NumericError("infer_latent: non-finite final objective");
    if (r == 0 || fit.final_objective < best.final_objective) best = std::move(fit);
  }
  return best;
}

VolumePrediction infer_volume(const ModelParams& params, const SliceAnnotationSet& annotations,
                              const InferConfig& config) {
  VolumePrediction out;
  out.fit = infer_latent(params, annotations, config);
  out.probabilities = predict_probabilities(params, out.fit.latent.values, annotations.dims);
  out.labels = argmax_volume(out.probabilities, annotations.dims, annotations.spacing);
  return out;
}

}  // namespace shapeprior
