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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapeprior/volume.hpp"

namespace shapeprior {

// Superellipsoid organ in normalized [-1, 1] coordinates:
// sum_a |(x_a - c_a) / r_a|^exponent <= 1.
struct OrganSpec {
  std::string name;
  int class_id = 1;
  std::array<double, 3> center{};
  std::array<double, 3> radii{0.1, 0.1, 0.1};
  double exponent = 2.0;
  std::array<double, 3> center_jitter{};  // std per axis, normalized units
  double radius_jitter = 0.0;             // relative std
};

// Aligned multi-organ population. Per subject a global similarity jitter
// (scale, shift) is applied on top of the per-organ jitter. Every jitter draw
// is clamped to 3 standard deviations.
struct PhantomSpec {
  Dims dims{48, 48, 48};
  Spacing spacing{};
  std::vector<OrganSpec> organs;
  double global_scale_jitter = 0.0;  // relative std
  std::array<double, 3> global_shift_jitter{};
  int population_size = 20;

  int n_class() const;
};

// Rejects specs whose organs could leave the volume under maximal jitter,
// non-dense class ids or invalid radii.
void validate(const PhantomSpec& spec);

// Later (higher) class ids overwrite earlier ones where organs overlap.
std::vector<LabelVolume> generate_population(const PhantomSpec& spec, std::uint64_t seed);
LabelVolume generate_subject(const PhantomSpec& spec, std::uint64_t seed, int subject_index);

// Five organs with a clinical size spread: a tiny chiasma-like ellipsoid,
// two eyes, an elongated cord and a large brain-like organ.
PhantomSpec default_organ_spec();

// Elongated, tapered single-class shape along the axial direction.
struct MuscleSpec {
  Dims dims{32, 32, 96};
  Spacing spacing{};
  double start_z = -0.8;  // distal insertion, normalized z
  double end_z = 0.8;     // proximal insertion
  double insertion_jitter = 0.05;
  std::array<double, 2> max_radii{0.40, 0.28};  // in-plane, normalized
  double radius_jitter = 0.08;                   // relative std
  double end_radius_fraction = 0.3;
  double peak_position = 0.5;  // fraction of the length with the widest section
  double peak_jitter = 0.06;
  double center_jitter = 0.04;
  double drift = 0.05;  // in-plane center drift amplitude along the length
  int population_size = 12;
};

// Atrophy-like shift: thinner sections, displaced centers, irregular boundary.
struct DomainShiftSpec {
  double radius_scale = 0.65;
  double extra_center_jitter = 0.03;
  double boundary_noise = 0.08;  // relative radial perturbation amplitude
};

void validate(const MuscleSpec& spec);
void validate(const DomainShiftSpec& shift);

std::vector<LabelVolume> generate_muscle_population(const MuscleSpec& spec, const std::optional<DomainShiftSpec>& shift,
                                                    std::uint64_t seed);
LabelVolume generate_muscle_subject(const MuscleSpec& spec, const std::optional<DomainShiftSpec>& shift,
                                    std::uint64_t seed, int subject_index);

}  // namespace shapeprior
