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

#include "shapeprior/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shapeprior/error.hpp"
#include "shapeprior/random.hpp"

namespace shapeprior {

namespace {

constexpr std::uint64_t kOrganStream = 0x6f7267616eULL;
constexpr std::uint64_t kMuscleStream = 0x6d7573636c65ULL;
constexpr std::uint64_t kShiftedStream = 0x7368696674ULL;

double axis_coord(int i, int n) { return n == 1 ? 0.0 : 2.0 * i / (n - 1) - 1.0; }

// Normal draw clamped to +-3 std.
double jitter(Rng& rng, double std) {
  if (std <= 0.0) return 0.0;
  std::normal_distribution<double> d(0.0, std);
  return std::clamp(d(rng), -3.0 * std, 3.0 * std);
}

int axis_index_floor(double coord, int n) { return static_cast<int>(std::floor((coord + 1.0) * 0.5 * (n - 1))); }
int axis_index_ceil(double coord, int n) { return static_cast<int>(std::ceil((coord + 1.0) * 0.5 * (n - 1))); }

}  // namespace

int PhantomSpec::n_class() const {
  int m = 0;
  for (const auto& o : organs) m = std::max(m, o.class_id);
  return m + 1;
}

void validate(const PhantomSpec& spec) {
  validate_dims(spec.dims);
  validate_spacing(spec.spacing);
  if (spec.organs.empty()) throw StructuralError("phantom spec: no organs");
  if (spec.population_size < 1) throw StructuralError("phantom spec: population_size must be >= 1");
  if (spec.global_scale_jitter < 0.0) throw StructuralError("phantom spec: negative jitter");
  std::vector<int> ids;
  for (const auto& o : spec.organs) ids.push_back(o.class_id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != static_cast<int>(i) + 1) throw StructuralError("phantom spec: class ids must be dense 1..n_class-1");
  }
  if (spec.n_class() > 256) throw StructuralError("phantom spec: too many classes");
  const double scale_max = 1.0 + 3.0 * spec.global_scale_jitter;
  for (const auto& o : spec.organs) {
    if (!(o.exponent > 0.0)) throw StructuralError("phantom spec: organ '" + o.name + "' exponent must be > 0");
    if (o.radius_jitter < 0.0) throw StructuralError("phantom spec: organ '" + o.name + "' negative jitter");
    for (int a = 0; a < 3; ++a) {
      if (!(o.radii[a] > 0.0)) throw StructuralError("phantom spec: organ '" + o.name + "' radii must be > 0");
      if (o.center_jitter[a] < 0.0 || spec.global_shift_jitter[a] < 0.0) {
        throw StructuralError("phantom spec: organ '" + o.name + "' negative jitter");
      }
      const double reach = (std::abs(o.center[a]) + 3.0 * o.center_jitter[a] + o.radii[a] * (1.0 + 3.0 * o.radius_jitter)) *
                               scale_max +
                           3.0 * spec.global_shift_jitter[a];
      if (reach > 1.0) {
        throw StructuralError("phantom spec: organ '" + o.name + "' can escape the volume under maximal jitter");
      }
    }
  }
}

LabelVolume generate_subject(const PhantomSpec& spec, std::uint64_t seed, int subject_index) {
  Rng rng(stream_seed(seed, kOrganStream, static_cast<std::uint64_t>(subject_index)));
  const double scale = 1.0 + jitter(rng, spec.global_scale_jitter);
  std::array<double, 3> shift{};
  for (int a = 0; a < 3; ++a) shift[a] = jitter(rng, spec.global_shift_jitter[a]);

  std::vector<OrganSpec> organs = spec.organs;
  for (auto& o : organs) {
    for (int a = 0; a < 3; ++a) o.center[a] = scale * (o.center[a] + jitter(rng, o.center_jitter[a])) + shift[a];
    const double r = 1.0 + jitter(rng, o.radius_jitter);
    for (int a = 0; a < 3; ++a) o.radii[a] *= scale * r;
  }
  std::stable_sort(organs.begin(), organs.end(), [](const OrganSpec& a, const OrganSpec& b) {
    return a.class_id < b.class_id;
  });

  LabelVolume vol(spec.dims, spec.spacing, spec.n_class());
  const auto& d = spec.dims;
  const std::array<int, 3> n{d.nx, d.ny, d.nz};
  for (const auto& o : organs) {
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, axis_index_floor(o.center[a] - o.radii[a], n[a]));
      hi[a] = std::min(n[a] - 1, axis_index_ceil(o.center[a] + o.radii[a], n[a]));
    }
    for (int k = lo[2]; k <= hi[2]; ++k) {
      const double tz = std::pow(std::abs((axis_coord(k, d.nz) - o.center[2]) / o.radii[2]), o.exponent);
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const double ty = std::pow(std::abs((axis_coord(j, d.ny) - o.center[1]) / o.radii[1]), o.exponent);
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const double tx = std::pow(std::abs((axis_coord(i, d.nx) - o.center[0]) / o.radii[0]), o.exponent);
          if (tx + ty + tz <= 1.0) vol.set(i, j, k, o.class_id);
        }
      }
    }
  }
  for (const auto& o : spec.organs) {
    if (vol.count(o.class_id) == 0) {
      throw StructuralError("phantom: organ '" + o.name + "' has no voxel in subject " + std::to_string(subject_index));
    }
  }
  return vol;
}

std::vector<LabelVolume> generate_population(const PhantomSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::vector<LabelVolume> out;
  out.reserve(static_cast<std::size_t>(spec.population_size));
  for (int s = 0; s < spec.population_size; ++s) out.push_back(generate_subject(spec, seed, s));
  return out;
}

PhantomSpec default_organ_spec() {
  PhantomSpec spec;
  spec.dims = {48, 48, 48};
  spec.spacing = {1.0, 1.0, 1.0};
  spec.global_scale_jitter = 0.03;
  spec.global_shift_jitter = {0.02, 0.02, 0.02};
  spec.population_size = 20;
  const std::array<double, 3> small_jitter{0.015, 0.015, 0.015};
  spec.organs = {
      {"chiasma", 1, {0.0, 0.12, -0.2}, {0.19, 0.095, 0.085}, 2.0, small_jitter, 0.04},
      {"left_eye", 2, {-0.34, 0.5, -0.2}, {0.2, 0.2, 0.2}, 2.0, small_jitter, 0.04},
      {"right_eye", 3, {0.34, 0.5, -0.2}, {0.2, 0.2, 0.2}, 2.0, small_jitter, 0.04},
      {"cord", 4, {0.0, -0.25, -0.48}, {0.13, 0.13, 0.29}, 2.0, small_jitter, 0.04},
      {"brain", 5, {0.0, -0.05, 0.34}, {0.72, 0.68, 0.42}, 2.5, small_jitter, 0.04},
  };
  return spec;
}

// ---------------------------------------------------------------------------

void validate(const MuscleSpec& s) {
  validate_dims(s.dims);
  validate_spacing(s.spacing);
  if (s.population_size < 1) throw StructuralError("muscle spec: population_size must be >= 1");
  if (!(s.start_z < s.end_z)) throw StructuralError("muscle spec: start_z must be below end_z");
  if (s.insertion_jitter < 0.0 || s.radius_jitter < 0.0 || s.peak_jitter < 0.0 || s.center_jitter < 0.0 ||
      s.drift < 0.0) {
    throw StructuralError("muscle spec: negative jitter");
  }
  if (s.start_z - 3.0 * s.insertion_jitter < -1.0 || s.end_z + 3.0 * s.insertion_jitter > 1.0) {
    throw StructuralError("muscle spec: insertions can leave the volume under maximal jitter");
  }
  if (s.end_z - s.start_z <= 6.0 * s.insertion_jitter) throw StructuralError("muscle spec: length can collapse");
  if (!(s.end_radius_fraction > 0.0) || s.end_radius_fraction > 1.0) {
    throw StructuralError("muscle spec: end_radius_fraction must be in (0, 1]");
  }
  if (!(s.peak_position > 0.0) || !(s.peak_position < 1.0)) {
    throw StructuralError("muscle spec: peak_position must be in (0, 1)");
  }
  for (double r : s.max_radii) {
    if (!(r > 0.0)) throw StructuralError("muscle spec: radii must be > 0");
    if (r * (1.0 + 3.0 * s.radius_jitter) * 1.25 + 3.0 * s.center_jitter + s.drift > 1.0) {
      throw StructuralError("muscle spec: cross-section can leave the volume under maximal jitter");
    }
  }
}

void validate(const DomainShiftSpec& s) {
  if (!(s.radius_scale > 0.0) || s.radius_scale > 1.0) throw StructuralError("domain shift: radius_scale must be in (0, 1]");
  if (s.extra_center_jitter < 0.0) throw StructuralError("domain shift: negative jitter");
  if (s.boundary_noise < 0.0 || s.boundary_noise >= 0.25) {
    throw StructuralError("domain shift: boundary_noise must be in [0, 0.25)");
  }
}

LabelVolume generate_muscle_subject(const MuscleSpec& spec, const std::optional<DomainShiftSpec>& shift,
                                    std::uint64_t seed, int subject_index) {
  Rng rng(stream_seed(seed, shift ? kShiftedStream : kMuscleStream, static_cast<std::uint64_t>(subject_index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  const double z0 = spec.start_z + jitter(rng, spec.insertion_jitter);
  const double z1 = spec.end_z + jitter(rng, spec.insertion_jitter);
  double rx = spec.max_radii[0] * (1.0 + jitter(rng, spec.radius_jitter));
  double ry = spec.max_radii[1] * (1.0 + jitter(rng, spec.radius_jitter));
  const double peak = std::clamp(spec.peak_position + jitter(rng, spec.peak_jitter), 0.2, 0.8);
  double cx = jitter(rng, spec.center_jitter);
  double cy = jitter(rng, spec.center_jitter);
  const double drift_angle = 2.0 * pi * unit(rng);

  std::array<double, 3> harmonic_amp{}, harmonic_phase{}, harmonic_twist{};
  if (shift) {
    rx *= shift->radius_scale;
    ry *= shift->radius_scale;
    cx += jitter(rng, shift->extra_center_jitter);
    cy += jitter(rng, shift->extra_center_jitter);
    for (int h = 0; h < 3; ++h) {
      harmonic_amp[h] = shift->boundary_noise * unit(rng) / 1.5;
      harmonic_phase[h] = 2.0 * pi * unit(rng);
      harmonic_twist[h] = pi * (2.0 * unit(rng) - 1.0);
    }
  }
  const double warp = std::log(0.5) / std::log(peak);  // maps the peak to the middle of the sine
  const double e = spec.end_radius_fraction;

  const auto& d = spec.dims;
  LabelVolume vol(d, spec.spacing, 2);
  for (int k = 0; k < d.nz; ++k) {
    const double z = axis_coord(k, d.nz);
    if (z < z0 || z > z1) continue;
    const double t = (z - z0) / (z1 - z0);
    const double profile = e + (1.0 - e) * std::sin(pi * std::pow(t, warp));
    const double ccx = cx + spec.drift * (2.0 * t - 1.0) * std::cos(drift_angle);
    const double ccy = cy + spec.drift * (2.0 * t - 1.0) * std::sin(drift_angle);
    bool any = false;
    for (int j = 0; j < d.ny; ++j) {
      const double dy = (axis_coord(j, d.ny) - ccy) / (ry * profile);
      for (int i = 0; i < d.nx; ++i) {
        const double dx = (axis_coord(i, d.nx) - ccx) / (rx * profile);
        double limit = 1.0;
        if (shift) {
          const double theta = std::atan2(dy, dx);
          for (int h = 0; h < 3; ++h) {
            limit += harmonic_amp[h] * std::sin((h + 2) * theta + harmonic_phase[h] + harmonic_twist[h] * t);
          }
        }
        if (dx * dx + dy * dy <= limit * limit) {
          vol.set(i, j, k, 1);
          any = true;
        }
      }
    }
    if (!any) {
      // Keep the span contiguous when the section is thinner than a voxel.
      const int i = std::clamp(static_cast<int>(std::lround((ccx + 1.0) * 0.5 * (d.nx - 1))), 0, d.nx - 1);
      const int j = std::clamp(static_cast<int>(std::lround((ccy + 1.0) * 0.5 * (d.ny - 1))), 0, d.ny - 1);
      vol.set(i, j, k, 1);
    }
  }
  if (!vol.has_foreground()) {
    throw StructuralError("muscle phantom: subject " + std::to_string(subject_index) + " has no foreground");
  }
  return vol;
}

std::vector<LabelVolume> generate_muscle_population(const MuscleSpec& spec, const std::optional<DomainShiftSpec>& shift,
                                                    std::uint64_t seed) {
  validate(spec);
  if (shift) validate(*shift);
  std::vector<LabelVolume> out;
  out.reserve(static_cast<std::size_t>(spec.population_size));
  for (int s = 0; s < spec.population_size; ++s) out.push_back(generate_muscle_subject(spec, shift, seed, s));
  return out;
}

}  // namespace shapeprior
