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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapeprior/model.hpp"
#include "shapeprior/plan.hpp"
#include "shapeprior/volume.hpp"

namespace shapeprior {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// SEGV1: one JSON header line, then nx*ny*nz raw label bytes (x-fastest).

inline constexpr std::size_t kMaxHeaderBytes = 1 << 20;

void write_volume(std::ostream& os, const LabelVolume& volume);
LabelVolume read_volume(std::istream& is);
void write_volume_file(const std::filesystem::path& path, const LabelVolume& volume);
LabelVolume read_volume_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoint: one JSON header line declaring the descriptor and an ordered
// array table, then the arrays as little-endian float64, row-major.

struct Checkpoint {
  ModelParams params;
  LatentTable latents;
  Json manifest = Json::object();
};

void write_checkpoint(std::ostream& os, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& is);
void write_checkpoint_file(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint_file(const std::filesystem::path& path);

// Refuses volumes whose class count differs from the model's.
void check_compatible(const ArchitectureDescriptor& arch, const LabelVolume& volume);

// Probability grid: JSON header line (magic SPPG1, dims, n_class), then
// n_class x voxels little-endian float64, class index fastest.
void write_probability_file(const std::filesystem::path& path, const Matrix& probabilities, Dims dims);
Matrix read_probability_file(const std::filesystem::path& path, Dims* dims = nullptr);

// ---------------------------------------------------------------------------
// Plans: [{"kind": "absolute"|"percent", "value": number}, ...]

Json plan_to_json(const SlicePlan& plan);
SlicePlan plan_from_json(const Json& json);
void write_plan_file(const std::filesystem::path& path, const SlicePlan& plan);
SlicePlan read_plan_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);
Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& what);

// Sorted *.segv files of a directory.
std::vector<std::filesystem::path> list_volumes(const std::filesystem::path& dir);

}  // namespace shapeprior
