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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shapeprior/config.hpp"
#include "shapeprior/io.hpp"
#include "shapeprior/trainer.hpp"

namespace shapeprior {

inline constexpr const char* kLibraryVersion = "0.1.0";

std::vector<LabelVolume> generate(const PopulationSpec& spec, std::uint64_t seed);

// subject_000, subject_001, ... in generation order.
std::string subject_id(std::size_t index);

// Writes every subject to <dir>/<split>/<subject_id>.segv (or <dir>/ when no
// splits are declared) and <dir>/population.json. Returns the manifest.
Json write_population(const PopulationSpec& spec, std::uint64_t seed, const std::filesystem::path& dir);

std::string history_csv(const TrainHistory& history);
// FNV-1a over the bit patterns of every history record.
std::uint64_t history_digest(const TrainHistory& history);

// Manifest embedded in checkpoints: resolved configuration, shape ids,
// history digest and final objective.
Json training_manifest(const TrainConfig& config, std::span<const std::string> shape_ids, const TrainHistory& history);

std::string hex64(std::uint64_t v);

}  // namespace shapeprior
