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

#include "shapeprior/pipeline.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace fs = std::filesystem;

std::vector<LabelVolume> generate(const PopulationSpec& spec, std::uint64_t seed) {
  validate(spec);
  if (spec.kind == PopulationSpec::Kind::organs) return generate_population(spec.organs, seed);
  return generate_muscle_population(spec.muscle, spec.shift, seed);
}

std::string subject_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "subject_%03zu", index);
  return buf;
}

Json write_population(const PopulationSpec& spec, std::uint64_t seed, const fs::path& dir) {
  const auto volumes = generate(spec, seed);
  std::vector<std::string> split_of(volumes.size());
  std::size_t next = 0;
  for (const auto& [name, count] : spec.splits) {
    for (int i = 0; i < count; ++i) split_of[next++] = name;
  }
  Json subjects = Json::array();
  for (std::size_t s = 0; s < volumes.size(); ++s) {
    const fs::path rel = split_of[s].empty() ? fs::path(subject_id(s) + ".segv") : fs::path(split_of[s]) / (subject_id(s) + ".segv");
    write_volume_file(dir / rel, volumes[s]);
    Json counts = Json::array();
    for (int c = 0; c < volumes[s].n_class(); ++c) counts.push_back(volumes[s].count(c));
    Json entry{{"id", subject_id(s)}, {"split", split_of[s]}, {"file", rel.generic_string()}, {"class_voxels", counts}};
    if (spec.kind == PopulationSpec::Kind::muscle) {
      const auto [first, last] = normalize_length(volumes[s]);
      entry["foreground_span"] = {first, last};
    }
    subjects.push_back(std::move(entry));
  }
  Json manifest{{"tool", "shapeprior"},
                {"version", kLibraryVersion},
                {"seed", seed},
                {"spec", to_json(spec)},
                {"subjects", std::move(subjects)}};
  write_text_file(dir / "population.json", manifest.dump(2) + "\n");
  return manifest;
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "epoch,objective,dice,cross_entropy,latent_norm_mean,latent_norm_max\n";
  char buf[256];
  for (const auto& r : history.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.objective, r.dice, r.cross_entropy,
                  r.latent_norm_mean, r.latent_norm_max);
    os << buf;
  }
  return os.str();
}

std::uint64_t history_digest(const TrainHistory& history) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : history.epochs) {
    mix(static_cast<std::uint64_t>(r.epoch));
    for (double v : {r.objective, r.dice, r.cross_entropy, r.latent_norm_mean, r.latent_norm_max}) {
      mix(std::bit_cast<std::uint64_t>(v));
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json training_manifest(const TrainConfig& config, std::span<const std::string> shape_ids, const TrainHistory& history) {
  Json m;
  m["tool"] = "shapeprior";
  m["version"] = kLibraryVersion;
  m["train_config"] = to_json(config);
  m["shape_ids"] = std::vector<std::string>(shape_ids.begin(), shape_ids.end());
  m["epochs_completed"] = history.epochs.size();
  m["history_digest"] = hex64(history_digest(history));
  if (!history.epochs.empty()) {
    m["first_objective"] = history.epochs.front().objective;
    m["final_objective"] = history.epochs.back().objective;
  }
  return m;
}

}  // namespace shapeprior
