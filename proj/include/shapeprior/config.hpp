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

#include <map>
#include <optional>
#include <string>

#include "shapeprior/inference.hpp"
#include "shapeprior/io.hpp"
#include "shapeprior/losses.hpp"
#include "shapeprior/phantoms.hpp"
#include "shapeprior/trainer.hpp"

namespace shapeprior {

// JSON <-> configuration. Parsers start from the defaults, reject unknown
// keys and wrongly typed values with ConfigError, then run validate().
// Serializers emit every field so manifests carry the resolved values.

Json to_json(const LossConfig& config);
LossConfig loss_config_from_json(const Json& json, const LossConfig& defaults = {});

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& json);

Json to_json(const InferConfig& config);
// Loss fields not given fall back to `training_loss` (the lambda of the run
// that produced the model).
InferConfig infer_config_from_json(const Json& json, const LossConfig& training_loss = {});

// Population spec file: {"kind": "organs" | "muscle", ..., "splits": {name: count}}.
struct PopulationSpec {
  enum class Kind { organs, muscle };
  Kind kind = Kind::organs;
  PhantomSpec organs;
  MuscleSpec muscle;
  std::optional<DomainShiftSpec> shift;
  // Consecutive subjects go to the splits in the listed order.
  std::vector<std::pair<std::string, int>> splits;

  int population_size() const;
};

Json to_json(const PopulationSpec& spec);
PopulationSpec population_spec_from_json(const Json& json);
void validate(const PopulationSpec& spec);

// Shipped defaults: the five-organ population (8/2/10 split), the unshifted
// muscle population and its domain-shifted counterpart (3 adaptation, 10 test).
PopulationSpec default_organ_population();
PopulationSpec default_muscle_population();
PopulationSpec default_shifted_muscle_population();

}  // namespace shapeprior
