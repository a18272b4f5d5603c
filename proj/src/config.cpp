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

#include "shapeprior/config.hpp"

#include <cmath>
#include <set>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace {

// Reads typed fields from a JSON object and rejects keys it never consumed.
class Reader {
 public:
  Reader(const Json& json, std::string what) : json_(json), what_(std::move(what)) {
    if (!json_.is_object()) throw ConfigError(what_ + ": expected a JSON object");
  }

  void read(const char* key, int& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      const auto x = v->get<long long>();
      if (x < INT32_MIN || x > INT32_MAX) fail(key, "a 32-bit integer");
      out = static_cast<int>(x);
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number() || !std::isfinite(v->get<double>())) fail(key, "a finite number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  template <std::size_t N>
  void read(const char* key, std::array<double, N>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array() || v->size() != N) fail(key, "an array of " + std::to_string(N) + " numbers");
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*v)[i].is_number() || !std::isfinite((*v)[i].get<double>())) {
          fail(key, "an array of " + std::to_string(N) + " numbers");
        }
        out[i] = (*v)[i].get<double>();
      }
    }
  }
  void read(const char* key, Dims& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array() || v->size() != 3) fail(key, "an array of 3 integers");
      int* dst[3] = {&out.nx, &out.ny, &out.nz};
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number_integer()) fail(key, "an array of 3 integers");
        const auto x = (*v)[i].get<long long>();
        if (x < 1 || x > 4096) fail(key, "dims in [1, 4096]");
        *dst[i] = static_cast<int>(x);
      }
    }
  }
  void read(const char* key, Spacing& out) {
    std::array<double, 3> a{out.sx, out.sy, out.sz};
    read(key, a);
    out = {a[0], a[1], a[2]};
  }

  // Returns the raw value, marking the key consumed; nullptr when absent.
  const Json* take(const char* key) {
    seen_.insert(key);
    const auto it = json_.find(key);
    return it == json_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : json_.items()) {
      if (!seen_.count(k)) throw ConfigError(what_ + ": unknown key '" + k + "'");
    }
  }

  const std::string& what() const { return what_; }

 private:
  [[noreturn]] void fail(const char* key, const std::string& expected) const {
    throw ConfigError(what_ + ": '" + key + "' must be " + expected);
  }

  const Json& json_;
  std::string what_;
  std::set<std::string> seen_;
};

// Library validators throw StructuralError; configuration problems surface as
// ConfigError.
template <typename T>
void validate_as_config(const T& value, const std::string& what) {
  try {
    validate(value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(what, 0) == 0 ? msg : what + ": " + msg);
  }
}

Json dims_json(const Dims& d) { return Json::array({d.nx, d.ny, d.nz}); }
Json spacing_json(const Spacing& s) { return Json::array({s.sx, s.sy, s.sz}); }

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const LossConfig& c) {
  return Json{{"lambda", c.lambda}, {"dice_epsilon", c.dice_epsilon}, {"dice_weight", c.dice_weight}, {"ce_weight", c.ce_weight}};
}

LossConfig loss_config_from_json(const Json& json, const LossConfig& defaults) {
  LossConfig c = defaults;
  Reader r(json, "loss config");
  r.read("lambda", c.lambda);
  r.read("dice_epsilon", c.dice_epsilon);
  r.read("dice_weight", c.dice_weight);
  r.read("ce_weight", c.ce_weight);
  r.finish();
  validate_as_config(c, "loss config");
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"lr_network", c.lr_network},
              {"lr_latent", c.lr_latent},
              {"voxel_batch_per_shape", c.voxel_batch_per_shape},
              {"slice_stride", c.slice_stride},
              {"seed", c.seed},
              {"deterministic", c.deterministic},
              {"class_balanced_sampling", c.class_balanced_sampling},
              {"loss", to_json(c.loss)},
              {"hidden_width", c.hidden_width},
              {"latent_dim", c.latent_dim},
              {"n_layers", c.n_layers},
              {"skip_layer", c.skip_layer}};
}

TrainConfig train_config_from_json(const Json& json) {
  TrainConfig c;
  Reader r(json, "train config");
  r.read("epochs", c.epochs);
  r.read("lr_network", c.lr_network);
  r.read("lr_latent", c.lr_latent);
  r.read("voxel_batch_per_shape", c.voxel_batch_per_shape);
  r.read("slice_stride", c.slice_stride);
  r.read("seed", c.seed);
  r.read("deterministic", c.deterministic);
  r.read("class_balanced_sampling", c.class_balanced_sampling);
  if (const Json* loss = r.take("loss")) c.loss = loss_config_from_json(*loss);
  r.read("hidden_width", c.hidden_width);
  r.read("latent_dim", c.latent_dim);
  r.read("n_layers", c.n_layers);
  r.read("skip_layer", c.skip_layer);
  r.finish();
  validate_as_config(c, "train config");
  return c;
}

Json to_json(const InferConfig& c) {
  return Json{{"epochs", c.epochs},
              {"lr_latent", c.lr_latent},
              {"seed", c.seed},
              {"n_latent_restarts", c.n_latent_restarts},
              {"loss", to_json(c.loss)}};
}

InferConfig infer_config_from_json(const Json& json, const LossConfig& training_loss) {
  InferConfig c;
  c.loss = training_loss;
  Reader r(json, "infer config");
  r.read("epochs", c.epochs);
  r.read("lr_latent", c.lr_latent);
  r.read("seed", c.seed);
  r.read("n_latent_restarts", c.n_latent_restarts);
  if (const Json* loss = r.take("loss")) c.loss = loss_config_from_json(*loss, training_loss);
  r.finish();
  validate_as_config(c, "infer config");
  return c;
}

// ---------------------------------------------------------------------------

int PopulationSpec::population_size() const {
  return kind == Kind::organs ? organs.population_size : muscle.population_size;
}

void validate(const PopulationSpec& spec) {
  if (spec.kind == PopulationSpec::Kind::organs) {
    validate(spec.organs);
  } else {
    validate(spec.muscle);
    if (spec.shift) validate(*spec.shift);
  }
  int total = 0;
  std::set<std::string> names;
  for (const auto& [name, count] : spec.splits) {
    if (name.empty() || name.find_first_of("/\\.") != std::string::npos) {
      throw StructuralError("split name '" + name + "' is not a plain directory name");
    }
    if (!names.insert(name).second) throw StructuralError("duplicate split '" + name + "'");
    if (count < 0) throw StructuralError("split '" + name + "' has a negative count");
    total += count;
  }
  if (!spec.splits.empty() && total != spec.population_size()) {
    throw StructuralError("splits cover " + std::to_string(total) + " subjects, population has " +
                          std::to_string(spec.population_size()));
  }
}

Json to_json(const PopulationSpec& spec) {
  Json j;
  if (spec.kind == PopulationSpec::Kind::organs) {
    const auto& s = spec.organs;
    j["kind"] = "organs";
    j["dims"] = dims_json(s.dims);
    j["spacing_mm"] = spacing_json(s.spacing);
    j["population_size"] = s.population_size;
    j["global_scale_jitter"] = s.global_scale_jitter;
    j["global_shift_jitter"] = s.global_shift_jitter;
    Json organs = Json::array();
    for (const auto& o : s.organs) {
      organs.push_back(Json{{"name", o.name},
                            {"class_id", o.class_id},
                            {"center", o.center},
                            {"radii", o.radii},
                            {"exponent", o.exponent},
                            {"center_jitter", o.center_jitter},
                            {"radius_jitter", o.radius_jitter}});
    }
    j["organs"] = std::move(organs);
  } else {
    const auto& m = spec.muscle;
    j["kind"] = "muscle";
    j["dims"] = dims_json(m.dims);
    j["spacing_mm"] = spacing_json(m.spacing);
    j["population_size"] = m.population_size;
    j["start_z"] = m.start_z;
    j["end_z"] = m.end_z;
    j["insertion_jitter"] = m.insertion_jitter;
    j["max_radii"] = m.max_radii;
    j["radius_jitter"] = m.radius_jitter;
    j["end_radius_fraction"] = m.end_radius_fraction;
    j["peak_position"] = m.peak_position;
    j["peak_jitter"] = m.peak_jitter;
    j["center_jitter"] = m.center_jitter;
    j["drift"] = m.drift;
    if (spec.shift) {
      j["domain_shift"] = Json{{"radius_scale", spec.shift->radius_scale},
                               {"extra_center_jitter", spec.shift->extra_center_jitter},
                               {"boundary_noise", spec.shift->boundary_noise}};
    } else {
      j["domain_shift"] = nullptr;
    }
  }
  Json splits = Json::object();
  for (const auto& [name, count] : spec.splits) splits[name] = count;
  j["splits"] = std::move(splits);
  return j;
}

PopulationSpec population_spec_from_json(const Json& json) {
  PopulationSpec spec;
  Reader r(json, "phantom spec");
  std::string kind = "organs";
  r.read("kind", kind);
  if (kind == "organs") {
    spec.kind = PopulationSpec::Kind::organs;
    auto& s = spec.organs;
    r.read("dims", s.dims);
    r.read("spacing_mm", s.spacing);
    r.read("population_size", s.population_size);
    r.read("global_scale_jitter", s.global_scale_jitter);
    r.read("global_shift_jitter", s.global_shift_jitter);
    if (const Json* organs = r.take("organs")) {
      if (!organs->is_array()) throw ConfigError("phantom spec: 'organs' must be an array");
      s.organs.clear();
      for (std::size_t i = 0; i < organs->size(); ++i) {
        OrganSpec o;
        Reader orr((*organs)[i], "phantom spec organ " + std::to_string(i));
        orr.read("name", o.name);
        orr.read("class_id", o.class_id);
        orr.read("center", o.center);
        orr.read("radii", o.radii);
        orr.read("exponent", o.exponent);
        orr.read("center_jitter", o.center_jitter);
        orr.read("radius_jitter", o.radius_jitter);
        orr.finish();
        s.organs.push_back(std::move(o));
      }
    } else {
      s.organs = default_organ_spec().organs;
    }
  } else if (kind == "muscle") {
    spec.kind = PopulationSpec::Kind::muscle;
    auto& m = spec.muscle;
    r.read("dims", m.dims);
    r.read("spacing_mm", m.spacing);
    r.read("population_size", m.population_size);
    r.read("start_z", m.start_z);
    r.read("end_z", m.end_z);
    r.read("insertion_jitter", m.insertion_jitter);
    r.read("max_radii", m.max_radii);
    r.read("radius_jitter", m.radius_jitter);
    r.read("end_radius_fraction", m.end_radius_fraction);
    r.read("peak_position", m.peak_position);
    r.read("peak_jitter", m.peak_jitter);
    r.read("center_jitter", m.center_jitter);
    r.read("drift", m.drift);
    if (const Json* shift = r.take("domain_shift"); shift && !shift->is_null()) {
      DomainShiftSpec d;
      Reader sr(*shift, "phantom spec domain_shift");
      sr.read("radius_scale", d.radius_scale);
      sr.read("extra_center_jitter", d.extra_center_jitter);
      sr.read("boundary_noise", d.boundary_noise);
      sr.finish();
      spec.shift = d;
    }
  } else {
    throw ConfigError("phantom spec: 'kind' must be \"organs\" or \"muscle\", got \"" + kind + "\"");
  }
  if (const Json* splits = r.take("splits")) {
    if (!splits->is_object()) throw ConfigError("phantom spec: 'splits' must be an object of name -> count");
    for (const auto& [name, count] : splits->items()) {
      if (!count.is_number_integer()) throw ConfigError("phantom spec: split '" + name + "' must be an integer");
      spec.splits.emplace_back(name, count.get<int>());
    }
  }
  r.finish();
  validate_as_config(spec, "phantom spec");
  return spec;
}

PopulationSpec default_organ_population() {
  PopulationSpec spec;
  spec.kind = PopulationSpec::Kind::organs;
  spec.organs = default_organ_spec();
  spec.splits = {{"train", 8}, {"validation", 2}, {"test", 10}};
  return spec;
}

PopulationSpec default_muscle_population() {
  PopulationSpec spec;
  spec.kind = PopulationSpec::Kind::muscle;
  spec.muscle.population_size = 12;
  spec.splits = {{"train", 12}};
  return spec;
}

PopulationSpec default_shifted_muscle_population() {
  PopulationSpec spec;
  spec.kind = PopulationSpec::Kind::muscle;
  spec.muscle.population_size = 13;
  spec.shift = DomainShiftSpec{};
  spec.splits = {{"adaptation", 3}, {"test", 10}};
  return spec;
}

}  // namespace shapeprior
