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

#include "shapeprior/shapeprior.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shapeprior/config.hpp"
#include "shapeprior/error.hpp"
#include "shapeprior/inference.hpp"
#include "shapeprior/io.hpp"
#include "shapeprior/metrics.hpp"
#include "shapeprior/pipeline.hpp"
#include "shapeprior/report.hpp"
#include "shapeprior/selection.hpp"
#include "shapeprior/trainer.hpp"

namespace sp = shapeprior;

struct sp_volume {
  sp::LabelVolume volume;
};

struct sp_model {
  sp::Checkpoint checkpoint;
  sp::TrainHistory history;
};

struct sp_plan {
  sp::SlicePlan plan;
};

namespace {

thread_local std::string g_last_error;

struct InvalidArgument : sp::Error {
  using sp::Error::Error;
};

sp_status fail(sp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes and the thread-local
// message.
template <typename Fn>
sp_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return SP_OK;
  } catch (const InvalidArgument& e) {
    return fail(SP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const sp::FormatError& e) {
    return fail(SP_ERR_FORMAT, e.what());
  } catch (const sp::StructuralError& e) {
    return fail(SP_ERR_STRUCTURAL, e.what());
  } catch (const sp::ConfigError& e) {
    return fail(SP_ERR_CONFIG, e.what());
  } catch (const sp::NumericError& e) {
    return fail(SP_ERR_NUMERIC, e.what());
  } catch (const sp::UsageError& e) {
    return fail(SP_ERR_USAGE, e.what());
  } catch (const sp::IoError& e) {
    return fail(SP_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SP_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SP_ERR_INTERNAL, "unknown exception");
  }
}

template <typename T>
void require(const T* p, const char* name) {
  if (p == nullptr) throw InvalidArgument(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

sp::Json parse_optional(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return sp::Json::object();
  return sp::parse_json(text, what);
}

sp::LossConfig training_loss(const sp::Checkpoint& ck) {
  const auto& m = ck.manifest;
  if (m.is_object() && m.contains("train_config") && m["train_config"].contains("loss")) {
    try {
      return sp::loss_config_from_json(m["train_config"]["loss"]);
    } catch (const sp::ConfigError&) {
      // fall back to defaults for foreign manifests
    }
  }
  return {};
}

std::vector<sp::LabelVolume> gather(const sp_volume* const* volumes, std::size_t count, const char* name) {
  if (count > 0) require(volumes, name);
  std::vector<sp::LabelVolume> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    require(volumes[i], name);
    out.push_back(volumes[i]->volume);
  }
  return out;
}

std::function<void(const std::string&)> logger(sp_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& m) { log(m.c_str(), user); };
}

}  // namespace

extern "C" {

const char* sp_version(void) { return sp::kLibraryVersion; }

const char* sp_status_name(sp_status status) {
  switch (status) {
    case SP_OK: return "ok";
    case SP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SP_ERR_IO: return "io_error";
    case SP_ERR_FORMAT: return "format_error";
    case SP_ERR_STRUCTURAL: return "structural_error";
    case SP_ERR_CONFIG: return "config_error";
    case SP_ERR_NUMERIC: return "numeric_error";
    case SP_ERR_USAGE: return "usage_error";
    case SP_ERR_INTERNAL: return "internal_error";
  }
  return "unknown_status";
}

const char* sp_last_error(void) { return g_last_error.c_str(); }

void sp_string_free(char* s) { std::free(s); }

// ---- volumes ---------------------------------------------------------------

sp_status sp_volume_create(const int dims[3], const double spacing_mm[3], int n_class, const uint8_t* labels,
                           sp_volume** out) {
  return guarded([&] {
    require(dims, "dims");
    require(spacing_mm, "spacing_mm");
    require(out, "out");
    const sp::Dims d{dims[0], dims[1], dims[2]};
    sp::validate_dims(d);
    std::vector<std::uint8_t> buf(d.voxel_count(), 0);
    if (labels) std::memcpy(buf.data(), labels, buf.size());
    *out = new sp_volume{sp::LabelVolume(d, {spacing_mm[0], spacing_mm[1], spacing_mm[2]}, n_class, std::move(buf))};
  });
}

sp_status sp_volume_read(const char* path, sp_volume** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sp_volume{sp::read_volume_file(path)};
  });
}

sp_status sp_volume_write(const sp_volume* volume, const char* path) {
  return guarded([&] {
    require(volume, "volume");
    require(path, "path");
    sp::write_volume_file(path, volume->volume);
  });
}

sp_status sp_volume_info(const sp_volume* volume, int dims[3], double spacing_mm[3], int* n_class) {
  return guarded([&] {
    require(volume, "volume");
    const auto& v = volume->volume;
    if (dims) {
      dims[0] = v.dims().nx;
      dims[1] = v.dims().ny;
      dims[2] = v.dims().nz;
    }
    if (spacing_mm) {
      spacing_mm[0] = v.spacing().sx;
      spacing_mm[1] = v.spacing().sy;
      spacing_mm[2] = v.spacing().sz;
    }
    if (n_class) *n_class = v.n_class();
  });
}

sp_status sp_volume_labels(const sp_volume* volume, const uint8_t** labels, size_t* count) {
  return guarded([&] {
    require(volume, "volume");
    require(labels, "labels");
    require(count, "count");
    *labels = volume->volume.labels().data();
    *count = volume->volume.labels().size();
  });
}

void sp_volume_free(sp_volume* volume) { delete volume; }

// ---- phantoms --------------------------------------------------------------

sp_status sp_phantom_default_spec(const char* name, char** spec_json) {
  return guarded([&] {
    require(name, "name");
    require(spec_json, "spec_json");
    const std::string n = name;
    sp::PopulationSpec spec;
    if (n == "organs") {
      spec = sp::default_organ_population();
    } else if (n == "muscle") {
      spec = sp::default_muscle_population();
    } else if (n == "muscle-shifted") {
      spec = sp::default_shifted_muscle_population();
    } else {
      throw InvalidArgument("unknown preset '" + n + "' (expected organs, muscle or muscle-shifted)");
    }
    *spec_json = dup_string(sp::to_json(spec).dump(2));
  });
}

sp_status sp_phantom_generate(const char* spec_json, uint64_t seed, const char* out_dir, char** manifest_json) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out_dir, "out_dir");
    const auto spec = sp::population_spec_from_json(sp::parse_json(spec_json, "phantom spec"));
    const auto manifest = sp::write_population(spec, seed, out_dir);
    set_string(manifest_json, manifest.dump(2));
  });
}

// ---- training ----------------------------------------------------------------

sp_status sp_train(const sp_volume* const* volumes, const char* const* shape_ids, size_t count, const char* config_json,
                   sp_epoch_fn on_epoch, void* user, sp_model** out) {
  return guarded([&] {
    require(out, "out");
    if (count == 0) throw InvalidArgument("training needs at least one volume");
    const auto data = gather(volumes, count, "volumes");
    std::vector<std::string> ids;
    if (shape_ids) {
      for (std::size_t i = 0; i < count; ++i) {
        require(shape_ids[i], "shape_ids[i]");
        ids.emplace_back(shape_ids[i]);
      }
    } else {
      ids = sp::default_shape_ids(count);
    }
    const auto config = sp::train_config_from_json(parse_optional(config_json, "train config"));
    sp::EpochCallback cb;
    if (on_epoch) {
      cb = [&](const sp::EpochRecord& r) { on_epoch(r.epoch, r.objective, r.dice, r.cross_entropy, user); };
    }
    auto result = sp::train(data, ids, config, cb);
    auto model = std::make_unique<sp_model>();
    model->checkpoint.manifest = sp::training_manifest(config, ids, result.history);
    model->checkpoint.params = std::move(result.params);
    model->checkpoint.latents = std::move(result.latents);
    model->history = std::move(result.history);
    *out = model.release();
  });
}

sp_status sp_model_read(const char* path, sp_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sp_model{sp::read_checkpoint_file(path), {}};
  });
}

sp_status sp_model_write(const sp_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    sp::write_checkpoint_file(path, model->checkpoint);
  });
}

sp_status sp_model_info(const sp_model* model, char** json) {
  return guarded([&] {
    require(model, "model");
    require(json, "json");
    const auto& a = model->checkpoint.params.arch;
    sp::Json info;
    info["descriptor"] = {{"n_class", a.n_class},
                          {"latent_dim", a.latent_dim},
                          {"n_layers", a.n_layers},
                          {"skip_layer", a.skip_layer},
                          {"hidden_width", a.hidden_width}};
    sp::Json ids = sp::Json::array();
    for (const auto& c : model->checkpoint.latents.codes()) ids.push_back(c.shape_id);
    info["latents"] = std::move(ids);
    info["manifest"] = model->checkpoint.manifest;
    info["parameter_checksum"] = sp::hex64(sp::parameter_checksum(model->checkpoint.params));
    *json = dup_string(info.dump(2));
  });
}

sp_status sp_model_history_csv(const sp_model* model, char** csv) {
  return guarded([&] {
    require(model, "model");
    require(csv, "csv");
    *csv = dup_string(sp::history_csv(model->history));
  });
}

void sp_model_free(sp_model* model) { delete model; }

// ---- plans -------------------------------------------------------------------

sp_status sp_plan_equidistant(int k, int nz, sp_plan** out) {
  return guarded([&] {
    require(out, "out");
    *out = new sp_plan{sp::equidistant_plan(k, nz)};
  });
}

sp_status sp_plan_uc1(const sp_model* model, const sp_volume* const* train_set, size_t count, int max_slices,
                      const char* infer_config_json, int threads, sp_log_fn log, void* user, sp_plan** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto data = gather(train_set, count, "train_set");
    for (const auto& v : data) sp::check_compatible(model->checkpoint.params.arch, v);
    const auto config =
        sp::infer_config_from_json(parse_optional(infer_config_json, "infer config"), training_loss(model->checkpoint));
    *out = new sp_plan{sp::uc1_build_plan(model->checkpoint.params, data, max_slices, config, {threads, logger(log, user)})};
  });
}

sp_status sp_plan_uc2(const sp_model* model, const sp_volume* const* adaptation_set, size_t count, int max_slices,
                      const char* infer_config_json, int threads, sp_log_fn log, void* user, sp_plan** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto data = gather(adaptation_set, count, "adaptation_set");
    for (const auto& v : data) sp::check_compatible(model->checkpoint.params.arch, v);
    const auto config =
        sp::infer_config_from_json(parse_optional(infer_config_json, "infer config"), training_loss(model->checkpoint));
    *out = new sp_plan{sp::uc2_build_plan(model->checkpoint.params, data, max_slices, config, {threads, logger(log, user)})};
  });
}

sp_status sp_plan_from_json(const char* json, sp_plan** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new sp_plan{sp::plan_from_json(sp::parse_json(json, "plan"))};
  });
}

sp_status sp_plan_to_json(const sp_plan* plan, char** json) {
  return guarded([&] {
    require(plan, "plan");
    require(json, "json");
    *json = dup_string(sp::plan_to_json(plan->plan).dump());
  });
}

sp_status sp_plan_read(const char* path, sp_plan** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sp_plan{sp::read_plan_file(path)};
  });
}

sp_status sp_plan_write(const sp_plan* plan, const char* path) {
  return guarded([&] {
    require(plan, "plan");
    require(path, "path");
    sp::write_plan_file(path, plan->plan);
  });
}

sp_status sp_plan_info(const sp_plan* plan, char** json) {
  return guarded([&] {
    require(plan, "plan");
    require(json, "json");
    sp::Json events = sp::Json::array();
    for (const auto& e : plan->plan.events) events.push_back({{"kind", e.kind}, {"detail", e.detail}});
    const sp::Json info{{"strategy", plan->plan.strategy},
                        {"provenance", plan->plan.provenance},
                        {"size", plan->plan.size()},
                        {"events", std::move(events)}};
    *json = dup_string(info.dump(2));
  });
}

sp_status sp_plan_set_provenance(sp_plan* plan, const char* provenance) {
  return guarded([&] {
    require(plan, "plan");
    require(provenance, "provenance");
    plan->plan.provenance = provenance;
  });
}

sp_status sp_plan_size(const sp_plan* plan, size_t* size) {
  return guarded([&] {
    require(plan, "plan");
    require(size, "size");
    *size = plan->plan.size();
  });
}

sp_status sp_plan_prefix(const sp_plan* plan, size_t k, sp_plan** out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    *out = new sp_plan{plan->plan.prefix(k)};
  });
}

sp_status sp_plan_resolve(const sp_plan* plan, const sp_volume* volume, int* indices, size_t capacity, size_t* count) {
  return guarded([&] {
    require(plan, "plan");
    require(volume, "volume");
    require(count, "count");
    const auto resolved = sp::resolve_plan(plan->plan, volume->volume);
    *count = resolved.size();
    if (resolved.size() > capacity) {
      throw InvalidArgument("capacity " + std::to_string(capacity) + " is below the " + std::to_string(resolved.size()) +
                            " resolved indices");
    }
    if (!resolved.empty()) {
      require(indices, "indices");
      std::copy(resolved.begin(), resolved.end(), indices);
    }
  });
}

void sp_plan_free(sp_plan* plan) { delete plan; }

// ---- inference -----------------------------------------------------------------

sp_status sp_infer_from_gt(const sp_model* model, const sp_plan* plan, const sp_volume* gt, const char* infer_config_json,
                           const char* probability_path, sp_volume** prediction, char** fit_json) {
  return guarded([&] {
    require(model, "model");
    require(plan, "plan");
    require(gt, "gt");
    require(prediction, "prediction");
    const auto& params = model->checkpoint.params;
    sp::check_compatible(params.arch, gt->volume);
    const auto config =
        sp::infer_config_from_json(parse_optional(infer_config_json, "infer config"), training_loss(model->checkpoint));
    const auto annotations = sp::oracle_annotate(gt->volume, plan->plan);
    auto result = sp::infer_volume(params, annotations, config);
    if (probability_path && *probability_path) {
      sp::write_probability_file(probability_path, result.probabilities, gt->volume.dims());
    }
    if (fit_json) {
      std::vector<int> slices;
      for (const auto& a : annotations.slices) slices.push_back(a.axial_index);
      const sp::Json fit{{"annotated_slices", slices},
                         {"initial_objective", result.fit.initial_objective},
                         {"final_objective", result.fit.final_objective},
                         {"restart", result.fit.restart},
                         {"infer_config", sp::to_json(config)}};
      *fit_json = dup_string(fit.dump(2));
    }
    *prediction = new sp_volume{std::move(result.labels)};
  });
}

// ---- evaluation ------------------------------------------------------------------

sp_status sp_evaluate(const sp_volume* const* predictions, const sp_volume* const* ground_truths,
                      const char* const* subject_ids, size_t count, const char* strategy, int n_slices, int threads,
                      int with_header, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    const auto preds = gather(predictions, count, "predictions");
    const auto gts = gather(ground_truths, count, "ground_truths");
    sp::EvaluationMeta meta;
    meta.strategy = strategy ? strategy : "";
    if (meta.strategy.find_first_of(",\n\r") != std::string::npos) throw InvalidArgument("strategy must not contain commas or newlines");
    meta.n_slices = n_slices;
    if (subject_ids) {
      for (std::size_t i = 0; i < count; ++i) {
        require(subject_ids[i], "subject_ids[i]");
        meta.subject_ids.emplace_back(subject_ids[i]);
      }
    }
    const auto report = sp::evaluate(preds, gts, meta, threads);
    std::ostringstream os;
    sp::write_report_csv(os, report, with_header != 0);
    *csv = dup_string(os.str());
  });
}

sp_status sp_report(const char* csv_path, const char* out_dir, char** summary) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(out_dir, "out_dir");
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw sp::IoError(std::string("cannot open '") + csv_path + "'");
    const auto report = sp::read_report_csv(in);
    sp::write_report_tables(report, out_dir);
    set_string(summary, sp::summary_csv(report));
  });
}

}  // extern "C"
