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

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "shapeprior/shapeprior.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 2 command-line usage, 10 + sp_status for library
// failures.
constexpr int kUsageExit = 2;

struct CliFailure {
  sp_status status;
  std::string message;
};

void check(sp_status s) {
  if (s != SP_OK) throw CliFailure{s, sp_last_error()};
}

[[noreturn]] void usage_failure(const std::string& message) { throw CliFailure{SP_ERR_INVALID_ARGUMENT, message}; }

struct StringDeleter {
  void operator()(char* s) const { sp_string_free(s); }
};
struct VolumeDeleter {
  void operator()(sp_volume* v) const { sp_volume_free(v); }
};
struct ModelDeleter {
  void operator()(sp_model* m) const { sp_model_free(m); }
};
struct PlanDeleter {
  void operator()(sp_plan* p) const { sp_plan_free(p); }
};
using Volume = std::unique_ptr<sp_volume, VolumeDeleter>;
using Model = std::unique_ptr<sp_model, ModelDeleter>;
using Plan = std::unique_ptr<sp_plan, PlanDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, StringDeleter> owned(s);
  return s ? std::string(s) : std::string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{SP_ERR_IO, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliFailure{SP_ERR_IO, "cannot write '" + path.string() + "'"};
  out << text;
}

Json parse(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw CliFailure{SP_ERR_CONFIG, what + ": not valid JSON"};
  return j;
}

Volume read_volume(const std::string& path) {
  sp_volume* v = nullptr;
  check(sp_volume_read(path.c_str(), &v));
  return Volume(v);
}

Model read_model(const std::string& path) {
  sp_model* m = nullptr;
  check(sp_model_read(path.c_str(), &m));
  return Model(m);
}

Plan read_plan(const std::string& path) {
  sp_plan* p = nullptr;
  check(sp_plan_read(path.c_str(), &p));
  return Plan(p);
}

std::vector<fs::path> list_volumes(const std::string& dir) {
  if (!fs::is_directory(dir)) throw CliFailure{SP_ERR_IO, "'" + dir + "' is not a directory"};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".segv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw CliFailure{SP_ERR_IO, "no .segv files in '" + dir + "'"};
  return out;
}

std::vector<Volume> read_volumes(const std::vector<fs::path>& paths) {
  std::vector<Volume> out;
  for (const auto& p : paths) out.push_back(read_volume(p.string()));
  return out;
}

std::vector<const sp_volume*> raw(const std::vector<Volume>& v) {
  std::vector<const sp_volume*> out;
  for (const auto& x : v) out.push_back(x.get());
  return out;
}

std::string config_text(const std::string& path) { return path.empty() ? std::string() : read_file(path); }

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

Json base_manifest(const std::string& command, int threads, bool deterministic) {
  return Json{{"tool", "shapeprior"},
              {"version", sp_version()},
              {"command", command},
              {"threads", threads},
              {"deterministic", deterministic}};
}

void log_line(const char* message, void*) { std::cerr << message << '\n'; }

// Runs fn(i) for i < n on up to `threads` workers; the first failure by index
// is rethrown.
template <typename Fn>
void run_parallel(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::unique_ptr<CliFailure>> failures(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const CliFailure& f) {
        failures[i] = std::make_unique<CliFailure>(f);
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) throw *f;
  }
}

struct Globals {
  int threads = 1;
  bool deterministic = false;
};

// ---------------------------------------------------------------------------

struct PhantomArgs {
  std::string spec;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
};

void run_phantom(const PhantomArgs& a, const Globals&) {
  std::string spec;
  if (!a.spec.empty()) {
    spec = read_file(a.spec);
  } else {
    char* s = nullptr;
    check(sp_phantom_default_spec(a.preset.c_str(), &s));
    spec = take(s);
  }
  char* manifest = nullptr;
  check(sp_phantom_generate(spec.c_str(), a.seed, a.out.c_str(), &manifest));
  const Json m = parse(take(manifest), "population manifest");
  std::cout << "wrote " << m["subjects"].size() << " subjects to " << a.out << '\n';
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string history;
  int log_every = 100;
};

void run_train(const TrainArgs& a, const Globals& g) {
  const auto paths = list_volumes(a.data);
  const auto volumes = read_volumes(paths);
  std::vector<std::string> ids;
  for (const auto& p : paths) ids.push_back(p.stem().string());
  std::vector<const char*> id_ptrs;
  for (const auto& s : ids) id_ptrs.push_back(s.c_str());

  Json config = a.config.empty() ? Json::object() : parse(read_file(a.config), a.config);
  if (!config.is_object()) throw CliFailure{SP_ERR_CONFIG, a.config + ": expected a JSON object"};
  if (g.deterministic) config["deterministic"] = true;
  const std::string config_json = config.dump();

  struct Progress {
    int every;
  } progress{a.log_every};
  auto on_epoch = [](int epoch, double objective, double dice, double ce, void* user) {
    const auto* p = static_cast<Progress*>(user);
    if (p->every > 0 && (epoch + 1) % p->every == 0) {
      std::fprintf(stderr, "epoch %d objective %.6f dice %.6f ce %.6f\n", epoch + 1, objective, dice, ce);
    }
  };
  const auto vol_ptrs = raw(volumes);
  sp_model* m = nullptr;
  check(sp_train(vol_ptrs.data(), id_ptrs.data(), vol_ptrs.size(), config_json.c_str(), on_epoch, &progress, &m));
  Model model(m);
  check(sp_model_write(model.get(), a.out.c_str()));

  char* info = nullptr;
  check(sp_model_info(model.get(), &info));
  Json manifest = base_manifest("train", g.threads, g.deterministic);
  manifest["data"] = a.data;
  manifest["files"] = ids;
  manifest["model"] = parse(take(info), "model info");
  write_file(manifest_path(a.out), manifest.dump(2) + "\n");
  if (!a.history.empty()) {
    char* csv = nullptr;
    check(sp_model_history_csv(model.get(), &csv));
    write_file(a.history, take(csv));
  }
  std::cout << "wrote checkpoint " << a.out << '\n';
}

struct PlanArgs {
  std::string strategy;
  std::string ckpt;
  std::string data;
  std::string infer_config;
  std::string out;
  int max_slices = 0;
  int nz = 0;
};

void run_plan(const PlanArgs& a, const Globals& g) {
  Json manifest = base_manifest("plan", g.threads, g.deterministic);
  manifest["strategy"] = a.strategy;
  manifest["max_slices"] = a.max_slices;
  sp_plan* p = nullptr;
  if (a.strategy == "equidistant") {
    int nz = a.nz;
    if (nz <= 0) {
      if (a.data.empty()) usage_failure("equidistant plans need --nz or --data");
      const auto first = fs::is_directory(a.data) ? list_volumes(a.data).front() : fs::path(a.data);
      int dims[3];
      check(sp_volume_info(read_volume(first.string()).get(), dims, nullptr, nullptr));
      nz = dims[2];
      manifest["data"] = a.data;
    }
    manifest["nz"] = nz;
    check(sp_plan_equidistant(a.max_slices, nz, &p));
  } else {
    if (a.ckpt.empty() || a.data.empty()) usage_failure(a.strategy + " plans need --ckpt and --data");
    const auto model = read_model(a.ckpt);
    const auto paths = list_volumes(a.data);
    const auto volumes = read_volumes(paths);
    const auto ptrs = raw(volumes);
    const std::string cfg = config_text(a.infer_config);
    auto build = a.strategy == "uc1" ? sp_plan_uc1 : sp_plan_uc2;
    check(build(model.get(), ptrs.data(), ptrs.size(), a.max_slices, cfg.c_str(), g.threads, log_line, nullptr, &p));
    manifest["ckpt"] = a.ckpt;
    manifest["data"] = a.data;
    manifest["infer_config"] = cfg.empty() ? Json::object() : parse(cfg, a.infer_config);
  }
  Plan plan(p);
  const std::string provenance = manifest.dump();
  check(sp_plan_set_provenance(plan.get(), provenance.c_str()));
  check(sp_plan_write(plan.get(), a.out.c_str()));
  char* info = nullptr;
  check(sp_plan_info(plan.get(), &info));
  const Json plan_info = parse(take(info), "plan info");
  manifest["plan_events"] = plan_info["events"];
  write_file(manifest_path(a.out), manifest.dump(2) + "\n");
  char* json = nullptr;
  check(sp_plan_to_json(plan.get(), &json));
  std::cout << take(json) << '\n';
}

struct InferArgs {
  std::string ckpt;
  std::string plan;
  std::string gt;
  std::string out;
  std::string infer_config;
  std::string probabilities;
  bool slices_from_gt = false;
  int first_k = 0;
};

void run_infer(const InferArgs& a, const Globals& g) {
  if (!a.slices_from_gt) usage_failure("annotations come from the ground truth only: pass --slices-from-gt");
  const auto model = read_model(a.ckpt);
  Plan plan = read_plan(a.plan);
  if (a.first_k > 0) {
    sp_plan* p = nullptr;
    check(sp_plan_prefix(plan.get(), static_cast<size_t>(a.first_k), &p));
    plan.reset(p);
  }
  const std::string cfg = config_text(a.infer_config);

  const bool batch = fs::is_directory(a.gt);
  std::vector<fs::path> inputs = batch ? list_volumes(a.gt) : std::vector<fs::path>{a.gt};
  if (batch && !a.probabilities.empty()) fs::create_directories(a.probabilities);
  std::vector<Json> fits(inputs.size());
  run_parallel(inputs.size(), g.threads, [&](std::size_t i) {
    const auto gt = read_volume(inputs[i].string());
    const fs::path out = batch ? fs::path(a.out) / inputs[i].filename() : fs::path(a.out);
    std::string prob;
    if (!a.probabilities.empty()) {
      prob = batch ? (fs::path(a.probabilities) / (inputs[i].stem().string() + ".sppg")).string() : a.probabilities;
    }
    sp_volume* pred = nullptr;
    char* fit = nullptr;
    check(sp_infer_from_gt(model.get(), plan.get(), gt.get(), cfg.c_str(), prob.c_str(), &pred, &fit));
    Volume owned(pred);
    fits[i] = parse(take(fit), "fit");
    check(sp_volume_write(owned.get(), out.string().c_str()));
  });

  Json manifest = base_manifest("infer", g.threads, g.deterministic);
  manifest["ckpt"] = a.ckpt;
  manifest["plan"] = a.plan;
  manifest["first_k"] = a.first_k;
  manifest["gt"] = a.gt;
  char* plan_json = nullptr;
  check(sp_plan_to_json(plan.get(), &plan_json));
  manifest["plan_specifiers"] = parse(take(plan_json), "plan");
  Json per_subject = Json::object();
  for (std::size_t i = 0; i < inputs.size(); ++i) per_subject[inputs[i].stem().string()] = fits[i];
  manifest["fits"] = std::move(per_subject);
  write_file(batch ? fs::path(a.out) / "manifest.json" : manifest_path(a.out), manifest.dump(2) + "\n");
  std::cout << "inferred " << inputs.size() << " volume(s)\n";
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
  std::string strategy = "unspecified";
  int n_slices = 0;
  bool append = false;
};

void run_eval(const EvalArgs& a, const Globals& g) {
  const auto pred_paths = list_volumes(a.pred);
  std::vector<Volume> preds, gts;
  std::vector<std::string> ids;
  for (const auto& p : pred_paths) {
    const fs::path gt_path = fs::path(a.gt) / p.filename();
    if (!fs::exists(gt_path)) throw CliFailure{SP_ERR_IO, "no ground truth for '" + p.filename().string() + "' in " + a.gt};
    preds.push_back(read_volume(p.string()));
    gts.push_back(read_volume(gt_path.string()));
    ids.push_back(p.stem().string());
  }
  std::vector<const char*> id_ptrs;
  for (const auto& s : ids) id_ptrs.push_back(s.c_str());
  const auto pp = raw(preds);
  const auto gp = raw(gts);
  const bool header = !(a.append && fs::exists(a.out) && fs::file_size(a.out) > 0);
  char* csv = nullptr;
  check(sp_evaluate(pp.data(), gp.data(), id_ptrs.data(), pp.size(), a.strategy.c_str(), a.n_slices, g.threads,
                    header ? 1 : 0, &csv));
  const std::string rows = take(csv);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  std::ofstream out(a.out, std::ios::binary | (a.append ? std::ios::app : std::ios::trunc));
  if (!out) throw CliFailure{SP_ERR_IO, "cannot write '" + a.out + "'"};
  out << rows;
  std::cout << "evaluated " << ids.size() << " subject(s)\n";
}

struct ReportArgs {
  std::string csv;
  std::string out;
};

void run_report(const ReportArgs& a, const Globals&) {
  char* summary = nullptr;
  check(sp_report(a.csv.c_str(), a.out.c_str(), &summary));
  std::cout << take(summary);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned shape-prior segmentation from sparse annotated slices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sp_version()));
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads for per-subject work")->check(CLI::Range(1, 256));
  app.add_flag("--deterministic", g.deterministic, "Force ordered reductions and record it in manifests");

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "Generate a phantom population");
  auto* spec_opt = phantom->add_option("--spec", pa.spec, "Population spec JSON")->check(CLI::ExistingFile);
  phantom->add_option("--preset", pa.preset, "Built-in spec instead of --spec")
      ->check(CLI::IsMember({"organs", "muscle", "muscle-shifted"}))
      ->excludes(spec_opt);
  phantom->add_option("--out", pa.out, "Output directory")->required();
  phantom->add_option("--seed", pa.seed, "Population seed")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Jointly train the network and per-shape latents");
  train->add_option("--data", ta.data, "Directory of training .segv volumes")->required()->check(CLI::ExistingDirectory);
  train->add_option("--config", ta.config, "Train config JSON")->check(CLI::ExistingFile);
  train->add_option("--out", ta.out, "Checkpoint path")->required();
  train->add_option("--history", ta.history, "Per-epoch history CSV");
  train->add_option("--log-every", ta.log_every, "Progress line every N epochs (0: quiet)")->check(CLI::NonNegativeNumber);

  PlanArgs pl;
  auto* plan = app.add_subcommand("plan", "Build a slice plan");
  plan->add_option("--strategy", pl.strategy, "Selection strategy")
      ->required()
      ->check(CLI::IsMember({"equidistant", "uc1", "uc2"}));
  plan->add_option("--ckpt", pl.ckpt, "Checkpoint (uc1, uc2)")->check(CLI::ExistingFile);
  plan->add_option("--data", pl.data, "Training set (uc1), adaptation set (uc2) or reference volume(s)")
      ->check(CLI::ExistingPath);
  plan->add_option("--max-slices", pl.max_slices, "Number of slices in the plan")->required()->check(CLI::PositiveNumber);
  plan->add_option("--nz", pl.nz, "Axial slice count for equidistant plans")->check(CLI::PositiveNumber);
  plan->add_option("--infer-config", pl.infer_config, "Infer config JSON (uc1, uc2)")->check(CLI::ExistingFile);
  plan->add_option("--out", pl.out, "Plan JSON path")->required();

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Fit a latent to oracle-annotated slices and predict the volume");
  infer->add_option("--ckpt", ia.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  infer->add_option("--plan", ia.plan, "Plan JSON")->required()->check(CLI::ExistingFile);
  infer->add_option("--gt", ia.gt, "Ground-truth volume or directory")->required()->check(CLI::ExistingPath);
  infer->add_flag("--slices-from-gt", ia.slices_from_gt, "Annotate the plan's slices from the ground truth");
  infer->add_option("--first-k", ia.first_k, "Use only the first k specifiers of the plan")->check(CLI::PositiveNumber);
  infer->add_option("--infer-config", ia.infer_config, "Infer config JSON")->check(CLI::ExistingFile);
  infer->add_option("--probabilities", ia.probabilities, "Probability grid output (file, or directory in batch mode)");
  infer->add_option("--out", ia.out, "Predicted volume (file, or directory in batch mode)")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Compute DSC, ASD, max HD and volumetric error");
  eval->add_option("--pred", ea.pred, "Directory of predictions")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--gt", ea.gt, "Directory of ground truths (matched by file name)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--out", ea.out, "Report CSV")->required();
  eval->add_option("--strategy", ea.strategy, "Strategy label for the rows");
  eval->add_option("--n-slices", ea.n_slices, "Slice count label for the rows")->check(CLI::NonNegativeNumber);
  eval->add_flag("--append", ea.append, "Append rows to an existing report");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Summarize a report CSV into tables");
  report->add_option("--csv", ra.csv, "Report CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--out", ra.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return kUsageExit;
  }

  try {
    if (*phantom) {
      if (pa.spec.empty() && pa.preset.empty()) usage_failure("phantom needs --spec or --preset");
      run_phantom(pa, g);
    } else if (*train) {
      run_train(ta, g);
    } else if (*plan) {
      run_plan(pl, g);
    } else if (*infer) {
      run_infer(ia, g);
    } else if (*eval) {
      run_eval(ea, g);
    } else if (*report) {
      run_report(ra, g);
    }
  } catch (const CliFailure& f) {
    std::cerr << "error: " << sp_status_name(f.status) << ": " << one_line(f.message) << '\n';
    return 10 + static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << sp_status_name(SP_ERR_INTERNAL) << ": " << one_line(e.what()) << '\n';
    return 10 + static_cast<int>(SP_ERR_INTERNAL);
  }
  return 0;
}
