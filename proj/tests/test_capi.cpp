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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "shapeprior/shapeprior.h"

namespace fs = std::filesystem;

namespace {

// Owning wrapper around a C string returned by the library.
struct CString {
  char* p = nullptr;
  ~CString() { sp_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

fs::path temp_dir(const std::string& tag) {
  std::random_device rd;
  auto p = fs::temp_directory_path() / ("shapeprior_capi_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

sp_volume* ball(int n, double r, int label) {
  std::vector<uint8_t> labels(static_cast<std::size_t>(n) * n * n, 0);
  const double c = (n - 1) / 2.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double d2 = (i - c) * (i - c) + (j - c) * (j - c) + (k - c) * (k - c);
        if (d2 <= r * r) labels[(static_cast<std::size_t>(k) * n + j) * n + i] = static_cast<uint8_t>(label);
      }
  const int dims[3] = {n, n, n};
  const double spacing[3] = {1.0, 1.0, 1.0};
  sp_volume* v = nullptr;
  EXPECT_EQ(sp_volume_create(dims, spacing, 2, labels.data(), &v), SP_OK);
  return v;
}

constexpr const char* kTinyTrain =
    R"({"epochs": 4, "hidden_width": 8, "latent_dim": 4, "voxel_batch_per_shape": 64})";

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(sp_status_name(SP_OK), "ok");
  EXPECT_STREQ(sp_status_name(SP_ERR_FORMAT), "format_error");
  EXPECT_STREQ(sp_status_name(SP_ERR_CONFIG), "config_error");
  EXPECT_GT(std::strlen(sp_version()), 0u);
}

TEST(CApi, NullArgumentsAreReported) {
  sp_volume* v = nullptr;
  EXPECT_EQ(sp_volume_read(nullptr, &v), SP_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(sp_last_error()).find("path"), std::string::npos);
  EXPECT_EQ(sp_volume_info(nullptr, nullptr, nullptr, nullptr), SP_ERR_INVALID_ARGUMENT);
  sp_volume_free(nullptr);
  sp_model_free(nullptr);
  sp_plan_free(nullptr);
}

TEST(CApi, SuccessClearsLastError) {
  sp_plan* p = nullptr;
  EXPECT_EQ(sp_plan_equidistant(0, 10, &p), SP_ERR_STRUCTURAL);
  EXPECT_NE(std::string(sp_last_error()), "");
  EXPECT_EQ(sp_plan_equidistant(2, 10, &p), SP_OK);
  EXPECT_STREQ(sp_last_error(), "");
  sp_plan_free(p);
}

TEST(CApi, VolumeRoundTripAndErrors) {
  const auto dir = temp_dir("vol");
  sp_volume* v = ball(6, 2.0, 1);
  const auto path = (dir / "v.segv").string();
  ASSERT_EQ(sp_volume_write(v, path.c_str()), SP_OK);
  sp_volume* back = nullptr;
  ASSERT_EQ(sp_volume_read(path.c_str(), &back), SP_OK);
  const uint8_t* a = nullptr;
  const uint8_t* b = nullptr;
  size_t na = 0, nb = 0;
  ASSERT_EQ(sp_volume_labels(v, &a, &na), SP_OK);
  ASSERT_EQ(sp_volume_labels(back, &b, &nb), SP_OK);
  ASSERT_EQ(na, 216u);
  EXPECT_EQ(std::memcmp(a, b, na), 0);
  int dims[3];
  double spacing[3];
  int n_class = 0;
  ASSERT_EQ(sp_volume_info(back, dims, spacing, &n_class), SP_OK);
  EXPECT_EQ(dims[2], 6);
  EXPECT_EQ(n_class, 2);

  EXPECT_EQ(sp_volume_read((dir / "absent.segv").string().c_str(), &back), SP_ERR_IO);
  {
    std::FILE* f = std::fopen((dir / "bad.segv").string().c_str(), "wb");
    std::fputs("{\"magic\":\"NOPE\"}\n", f);
    std::fclose(f);
  }
  sp_volume* bad = nullptr;
  EXPECT_EQ(sp_volume_read((dir / "bad.segv").string().c_str(), &bad), SP_ERR_FORMAT);
  EXPECT_EQ(bad, nullptr);

  const int dims3[3] = {2, 2, 2};
  const uint8_t labels[8] = {0, 1, 2, 0, 0, 0, 0, 0};
  const double sp1[3] = {1, 1, 1};
  EXPECT_EQ(sp_volume_create(dims3, sp1, 2, labels, &bad), SP_ERR_STRUCTURAL);
  sp_volume_free(v);
  sp_volume_free(back);
  fs::remove_all(dir);
}

TEST(CApi, PlansFromJsonAndResolve) {
  sp_plan* p = nullptr;
  ASSERT_EQ(sp_plan_from_json(R"([{"kind":"percent","value":50},{"kind":"absolute","value":0}])", &p), SP_OK);
  size_t n = 0;
  ASSERT_EQ(sp_plan_size(p, &n), SP_OK);
  EXPECT_EQ(n, 2u);
  sp_volume* v = ball(9, 2.5, 1);
  int idx[4];
  size_t count = 0;
  EXPECT_EQ(sp_plan_resolve(p, v, idx, 1, &count), SP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(count, 2u);
  ASSERT_EQ(sp_plan_resolve(p, v, idx, 4, &count), SP_OK);
  ASSERT_EQ(count, 2u);
  EXPECT_EQ(idx[0], 0);
  EXPECT_EQ(idx[1], 4);
  CString json;
  ASSERT_EQ(sp_plan_to_json(p, &json.p), SP_OK);
  EXPECT_EQ(json.str(), R"([{"kind":"percent","value":50},{"kind":"absolute","value":0}])");
  sp_plan* prefix = nullptr;
  ASSERT_EQ(sp_plan_prefix(p, 1, &prefix), SP_OK);
  ASSERT_EQ(sp_plan_size(prefix, &n), SP_OK);
  EXPECT_EQ(n, 1u);
  sp_plan* bad = nullptr;
  EXPECT_EQ(sp_plan_from_json("[{\"kind\":\"x\"}]", &bad), SP_ERR_CONFIG);
  EXPECT_EQ(sp_plan_from_json("not json", &bad), SP_ERR_CONFIG);
  sp_plan_free(prefix);
  sp_plan_free(p);
  sp_volume_free(v);
}

TEST(CApi, EquidistantPlanInfo) {
  sp_plan* p = nullptr;
  ASSERT_EQ(sp_plan_equidistant(2, 10, &p), SP_OK);
  ASSERT_EQ(sp_plan_set_provenance(p, "unit"), SP_OK);
  CString info;
  ASSERT_EQ(sp_plan_info(p, &info.p), SP_OK);
  EXPECT_NE(info.str().find("\"provenance\": \"unit\""), std::string::npos);
  CString json;
  ASSERT_EQ(sp_plan_to_json(p, &json.p), SP_OK);
  EXPECT_EQ(json.str(), R"([{"kind":"absolute","value":2},{"kind":"absolute","value":7}])");
  sp_plan_free(p);
}

TEST(CApi, DefaultSpecsAndUnknownPreset) {
  CString spec;
  ASSERT_EQ(sp_phantom_default_spec("muscle-shifted", &spec.p), SP_OK);
  EXPECT_NE(spec.str().find("adaptation"), std::string::npos);
  char* none = nullptr;
  EXPECT_EQ(sp_phantom_default_spec("bones", &none), SP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(none, nullptr);
  CString manifest;
  EXPECT_EQ(sp_phantom_generate("{\"kind\":\"organs\",\"bogus\":1}", 1, "/tmp", &manifest.p), SP_ERR_CONFIG);
}

TEST(CApi, TrainInferEvaluateEndToEnd) {
  const auto dir = temp_dir("e2e");
  sp_volume* vols[2] = {ball(8, 2.0, 1), ball(8, 3.0, 1)};
  const char* ids[2] = {"a", "b"};
  int epochs_seen = 0;
  sp_epoch_fn cb = [](int, double, double, double, void* user) { ++*static_cast<int*>(user); };
  sp_model* model = nullptr;
  ASSERT_EQ(sp_train(vols, ids, 2, kTinyTrain, cb, &epochs_seen, &model), SP_OK) << sp_last_error();
  EXPECT_EQ(epochs_seen, 4);
  CString history;
  ASSERT_EQ(sp_model_history_csv(model, &history.p), SP_OK);
  const std::string h = history.str();
  EXPECT_EQ(std::count(h.begin(), h.end(), '\n'), 5);

  const auto ck = (dir / "m.ck").string();
  ASSERT_EQ(sp_model_write(model, ck.c_str()), SP_OK);
  sp_model* loaded = nullptr;
  ASSERT_EQ(sp_model_read(ck.c_str(), &loaded), SP_OK);
  CString info_a, info_b;
  ASSERT_EQ(sp_model_info(model, &info_a.p), SP_OK);
  ASSERT_EQ(sp_model_info(loaded, &info_b.p), SP_OK);
  EXPECT_EQ(info_a.str(), info_b.str());
  EXPECT_NE(info_a.str().find("\"latent_dim\": 4"), std::string::npos);

  sp_plan* plan = nullptr;
  ASSERT_EQ(sp_plan_equidistant(3, 8, &plan), SP_OK);
  sp_volume* pred = nullptr;
  CString fit;
  const auto prob = (dir / "p.sppg").string();
  ASSERT_EQ(sp_infer_from_gt(loaded, plan, vols[0], R"({"epochs": 3})", prob.c_str(), &pred, &fit.p), SP_OK)
      << sp_last_error();
  EXPECT_TRUE(fs::exists(prob));
  EXPECT_NE(fit.str().find("annotated_slices"), std::string::npos);

  CString csv;
  const sp_volume* preds[1] = {pred};
  const sp_volume* gts[1] = {vols[0]};
  const char* sid[1] = {"a"};
  ASSERT_EQ(sp_evaluate(preds, gts, sid, 1, "equidistant", 3, 1, 1, &csv.p), SP_OK);
  EXPECT_EQ(csv.str().rfind("subject_id,strategy,n_slices,class_id,dsc,asd_mm,hd_max_mm,vol_err_pct\n", 0), 0u);
  EXPECT_NE(csv.str().find("a,equidistant,3,1,"), std::string::npos);

  // A two-class model refuses a three-class volume.
  const int dims[3] = {8, 8, 8};
  const double spacing[3] = {1, 1, 1};
  sp_volume* three = nullptr;
  ASSERT_EQ(sp_volume_create(dims, spacing, 3, nullptr, &three), SP_OK);
  sp_volume* none = nullptr;
  EXPECT_EQ(sp_infer_from_gt(loaded, plan, three, nullptr, nullptr, &none, nullptr), SP_ERR_STRUCTURAL);
  EXPECT_NE(std::string(sp_last_error()).find("n_class"), std::string::npos);

  sp_model* bad = nullptr;
  EXPECT_EQ(sp_train(vols, ids, 2, R"({"epochs": -1})", nullptr, nullptr, &bad), SP_ERR_CONFIG);
  EXPECT_EQ(sp_train(vols, ids, 2, "{", nullptr, nullptr, &bad), SP_ERR_CONFIG);
  EXPECT_EQ(sp_train(vols, ids, 0, nullptr, nullptr, nullptr, &bad), SP_ERR_INVALID_ARGUMENT);

  sp_volume_free(three);
  sp_volume_free(pred);
  sp_plan_free(plan);
  sp_model_free(loaded);
  sp_model_free(model);
  for (auto* v : vols) sp_volume_free(v);
  fs::remove_all(dir);
}
