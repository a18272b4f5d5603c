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
#include <numeric>
#include <random>
#include <set>

#include "shapeprior/error.hpp"
#include "shapeprior/inference.hpp"
#include "shapeprior/metrics.hpp"
#include "shapeprior/phantoms.hpp"
#include "shapeprior/plan.hpp"
#include "shapeprior/selection.hpp"
#include "shapeprior/trainer.hpp"
#include "test_support.hpp"

namespace sp = shapeprior;

namespace {

std::vector<int> indices(const sp::SlicePlan& p) {
  std::vector<int> out;
  for (const auto& s : p.slices) out.push_back(static_cast<int>(s.value));
  return out;
}

sp::LabelVolume slab(int nz, int first, int last, int class_id = 1, int n_class = 2) {
  sp::LabelVolume v({3, 3, nz}, {}, n_class);
  sp::testing::fill_box(v, {0, 0, first}, {2, 2, last}, class_id);
  return v;
}

sp::ErrorMap map_from_scores(const std::vector<double>& scores) {
  sp::ErrorMap m;
  m.dims = {2, 1, static_cast<int>(scores.size())};
  for (double s : scores) {
    m.values.push_back(s);
    m.values.push_back(s);
  }
  return m;
}

std::vector<std::pair<int, int>> full_spans() { return {{0, 100}, {0, 100}, {0, 100}}; }

sp::ErrorCurve peaked_curve(std::initializer_list<std::pair<int, double>> peaks) {
  sp::ErrorCurve c;
  for (auto [p, h] : peaks) c.values[static_cast<std::size_t>(p)] = h;
  return c;
}

bool is_distal(double p) { return p < 100.0 / 3.0; }
bool is_proximal(double p) { return p > 200.0 / 3.0; }

}  // namespace

TEST(Equidistant, Examples) {
  EXPECT_EQ(indices(sp::equidistant_plan(1, 11)), (std::vector<int>{5}));
  EXPECT_EQ(indices(sp::equidistant_plan(2, 10)), (std::vector<int>{2, 7}));
  std::vector<int> all(13);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(indices(sp::equidistant_plan(13, 13)), all);
  EXPECT_EQ(sp::equidistant_plan(3, 30).strategy, "equidistant");
}

TEST(Equidistant, TooManySlicesIsStructural) {
  EXPECT_THROW(sp::equidistant_plan(11, 10), sp::StructuralError);
  EXPECT_THROW(sp::equidistant_plan(0, 10), sp::StructuralError);
}

TEST(Equidistant, StrictlyIncreasingWithinRange) {
  for (int nz = 1; nz <= 64; ++nz) {
    for (int k = 1; k <= nz; ++k) {
      const auto idx = indices(sp::equidistant_plan(k, nz));
      ASSERT_EQ(static_cast<int>(idx.size()), k);
      for (std::size_t j = 0; j < idx.size(); ++j) {
        EXPECT_GE(idx[j], 0);
        EXPECT_LT(idx[j], nz);
        if (j > 0) {
          EXPECT_LT(idx[j - 1], idx[j]);
        }
        EXPECT_EQ(idx[j], static_cast<int>((2 * j + 1) * nz / (2 * k)));
      }
    }
  }
}

TEST(Uc1MinimalPlan, SingleOrganMidpoint) {
  const std::vector<sp::LabelVolume> set{slab(30, 10, 20), slab(30, 10, 20)};
  EXPECT_EQ(indices(sp::uc1_minimal_plan(set)), (std::vector<int>{15}));
}

TEST(Uc1MinimalPlan, IdenticalMidpointsCollapse) {
  sp::LabelVolume v({4, 4, 30}, {}, 3);
  sp::testing::fill_box(v, {0, 0, 10}, {0, 0, 20}, 1);
  sp::testing::fill_box(v, {3, 3, 12}, {3, 3, 18}, 2);
  const std::vector<sp::LabelVolume> set{v};
  const auto plan = sp::uc1_minimal_plan(set);
  EXPECT_EQ(indices(plan), (std::vector<int>{15}));
  ASSERT_EQ(plan.events.size(), 1u);
  EXPECT_EQ(plan.events[0].kind, "duplicate_collapsed");
}

TEST(Uc1MinimalPlan, MidpointsAveragedOverSubjects) {
  const std::vector<sp::LabelVolume> set{slab(30, 10, 20), slab(30, 12, 26)};
  EXPECT_EQ(indices(sp::uc1_minimal_plan(set)), (std::vector<int>{17}));
}

TEST(Uc1MinimalPlan, HalfMidpointRoundsDown) {
  const std::vector<sp::LabelVolume> set{slab(30, 10, 20), slab(30, 10, 21)};
  EXPECT_EQ(indices(sp::uc1_minimal_plan(set)), (std::vector<int>{15}));
}

TEST(Uc1MinimalPlan, AbsentClassSkippedWithEvent) {
  const std::vector<sp::LabelVolume> set{slab(30, 4, 8, 1, 3)};
  const auto plan = sp::uc1_minimal_plan(set);
  EXPECT_EQ(indices(plan), (std::vector<int>{6}));
  ASSERT_EQ(plan.events.size(), 1u);
  EXPECT_EQ(plan.events[0].kind, "class_skipped");
}

TEST(ErrorMap, PerfectPredictionsGiveZeroMap) {
  const std::vector<sp::LabelVolume> gts{slab(8, 2, 5), slab(8, 1, 3)};
  const auto m = sp::error_map_from_predictions(gts, gts);
  EXPECT_TRUE(std::all_of(m.values.begin(), m.values.end(), [](double x) { return x == 0.0; }));
}

TEST(ErrorMap, OneWrongSliceInOneOfTwoSubjects) {
  const std::vector<sp::LabelVolume> gts{slab(8, 2, 5), slab(8, 1, 3)};
  std::vector<sp::LabelVolume> preds = gts;
  // Subject 1 wrong on every voxel of slice 6 only.
  sp::testing::fill_box(preds[1], {0, 0, 6}, {2, 2, 6}, 1);
  const auto m = sp::error_map_from_predictions(preds, gts);
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(m.at(i, j, k), k == 6 ? 0.5 : 0.0);
}

TEST(ErrorMap, ValuesInUnitInterval) {
  std::mt19937_64 rng(3);
  std::vector<sp::LabelVolume> preds, gts;
  for (int s = 0; s < 4; ++s) {
    std::vector<std::uint8_t> a(5 * 4 * 3), b(5 * 4 * 3);
    for (auto& x : a) x = static_cast<std::uint8_t>(rng() % 3);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() % 3);
    preds.emplace_back(sp::Dims{5, 4, 3}, sp::Spacing{}, 3, a);
    gts.emplace_back(sp::Dims{5, 4, 3}, sp::Spacing{}, 3, b);
  }
  for (double x : sp::error_map_from_predictions(preds, gts).values) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Uc1SelectNext, ArgmaxTieBreakAndExclusion) {
  sp::SlicePlan none;
  EXPECT_EQ(sp::uc1_select_next(map_from_scores({0.1, 0.9, 0.3}), none), sp::SliceSpecifier::absolute(1));
  EXPECT_EQ(sp::uc1_select_next(map_from_scores({0.5, 0.5, 0.2}), none), sp::SliceSpecifier::absolute(0));
  sp::SlicePlan one;
  one.append(sp::SliceSpecifier::absolute(1));
  EXPECT_EQ(sp::uc1_select_next(map_from_scores({0.1, 0.9, 0.3}), one), sp::SliceSpecifier::absolute(2));
}

TEST(Uc1SelectNext, SliceScoreIsMeanOverSlice) {
  sp::ErrorMap m;
  m.dims = {2, 1, 2};
  m.values = {1.0, 0.0, 0.6, 0.6};
  EXPECT_EQ(m.slice_scores(), (std::vector<double>{0.5, 0.6}));
  EXPECT_EQ(sp::uc1_select_next(m, {}), sp::SliceSpecifier::absolute(1));
}

TEST(Uc1SelectNext, EnumeratesAllSlicesThenFails) {
  const auto m = map_from_scores({0.2, 0.1, 0.7, 0.7, 0.0, 0.3});
  sp::SlicePlan plan;
  for (int n = 0; n < 6; ++n) {
    const auto s = sp::uc1_select_next(m, plan);
    EXPECT_FALSE(plan.contains(s));
    plan.append(s);
  }
  EXPECT_EQ(indices(plan), (std::vector<int>{2, 3, 5, 0, 1, 4}));
  EXPECT_THROW(sp::uc1_select_next(m, plan), sp::StructuralError);
}

TEST(Uc1ExtendPlan, MaxEqualToMinimalReturnsItUnchanged) {
  sp::SlicePlan minimal;
  minimal.append(sp::SliceSpecifier::absolute(4));
  minimal.append(sp::SliceSpecifier::absolute(9));
  int calls = 0;
  const auto plan = sp::uc1_extend_plan(minimal, 2, [&](const sp::SlicePlan&) {
    ++calls;
    return map_from_scores(std::vector<double>(12, 0.0));
  });
  EXPECT_EQ(indices(plan), (std::vector<int>{4, 9}));
  EXPECT_EQ(calls, 0);
}

TEST(Uc1ExtendPlan, AppendsDistinctSlicesInSelectionOrder) {
  sp::SlicePlan minimal;
  minimal.append(sp::SliceSpecifier::absolute(5));
  std::vector<int> seen_sizes;
  const auto plan = sp::uc1_extend_plan(minimal, 5, [&](const sp::SlicePlan& current) {
    seen_sizes.push_back(static_cast<int>(current.size()));
    // The error is highest next to the most recent pick.
    std::vector<double> scores(12, 0.1);
    const int last = static_cast<int>(current.slices.back().value);
    if (last + 1 < 12) scores[static_cast<std::size_t>(last + 1)] = 1.0;
    return map_from_scores(scores);
  });
  EXPECT_EQ(indices(plan), (std::vector<int>{5, 6, 7, 8, 9}));
  EXPECT_EQ(seen_sizes, (std::vector<int>{1, 2, 3, 4}));
}

TEST(NormalizeLength, Examples) {
  const auto v = slab(60, 10, 50);
  const auto span = sp::normalize_length(v);
  EXPECT_EQ(span, (std::pair<int, int>{10, 50}));
  EXPECT_EQ(sp::percent_to_index(0, span), 10);
  EXPECT_EQ(sp::percent_to_index(100, span), 50);
  EXPECT_EQ(sp::percent_to_index(50, span), 30);
  EXPECT_EQ(sp::percent_to_index(37, {0, 100}), 37);
  const auto single = sp::normalize_length(slab(20, 7, 7));
  for (double p : {0.0, 13.0, 50.0, 100.0}) EXPECT_EQ(sp::percent_to_index(p, single), 7);
}

TEST(NormalizeLength, EmptyForegroundIsStructural) {
  EXPECT_THROW(sp::normalize_length(sp::LabelVolume({2, 2, 4}, {}, 2)), sp::StructuralError);
}

TEST(ResolvePlan, Examples) {
  const auto v = slab(60, 10, 50);
  sp::SlicePlan abs;
  for (int i : {40, 3, 17}) abs.append(sp::SliceSpecifier::absolute(i));
  EXPECT_EQ(sp::resolve_plan(abs, v), (std::vector<int>{3, 17, 40}));
  sp::SlicePlan pct;
  for (double p : {0.0, 50.0, 100.0}) pct.append(sp::SliceSpecifier::percent(p));
  EXPECT_EQ(sp::resolve_plan(pct, v), (std::vector<int>{10, 30, 50}));
  sp::SlicePlan dup;
  dup.append(sp::SliceSpecifier::percent(50));
  dup.append(sp::SliceSpecifier::percent(49));
  EXPECT_EQ(sp::resolve_plan(dup, slab(60, 10, 20)), (std::vector<int>{15}));
  sp::SlicePlan bad;
  bad.append(sp::SliceSpecifier::absolute(60));
  EXPECT_THROW(sp::resolve_plan(bad, v), sp::StructuralError);
}

TEST(SlicePlan, AppendRejectsDuplicatesAndPrefixKeepsOrder) {
  sp::SlicePlan p;
  EXPECT_TRUE(p.append(sp::SliceSpecifier::percent(10)));
  EXPECT_FALSE(p.append(sp::SliceSpecifier::percent(10)));
  EXPECT_TRUE(p.append(sp::SliceSpecifier::absolute(10)));
  EXPECT_TRUE(p.append(sp::SliceSpecifier::percent(90)));
  EXPECT_EQ(p.size(), 3u);
  const auto q = p.prefix(2);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q.slices[1], sp::SliceSpecifier::absolute(10));
  EXPECT_THROW(sp::validate(sp::SliceSpecifier::percent(100.5)), sp::StructuralError);
  EXPECT_THROW(sp::validate(sp::SliceSpecifier::absolute(-1)), sp::StructuralError);
}

TEST(Uc2Curve, PerfectPredictionIsAllZero) {
  std::vector<sp::LabelVolume> gts{slab(40, 5, 30), slab(40, 8, 35)};
  const auto c = sp::uc2_error_curve(gts, gts);
  EXPECT_EQ(c.values.size(), 101u);
  for (double x : c.values) EXPECT_EQ(x, 0.0);
}

TEST(Uc2Curve, MinMaxOfConstantIsZero) {
  sp::ErrorCurve c;
  c.values.fill(0.4);
  for (double x : sp::min_max_normalize(c).values) EXPECT_EQ(x, 0.0);
  c.values[10] = 1.4;
  const auto n = sp::min_max_normalize(c);
  EXPECT_DOUBLE_EQ(n.values[10], 1.0);
  EXPECT_DOUBLE_EQ(n.values[11], 0.0);
}

TEST(Uc2Curve, DistalCorruptionPeaksInZoneOne) {
  std::vector<sp::LabelVolume> gts, preds;
  for (int s = 0; s < 3; ++s) {
    sp::LabelVolume gt({12, 12, 60}, {}, 2);
    sp::testing::fill_box(gt, {3, 3, 5 + s}, {8, 8, 50 + s}, 1);
    sp::LabelVolume pred = gt;
    // Enlarge the first slices of the object only.
    sp::testing::fill_box(pred, {0, 0, 5 + s}, {11, 11, 9 + s}, 1);
    gts.push_back(gt);
    preds.push_back(pred);
  }
  const auto curves = sp::uc2_metric_curves(preds, gts);
  const auto& c = curves.combined;
  const auto peak = std::max_element(c.values.begin(), c.values.end()) - c.values.begin();
  EXPECT_GE(peak, 0);
  EXPECT_LE(peak, 33);
  for (std::size_t p = 0; p < c.values.size(); ++p) {
    EXPECT_GE(c.values[p], 0.0);
    EXPECT_LE(c.values[p], 1.0);
    EXPECT_NEAR(c.values[p], (curves.hausdorff.values[p] + curves.volume.values[p]) / 2, 1e-15);
  }
}

TEST(Uc2Curve, AllEmptyGroundTruthIsStructural) {
  std::vector<sp::LabelVolume> gts{sp::LabelVolume({3, 3, 10}, {}, 2)};
  EXPECT_THROW(sp::uc2_error_curve(gts, gts), sp::StructuralError);
}

TEST(Uc2Plan, MinimalPlanAndMaxThree) {
  const auto m = sp::uc2_minimal_plan();
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.slices[0], sp::SliceSpecifier::percent(0));
  EXPECT_EQ(m.slices[1], sp::SliceSpecifier::percent(100));
  EXPECT_EQ(m.slices[2], sp::SliceSpecifier::percent(50));
  const auto spans = full_spans();
  const auto p = sp::uc2_extend_plan({}, spans, 3, [](const sp::SlicePlan&) -> sp::ErrorCurve {
    throw std::logic_error("no curve needed");
  });
  EXPECT_EQ(p.slices, m.slices);
}

TEST(Uc2Plan, ConstructedPeaksAtTenAndNinety) {
  const auto spans = full_spans();
  const auto curve = peaked_curve({{10, 1.0}, {90, 0.9}, {50, 0.95}});
  const auto p = sp::uc2_extend_plan({}, spans, 5, [&](const sp::SlicePlan&) { return curve; });
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p.slices[3], sp::SliceSpecifier::percent(10));
  EXPECT_EQ(p.slices[4], sp::SliceSpecifier::percent(90));
}

TEST(Uc2Plan, ZonesAlternateWithoutFallback) {
  const auto spans = full_spans();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  sp::ErrorCurve curve;
  for (auto& x : curve.values) x = u(rng);
  const auto p = sp::uc2_extend_plan({}, spans, 9, [&](const sp::SlicePlan&) { return curve; });
  ASSERT_EQ(p.size(), 9u);
  for (std::size_t n = 3; n < 9; ++n) {
    const double v = p.slices[n].value;
    if ((n + 1) % 2 == 0) {
      EXPECT_TRUE(is_distal(v)) << "position " << n + 1 << " at " << v;
    } else {
      EXPECT_TRUE(is_proximal(v)) << "position " << n + 1 << " at " << v;
    }
  }
  EXPECT_TRUE(p.events.empty());
}

TEST(Uc2Plan, TiesGoToLowerPercent) {
  sp::ErrorCurve flat;
  flat.values.fill(0.5);
  sp::SlicePlan plan = sp::uc2_minimal_plan();
  const auto spans = full_spans();
  const auto pick = sp::uc2_select_next(flat, plan, spans, sp::Zone::distal);
  EXPECT_EQ(pick.specifier, sp::SliceSpecifier::percent(5));
  EXPECT_EQ(pick.zone, sp::Zone::distal);
}

TEST(Uc2Plan, SpacingHeldInEveryVolume) {
  // Short spans shrink the percent-to-index scale differently per volume.
  const std::vector<std::pair<int, int>> spans{{0, 100}, {10, 40}, {3, 63}};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  sp::ErrorCurve curve;
  for (auto& x : curve.values) x = u(rng);
  const auto p = sp::uc2_extend_plan({}, spans, 8, [&](const sp::SlicePlan&) { return curve; });
  bool relaxed = false;
  for (const auto& e : p.events) relaxed |= e.kind == "spacing_relaxed";
  if (!relaxed) {
    for (const auto& span : spans) {
      std::vector<int> idx;
      for (const auto& s : p.slices) idx.push_back(sp::percent_to_index(s.value, span));
      for (std::size_t a = 3; a < idx.size(); ++a)
        for (std::size_t b = 0; b < a; ++b) EXPECT_GE(std::abs(idx[a] - idx[b]), sp::kMinSliceGap);
    }
  }
}

TEST(Uc2Plan, InfeasibleSpacingFallsBackThenRelaxes) {
  // On a 12-slice span only a few percents satisfy the gap.
  const std::vector<std::pair<int, int>> spans{{0, 11}, {0, 11}, {0, 11}};
  sp::ErrorCurve curve;
  curve.values.fill(0.1);
  const auto p = sp::uc2_extend_plan({}, spans, 6, [&](const sp::SlicePlan&) { return curve; });
  ASSERT_EQ(p.size(), 6u);
  std::set<std::string> kinds;
  for (const auto& e : p.events) kinds.insert(e.kind);
  EXPECT_TRUE(kinds.count("spacing_relaxed") == 1);
  std::set<double> values;
  for (const auto& s : p.slices) values.insert(s.value);
  EXPECT_EQ(values.size(), 6u);
}

TEST(Uc1Loop, FirstPickTargetsTheWorseOrgan) {
  sp::PhantomSpec spec;
  spec.dims = {24, 24, 24};
  spec.population_size = 4;
  // Two organs of similar size; the second varies far more across subjects.
  spec.organs.push_back({"steady", 1, {0.0, 0.0, -0.45}, {0.3, 0.3, 0.3}, 2.0, {0.01, 0.01, 0.01}, 0.02});
  spec.organs.push_back({"variable", 2, {0.0, 0.0, 0.4}, {0.3, 0.3, 0.3}, 2.0, {0.05, 0.05, 0.05}, 0.15});
  const auto train = sp::generate_population(spec, 21);

  sp::TrainConfig cfg;
  cfg.epochs = 500;
  cfg.hidden_width = 32;
  cfg.voxel_batch_per_shape = 2048;
  cfg.seed = 2;
  const auto model = sp::train(train, sp::default_shape_ids(train.size()), cfg);

  sp::InferConfig icfg;
  icfg.epochs = 150;
  icfg.lr_latent = 1e-2;
  icfg.seed = 1;
  const auto minimal = sp::uc1_minimal_plan(train);
  const auto preds = sp::infer_all(model.params, train, minimal, icfg, 1);
  double dsc[3] = {0, 0, 0};
  for (std::size_t s = 0; s < train.size(); ++s)
    for (int c = 1; c <= 2; ++c) dsc[c] += sp::dsc(preds[s], train[s], c);
  const int worse = dsc[1] <= dsc[2] ? 1 : 2;

  const auto plan = sp::uc1_build_plan(model.params, train, static_cast<int>(minimal.size()) + 1, icfg);
  ASSERT_EQ(plan.size(), minimal.size() + 1);
  const int pick = static_cast<int>(plan.slices.back().value);
  int first = 1 << 20, last = -1;
  for (const auto& v : train)
    for (int k = 0; k < v.dims().nz; ++k)
      if (v.slice_count(k, worse) > 0) {
        first = std::min(first, k);
        last = std::max(last, k);
      }
  EXPECT_GE(pick, first) << "worse organ " << worse;
  EXPECT_LE(pick, last) << "worse organ " << worse;
}
