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

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "shapeprior/error.hpp"
#include "shapeprior/metrics.hpp"
#include "metric_oracle.hpp"
#include "test_support.hpp"

namespace sp = shapeprior;

namespace {

using sp::testing::oracle_asd;
using sp::testing::Point;
using sp::testing::oracle_dsc;
using sp::testing::oracle_hd;
using sp::testing::random_mask;

sp::LabelVolume points(sp::Dims d, std::initializer_list<sp::VoxelIndex> on) {
  sp::LabelVolume v(d, {}, 2);
  for (auto p : on) v.set(p.i, p.j, p.k, 1);
  return v;
}

}  // namespace

TEST(Dsc, Examples) {
  const sp::Dims d{2, 2, 2};
  const auto a = points(d, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const auto b = points(d, {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {1, 0, 1}});
  const auto c = points(d, {{0, 0, 1}, {1, 1, 1}});
  EXPECT_DOUBLE_EQ(sp::dsc(a, a, 1), 1.0);
  EXPECT_DOUBLE_EQ(sp::dsc(a, c, 1), 0.0);
  EXPECT_DOUBLE_EQ(sp::dsc(a, b, 1), 0.5);
  const sp::LabelVolume empty(d, {}, 2);
  EXPECT_DOUBLE_EQ(sp::dsc(empty, empty, 1), 1.0);
  EXPECT_DOUBLE_EQ(sp::dsc(a, empty, 1), 0.0);
  EXPECT_DOUBLE_EQ(sp::dsc(empty, a, 1), 0.0);
}

TEST(Dsc, DimMismatchIsStructural) {
  EXPECT_THROW(sp::dsc(sp::LabelVolume({2, 2, 2}, {}, 2), sp::LabelVolume({2, 2, 3}, {}, 2), 1),
               sp::StructuralError);
}

TEST(Boundary, Examples) {
  sp::LabelVolume cube({5, 5, 5}, {}, 2);
  sp::testing::fill_box(cube, {1, 1, 1}, {3, 3, 3}, 1);
  const auto b = sp::boundary_voxels(cube, 1);
  EXPECT_EQ(b.size(), 26u);
  EXPECT_EQ(std::count(b.begin(), b.end(), sp::VoxelIndex{2, 2, 2}), 0);
  const auto single = sp::boundary_voxels(points({3, 3, 3}, {{1, 2, 0}}), 1);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], (sp::VoxelIndex{1, 2, 0}));
  EXPECT_TRUE(sp::boundary_voxels(sp::LabelVolume({3, 3, 3}, {}, 2), 1).empty());
  const auto mm = sp::boundary_points(points({3, 3, 3}, {{1, 2, 0}}), 1, {0.5, 2.0, 3.0});
  ASSERT_EQ(mm.size(), 1u);
  EXPECT_EQ(mm[0], (Point{0.5, 4.0, 0.0}));
}

TEST(Boundary, VolumeBorderCountsAsOutside) {
  sp::LabelVolume full({3, 3, 3}, {}, 2);
  sp::testing::fill_box(full, {0, 0, 0}, {2, 2, 2}, 1);
  EXPECT_EQ(sp::boundary_voxels(full, 1).size(), 26u);
}

TEST(Asd, Examples) {
  const sp::Dims d{1, 1, 5};
  const auto a = points(d, {{0, 0, 0}});
  EXPECT_DOUBLE_EQ(*sp::asd(a, a, 1, {}), 0.0);
  const auto far = points(d, {{0, 0, 3}});
  EXPECT_DOUBLE_EQ(*sp::asd(a, far, 1, {}), 3.0);
  const auto two = points(d, {{0, 0, 1}, {0, 0, 2}});
  EXPECT_DOUBLE_EQ(*sp::asd(a, two, 1, {}), 4.0 / 3.0);
  EXPECT_FALSE(sp::asd(a, sp::LabelVolume(d, {}, 2), 1, {}).has_value());
}

TEST(Hausdorff, Examples) {
  const sp::Dims d{1, 1, 6};
  const auto p = points(d, {{0, 0, 0}});
  const auto g = points(d, {{0, 0, 0}, {0, 0, 5}});
  EXPECT_DOUBLE_EQ(*sp::hausdorff_max(p, p, 1, {}), 0.0);
  EXPECT_DOUBLE_EQ(*sp::hausdorff_max(p, g, 1, {}), 5.0);
  EXPECT_DOUBLE_EQ(*sp::hausdorff_max(g, p, 1, {}), 5.0);
  EXPECT_FALSE(sp::hausdorff_max(sp::LabelVolume(d, {}, 2), g, 1, {}).has_value());
}

TEST(Hausdorff2d, Examples) {
  sp::LabelSlice a{4, 4, std::vector<std::uint8_t>(16, 0)};
  sp::LabelSlice b = a;
  a.labels[5] = 1;
  b.labels[6] = 1;
  EXPECT_DOUBLE_EQ(*sp::hausdorff_2d(a, a, 1, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(*sp::hausdorff_2d(a, b, 1, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(*sp::hausdorff_2d(a, b, 1, 2.5, 1.0), 2.5);
}

TEST(Hausdorff2d, RingVersusDilatedRingMatchesBruteForce) {
  const int n = 9;
  sp::LabelSlice ring{n, n, std::vector<std::uint8_t>(n * n, 0)};
  sp::LabelSlice dilated = ring;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int r = std::max(std::abs(i - 4), std::abs(j - 4));
      if (r == 2) ring.labels[static_cast<std::size_t>(j * n + i)] = 1;
      if (r >= 1 && r <= 3) dilated.labels[static_cast<std::size_t>(j * n + i)] = 1;
    }
  // 4-neighbour boundaries, brute-force all pairs.
  auto boundary = [&](const sp::LabelSlice& s) {
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (s.at(i, j) != 1) continue;
        bool edge = i == 0 || j == 0 || i == n - 1 || j == n - 1 || s.at(i - 1, j) != 1 || s.at(i + 1, j) != 1 ||
                    s.at(i, j - 1) != 1 || s.at(i, j + 1) != 1;
        if (edge) out.emplace_back(i, j);
      }
    return out;
  };
  const auto ba = boundary(ring), bb = boundary(dilated);
  auto directed = [](const auto& x, const auto& y) {
    double h = 0.0;
    for (auto [i, j] : x) {
      double best = 1e300;
      for (auto [a, b] : y) best = std::min(best, std::hypot(i - a, j - b));
      h = std::max(h, best);
    }
    return h;
  };
  const double expect = std::max(directed(ba, bb), directed(bb, ba));
  const double got = *sp::hausdorff_2d(ring, dilated, 1, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(got, expect);
  EXPECT_LE(got, std::sqrt(2.0) + 1e-12);
}

TEST(VolumetricError, Examples) {
  sp::LabelVolume gt({10, 10, 2}, {}, 2);
  sp::testing::fill_box(gt, {0, 0, 0}, {9, 9, 0}, 1);
  EXPECT_DOUBLE_EQ(*sp::volumetric_error_pct(gt, gt, 1, {}), 0.0);
  sp::LabelVolume twice = gt;
  sp::testing::fill_box(twice, {0, 0, 1}, {9, 9, 1}, 1);
  EXPECT_DOUBLE_EQ(*sp::volumetric_error_pct(twice, gt, 1, {}), 100.0);
  sp::LabelVolume plus10 = gt;
  sp::testing::fill_box(plus10, {0, 0, 1}, {9, 0, 1}, 1);
  EXPECT_DOUBLE_EQ(*sp::volumetric_error_pct(plus10, gt, 1, {2.0, 2.0, 2.0}), 10.0);
  EXPECT_FALSE(sp::volumetric_error_pct(gt, sp::LabelVolume({10, 10, 2}, {}, 2), 1, {}).has_value());
}

TEST(Metrics, BruteForceEquivalenceOnRandomMasks) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(1, 8);
  std::uniform_real_distribution<double> dens(0.05, 0.7);
  for (int t = 0; t < 100; ++t) {
    const sp::Dims d{side(rng), side(rng), side(rng)};
    const auto p = random_mask(d, 3, dens(rng), rng);
    const auto g = random_mask(d, 3, dens(rng), rng);
    const sp::Spacing s{0.5 + 0.25 * (t % 4), 1.0, 1.5 + 0.5 * (t % 3)};
    for (int c = 1; c <= 2; ++c) {
      EXPECT_EQ(sp::dsc(p, g, c), oracle_dsc(p, g, c));
      EXPECT_EQ(sp::asd(p, g, c, s), oracle_asd(p, g, c, s)) << "trial " << t;
      EXPECT_EQ(sp::hausdorff_max(p, g, c, s), oracle_hd(p, g, c, s)) << "trial " << t;
    }
  }
}

TEST(Metrics, PropertiesOnRandomMasks) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const sp::Dims d{6, 5, 7};
    const auto p = random_mask(d, 2, 0.4, rng);
    const auto g = random_mask(d, 2, 0.4, rng);
    EXPECT_EQ(sp::dsc(p, g, 1), sp::dsc(g, p, 1));
    const double x = sp::dsc(p, g, 1);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    const auto a = sp::asd(p, g, 1, {}), h = sp::hausdorff_max(p, g, 1, {});
    if (a && h) {
      EXPECT_GE(*h, *a);
      EXPECT_GE(*a, 0.0);
      EXPECT_EQ(*sp::asd(p, g, 1, {2, 2, 2}), 2 * *a);
      EXPECT_EQ(*sp::hausdorff_max(p, g, 1, {2, 2, 2}), 2 * *h);
    }
  }
}

TEST(Evaluate, PerfectPredictionsAndRowCount) {
  std::mt19937_64 rng(1);
  std::vector<sp::LabelVolume> gts;
  for (int s = 0; s < 3; ++s) gts.push_back(random_mask({5, 5, 5}, 4, 0.5, rng));
  const sp::EvaluationMeta meta{{"a", "b", "c"}, "uc1", 3};
  const auto r = sp::evaluate(gts, gts, meta);
  ASSERT_EQ(r.rows.size(), 3u * 3u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.dsc, 1.0);
    EXPECT_EQ(row.asd_mm, 0.0);
    EXPECT_EQ(row.hd_max_mm, 0.0);
    EXPECT_EQ(row.vol_err_pct, 0.0);
    EXPECT_EQ(row.strategy, "uc1");
    EXPECT_EQ(row.n_slices, 3);
  }
  const auto threaded = sp::evaluate(gts, gts, meta, 3);
  std::ostringstream x, y;
  sp::write_report_csv(x, r);
  sp::write_report_csv(y, threaded);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Evaluate, AggregatesMatchIndependentRecomputation) {
  // 3 subjects, 1 class; DSC values computed by hand: 1, 0.5, 0.
  const sp::Dims d{2, 2, 2};
  const auto g = points(d, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const std::vector<sp::LabelVolume> gts{g, g, g};
  const std::vector<sp::LabelVolume> preds{g, points(d, {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {1, 0, 1}}),
                                           sp::LabelVolume(d, {}, 2)};
  const auto r = sp::evaluate(preds, gts, {{"s0", "s1", "s2"}, "equidistant", 2});
  const auto agg = r.aggregate();
  const auto it = std::find_if(agg.begin(), agg.end(), [](const auto& a) { return a.class_id == 1; });
  ASSERT_NE(it, agg.end());
  EXPECT_EQ(it->dsc.count, 3);
  EXPECT_DOUBLE_EQ(it->dsc.mean, 0.5);
  EXPECT_DOUBLE_EQ(it->dsc.std, 0.5);  // sample std of {1, 0.5, 0}
  // The empty prediction leaves distances undefined, never zero.
  EXPECT_EQ(it->asd_mm.count, 2);
  EXPECT_EQ(it->hd_max_mm.count, 2);
  EXPECT_FALSE(r.rows[2].asd_mm.has_value());
  EXPECT_EQ(it->vol_err_pct.count, 3);
  EXPECT_DOUBLE_EQ(it->vol_err_pct.mean, 100.0 / 3.0);
}

TEST(Summarize, SampleStd) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = sp::summarize(v);
  EXPECT_EQ(s.count, 8);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(32.0 / 7.0));
  const std::vector<double> one{3.5};
  EXPECT_EQ(sp::summarize(one).std, 0.0);
}

TEST(ReportCsv, HeaderAndUndefinedCellsRoundTrip) {
  const sp::Dims d{1, 1, 3};
  const std::vector<sp::LabelVolume> gts{points(d, {{0, 0, 1}})};
  const std::vector<sp::LabelVolume> preds{sp::LabelVolume(d, {}, 2)};
  const auto r = sp::evaluate(preds, gts, {{"x"}, "uc2", 4});
  std::ostringstream os;
  sp::write_report_csv(os, r);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), sp::kReportHeader);
  EXPECT_NE(text.find("x,uc2,4,1,0,NA,NA,100"), std::string::npos) << text;
  std::istringstream is(text);
  const auto back = sp::read_report_csv(is);
  ASSERT_EQ(back.rows.size(), 1u);
  EXPECT_FALSE(back.rows[0].asd_mm.has_value());
  EXPECT_EQ(back.rows[0].vol_err_pct, 100.0);
  std::ostringstream again;
  sp::write_report_csv(again, back);
  EXPECT_EQ(again.str(), text);
}
