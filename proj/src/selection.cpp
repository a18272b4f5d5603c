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

#include "shapeprior/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapeprior/error.hpp"
#include "shapeprior/metrics.hpp"
#include "shapeprior/parallel.hpp"

namespace shapeprior {

namespace {

void log_line(const SelectionOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::string format_percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", p);
  return buf;
}

bool in_zone(int percent, Zone z) {
  // zone 1 = [0, 100/3), zone 3 = (200/3, 100]
  return z == Zone::distal ? 3 * percent < 100 : 3 * percent > 200;
}

const char* zone_name(Zone z) { return z == Zone::distal ? "zone1" : "zone3"; }

Zone other(Zone z) { return z == Zone::distal ? Zone::proximal : Zone::distal; }

// Linear interpolation of (position, value) samples onto integer percents,
// flat beyond the first/last sample.
ErrorCurve resample(const std::vector<std::pair<double, double>>& pts) {
  ErrorCurve c;
  std::size_t seg = 0;
  for (int p = 0; p < kCurvePoints; ++p) {
    const double x = p;
    if (x <= pts.front().first) {
      c.values[p] = pts.front().second;
      continue;
    }
    if (x >= pts.back().first) {
      c.values[p] = pts.back().second;
      continue;
    }
    while (seg + 1 < pts.size() && pts[seg + 1].first < x) ++seg;
    const auto& [x0, y0] = pts[seg];
    const auto& [x1, y1] = pts[seg + 1];
    c.values[p] = x1 == x0 ? y1 : y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

SlicePlan equidistant_plan(int k, int nz) {
  if (nz < 1) throw StructuralError("equidistant_plan: nz must be positive");
  if (k < 1 || k > nz) {
    throw StructuralError("equidistant_plan: k = " + std::to_string(k) + " must be in [1, " + std::to_string(nz) + "]");
  }
  SlicePlan plan;
  plan.strategy = "equidistant";
  for (int j = 0; j < k; ++j) {
    const long idx = (static_cast<long>(2 * j + 1) * nz) / (2L * k);
    plan.append(SliceSpecifier::absolute(static_cast<int>(idx)));
  }
  return plan;
}

// ---------------------------------------------------------------------------

std::vector<double> ErrorMap::slice_scores() const {
  std::vector<double> scores(static_cast<std::size_t>(dims.nz), 0.0);
  const std::size_t slice = dims.slice_size();
  for (int k = 0; k < dims.nz; ++k) {
    double sum = 0.0;
    for (std::size_t t = 0; t < slice; ++t) sum += values[static_cast<std::size_t>(k) * slice + t];
    scores[static_cast<std::size_t>(k)] = sum / static_cast<double>(slice);
  }
  return scores;
}

SlicePlan uc1_minimal_plan(std::span<const LabelVolume> train_set) {
  if (train_set.empty()) throw StructuralError("uc1_minimal_plan: empty training set");
  const int n_class = train_set.front().n_class();
  SlicePlan plan;
  plan.strategy = "uc1";
  for (int c = 1; c < n_class; ++c) {
    double sum = 0.0;
    int present = 0;
    for (const auto& v : train_set) {
      if (v.n_class() != n_class) throw StructuralError("uc1_minimal_plan: subjects disagree on n_class");
      int first = -1, last = -1;
      for (int k = 0; k < v.dims().nz; ++k) {
        if (v.slice_count(k, c) > 0) {
          if (first < 0) first = k;
          last = k;
        }
      }
      if (first < 0) continue;
      sum += 0.5 * (first + last);
      ++present;
    }
    if (present == 0) {
      plan.events.push_back({"class_skipped", "class " + std::to_string(c) + " absent from every subject"});
      continue;
    }
    const double mean = sum / present;
    const int idx = static_cast<int>(std::ceil(mean - 0.5));  // half-down
    if (!plan.append(SliceSpecifier::absolute(idx))) {
      plan.events.push_back({"duplicate_collapsed", "class " + std::to_string(c) + " shares slice " +
                                                        std::to_string(idx)});
    }
  }
  return plan;
}

ErrorMap error_map_from_predictions(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts) {
  if (preds.size() != gts.size() || gts.empty()) throw StructuralError("error map: need aligned, nonempty lists");
  ErrorMap map{gts.front().dims(), std::vector<double>(gts.front().dims().voxel_count(), 0.0)};
  for (std::size_t s = 0; s < gts.size(); ++s) {
    if (preds[s].dims() != map.dims || gts[s].dims() != map.dims) {
      throw StructuralError("error map: all subjects must share dims");
    }
    const auto p = preds[s].labels();
    const auto g = gts[s].labels();
    for (std::size_t v = 0; v < map.values.size(); ++v) map.values[v] += p[v] != g[v] ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(gts.size());
  for (double& v : map.values) v /= n;
  return map;
}

std::vector<LabelVolume> infer_all(const ModelParams& params, std::span<const LabelVolume> subjects,
                                   const SlicePlan& plan, const InferConfig& config, int threads) {
  std::vector<LabelVolume> preds(subjects.size());
  parallel_for(subjects.size(), threads, [&](std::size_t s) {
    preds[s] = infer_volume(params, oracle_annotate(subjects[s], plan), config).labels;
  });
  return preds;
}

ErrorMap build_error_map(const ModelParams& params, std::span<const LabelVolume> train_set, const SlicePlan& plan,
                         const InferConfig& config, const SelectionOptions& options) {
  if (plan.slices.empty()) throw StructuralError("build_error_map: plan is empty");
  const auto preds = infer_all(params, train_set, plan, config, options.threads);
  return error_map_from_predictions(preds, train_set);
}

SliceSpecifier uc1_select_next(const ErrorMap& map, const SlicePlan& existing) {
  const auto scores = map.slice_scores();
  std::vector<bool> taken(scores.size(), false);
  for (const auto& s : existing.slices) {
    if (s.kind != SliceSpecifier::Kind::absolute) throw StructuralError("uc1_select_next: plan must be absolute");
    const auto idx = static_cast<std::size_t>(s.value);
    if (idx >= scores.size()) throw StructuralError("uc1_select_next: plan index outside the error map");
    taken[idx] = true;
  }
  int best = -1;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (taken[k]) continue;
    if (best < 0 || scores[k] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  if (best < 0) throw StructuralError("uc1_select_next: every slice is already selected");
  return SliceSpecifier::absolute(best);
}

SlicePlan uc1_extend_plan(SlicePlan plan, int max_slices, const ErrorMapProvider& provider) {
  if (max_slices < static_cast<int>(plan.size())) {
    throw StructuralError("uc1 plan: max_slices smaller than the minimal plan (" + std::to_string(plan.size()) + ")");
  }
  while (static_cast<int>(plan.size()) < max_slices) {
    const ErrorMap map = provider(plan);
    plan.append(uc1_select_next(map, plan));
  }
  return plan;
}

SlicePlan uc1_build_plan(const ModelParams& params, std::span<const LabelVolume> train_set, int max_slices,
                         const InferConfig& config, const SelectionOptions& options) {
  SlicePlan plan = uc1_minimal_plan(train_set);
  log_line(options, "uc1: minimal plan has " + std::to_string(plan.size()) + " slices");
  plan = uc1_extend_plan(std::move(plan), max_slices, [&](const SlicePlan& current) {
    ErrorMap map = build_error_map(params, train_set, current, config, options);
    log_line(options, "uc1: error map built for " + std::to_string(current.size()) + " slices");
    return map;
  });
  plan.strategy = "uc1";
  return plan;
}

// ---------------------------------------------------------------------------

ErrorCurve min_max_normalize(const ErrorCurve& curve) {
  const auto [lo, hi] = std::minmax_element(curve.values.begin(), curve.values.end());
  ErrorCurve out;
  if (*hi == *lo) return out;
  for (int p = 0; p < kCurvePoints; ++p) out.values[p] = (curve.values[p] - *lo) / (*hi - *lo);
  return out;
}

Uc2Curves uc2_metric_curves(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts, int class_id) {
  if (preds.size() != gts.size() || gts.empty()) throw StructuralError("uc2 curve: need aligned, nonempty lists");
  ErrorCurve hd_mean, vol_mean;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    const auto& gt = gts[s];
    const auto& pred = preds[s];
    if (pred.dims() != gt.dims()) throw StructuralError("uc2 curve: prediction and ground truth dims differ");
    const auto [first, last] = normalize_length(gt);
    const auto& sp = gt.spacing();
    const double diagonal = std::hypot((gt.dims().nx - 1) * sp.sx, (gt.dims().ny - 1) * sp.sy);

    std::vector<std::pair<double, double>> hd_pts, vol_pts;
    for (int k = first; k <= last; ++k) {
      const auto g_area = static_cast<double>(gt.slice_count(k, class_id));
      const auto p_area = static_cast<double>(pred.slice_count(k, class_id));
      if (g_area == 0.0 && p_area == 0.0) continue;
      const double pos = last == first ? 0.0 : 100.0 * (k - first) / (last - first);
      double hd = diagonal;  // one side empty: worst in-plane distance
      if (g_area > 0.0 && p_area > 0.0) {
        hd = *hausdorff_2d(pred.axial_slice(k), gt.axial_slice(k), class_id, sp.sx, sp.sy);
      }
      hd_pts.emplace_back(pos, hd);
      vol_pts.emplace_back(pos, std::abs(p_area - g_area) / std::max(g_area, 1.0));
    }
    if (hd_pts.empty()) throw StructuralError("uc2 curve: subject " + std::to_string(s) + " has no usable slice");
    const ErrorCurve hd = resample(hd_pts);
    const ErrorCurve vol = resample(vol_pts);
    for (int p = 0; p < kCurvePoints; ++p) {
      hd_mean.values[p] += hd.values[p] / static_cast<double>(gts.size());
      vol_mean.values[p] += vol.values[p] / static_cast<double>(gts.size());
    }
  }
  Uc2Curves out;
  out.hausdorff = min_max_normalize(hd_mean);
  out.volume = min_max_normalize(vol_mean);
  for (int p = 0; p < kCurvePoints; ++p) {
    out.combined.values[p] = 0.5 * (out.hausdorff.values[p] + out.volume.values[p]);
  }
  return out;
}

ErrorCurve uc2_error_curve(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts, int class_id) {
  return uc2_metric_curves(preds, gts, class_id).combined;
}

SlicePlan uc2_minimal_plan() {
  SlicePlan plan;
  plan.strategy = "uc2";
  plan.append(SliceSpecifier::percent(0.0));
  plan.append(SliceSpecifier::percent(100.0));
  plan.append(SliceSpecifier::percent(50.0));
  return plan;
}

Uc2Pick uc2_select_next(const ErrorCurve& curve, const SlicePlan& existing,
                        std::span<const std::pair<int, int>> spans, Zone active) {
  if (spans.empty()) throw StructuralError("uc2_select_next: no adaptation volumes");
  std::vector<std::vector<int>> selected(spans.size());
  for (std::size_t v = 0; v < spans.size(); ++v) {
    for (const auto& s : existing.slices) {
      if (s.kind != SliceSpecifier::Kind::percent) throw StructuralError("uc2_select_next: plan must be percent");
      selected[v].push_back(percent_to_index(s.value, spans[v]));
    }
  }
  // Smallest distance, over volumes and selected slices, of candidate p.
  auto gap = [&](int p) {
    int g = std::numeric_limits<int>::max();
    for (std::size_t v = 0; v < spans.size(); ++v) {
      const int idx = percent_to_index(p, spans[v]);
      for (int s : selected[v]) g = std::min(g, std::abs(idx - s));
    }
    return g;
  };
  auto best_in = [&](Zone z, int min_gap) {
    int best = -1;
    for (int p = 0; p < kCurvePoints; ++p) {
      if (!in_zone(p, z) || existing.contains(SliceSpecifier::percent(p)) || gap(p) < min_gap) continue;
      if (best < 0 || curve.values[p] > curve.values[best]) best = p;
    }
    return best;
  };

  Uc2Pick pick;
  pick.zone = active;
  int p = best_in(active, kMinSliceGap);
  if (p < 0) {
    p = best_in(other(active), kMinSliceGap);
    if (p >= 0) {
      pick.zone = other(active);
      pick.events.push_back({"zone_fallback", std::string(zone_name(active)) + " has no candidate >= " +
                                                  std::to_string(kMinSliceGap) + " slices away; used " +
                                                  zone_name(pick.zone)});
    }
  }
  if (p < 0) {
    for (Zone z : {active, other(active)}) {
      int widest = 0;
      for (int q = 0; q < kCurvePoints; ++q) {
        if (in_zone(q, z) && !existing.contains(SliceSpecifier::percent(q))) widest = std::max(widest, gap(q));
      }
      if (widest > 0) {
        p = best_in(z, widest);
        pick.zone = z;
        pick.events.push_back({"spacing_relaxed", "minimum gap relaxed to " + std::to_string(widest) +
                                                      " slices in " + zone_name(z)});
        break;
      }
    }
  }
  if (p < 0) throw StructuralError("uc2_select_next: no selectable slice remains");
  pick.specifier = SliceSpecifier::percent(p);
  return pick;
}

SlicePlan uc2_extend_plan(SlicePlan plan, std::span<const std::pair<int, int>> spans, int max_slices,
                          const ErrorCurveProvider& provider) {
  if (max_slices < 3) throw StructuralError("uc2 plan: max_slices must be >= 3");
  if (plan.slices.empty()) plan = uc2_minimal_plan();
  plan.strategy = "uc2";
  while (static_cast<int>(plan.size()) < max_slices) {
    const ErrorCurve curve = provider(plan);
    const Zone active = (plan.size() - 3) % 2 == 0 ? Zone::distal : Zone::proximal;
    Uc2Pick pick = uc2_select_next(curve, plan, spans, active);
    plan.append(pick.specifier);
    for (auto& e : pick.events) {
      e.detail = "slice " + std::to_string(plan.size()) + " (" + format_percent(pick.specifier.value) + "): " + e.detail;
      plan.events.push_back(std::move(e));
    }
  }
  return plan;
}

SlicePlan uc2_build_plan(const ModelParams& params, std::span<const LabelVolume> adaptation_set, int max_slices,
                         const InferConfig& config, const SelectionOptions& options) {
  if (adaptation_set.size() != 3) throw StructuralError("uc2_build_plan: exactly three adaptation volumes required");
  std::vector<std::pair<int, int>> spans;
  for (const auto& v : adaptation_set) spans.push_back(normalize_length(v));
  return uc2_extend_plan(SlicePlan{}, spans, max_slices, [&](const SlicePlan& current) {
    const auto preds = infer_all(params, adaptation_set, current, config, options.threads);
    log_line(options, "uc2: error curve computed for " + std::to_string(current.size()) + " slices");
    return uc2_error_curve(preds, adaptation_set);
  });
}

}  // namespace shapeprior
