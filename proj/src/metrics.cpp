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

#include "shapeprior/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "shapeprior/error.hpp"
#include "shapeprior/parallel.hpp"

namespace shapeprior {

namespace {

void check_same_grid(const LabelVolume& a, const LabelVolume& b) {
  if (a.dims() != b.dims()) throw StructuralError("metrics: prediction and ground truth dims differ");
}

// For each point of `from`, the distance to the nearest point of `to`.
template <typename Point, typename SqDist>
std::vector<double> nearest_distances(const std::vector<Point>& from, const std::vector<Point>& to, SqDist sq) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) {
      const double d = sq(p, q);
      if (d < best) {
        best = d;
        if (best == 0.0) break;
      }
    }
    out.push_back(std::sqrt(best));
  }
  return out;
}

struct SurfaceDistances {
  std::vector<double> pred_to_gt;
  std::vector<double> gt_to_pred;
};

std::optional<SurfaceDistances> surface_distances(const LabelVolume& pred, const LabelVolume& gt, int class_id,
                                                  Spacing s) {
  check_same_grid(pred, gt);
  const auto bp = boundary_voxels(pred, class_id);
  const auto bg = boundary_voxels(gt, class_id);
  if (bp.empty() || bg.empty()) return std::nullopt;
  auto sq = [&](const VoxelIndex& a, const VoxelIndex& b) {
    const double dx = (a.i - b.i) * s.sx;
    const double dy = (a.j - b.j) * s.sy;
    const double dz = (a.k - b.k) * s.sz;
    return dx * dx + dy * dy + dz * dz;
  };
  return SurfaceDistances{nearest_distances(bp, bg, sq), nearest_distances(bg, bp, sq)};
}

struct Pixel {
  int i, j;
};

std::vector<Pixel> boundary_pixels(const LabelSlice& s, int class_id) {
  std::vector<Pixel> out;
  auto inside = [&](int i, int j) { return i >= 0 && j >= 0 && i < s.nx && j < s.ny && s.at(i, j) == class_id; };
  for (int j = 0; j < s.ny; ++j) {
    for (int i = 0; i < s.nx; ++i) {
      if (!inside(i, j)) continue;
      if (!inside(i - 1, j) || !inside(i + 1, j) || !inside(i, j - 1) || !inside(i, j + 1)) out.push_back({i, j});
    }
  }
  return out;
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), *v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_optional(const std::string& cell, int line) {
  if (cell == "NA") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IoError("report line " + std::to_string(line) + ": bad numeric cell '" + cell + "'");
  }
}

}  // namespace

double dsc(const LabelVolume& pred, const LabelVolume& gt, int class_id) {
  check_same_grid(pred, gt);
  std::size_t p = 0, g = 0, both = 0;
  const auto lp = pred.labels();
  const auto lg = gt.labels();
  for (std::size_t v = 0; v < lp.size(); ++v) {
    const bool in_p = lp[v] == class_id;
    const bool in_g = lg[v] == class_id;
    p += in_p;
    g += in_g;
    both += in_p && in_g;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

std::vector<VoxelIndex> boundary_voxels(const LabelVolume& mask, int class_id) {
  std::vector<VoxelIndex> out;
  const auto& d = mask.dims();
  auto inside = [&](int i, int j, int k) { return mask.contains(i, j, k) && mask.at(i, j, k) == class_id; };
  for (int k = 0; k < d.nz; ++k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        if (mask.at(i, j, k) != class_id) continue;
        if (!inside(i - 1, j, k) || !inside(i + 1, j, k) || !inside(i, j - 1, k) || !inside(i, j + 1, k) ||
            !inside(i, j, k - 1) || !inside(i, j, k + 1)) {
          out.push_back({i, j, k});
        }
      }
    }
  }
  return out;
}

std::vector<std::array<double, 3>> boundary_points(const LabelVolume& mask, int class_id, Spacing s) {
  std::vector<std::array<double, 3>> pts;
  for (const auto& v : boundary_voxels(mask, class_id)) pts.push_back({v.i * s.sx, v.j * s.sy, v.k * s.sz});
  return pts;
}

std::optional<double> asd(const LabelVolume& pred, const LabelVolume& gt, int class_id, Spacing spacing) {
  const auto d = surface_distances(pred, gt, class_id, spacing);
  if (!d) return std::nullopt;
  double sum = 0.0;
  for (double x : d->pred_to_gt) sum += x;
  for (double x : d->gt_to_pred) sum += x;
  return sum / static_cast<double>(d->pred_to_gt.size() + d->gt_to_pred.size());
}

std::optional<double> hausdorff_max(const LabelVolume& pred, const LabelVolume& gt, int class_id, Spacing spacing) {
  const auto d = surface_distances(pred, gt, class_id, spacing);
  if (!d) return std::nullopt;
  return std::max(*std::max_element(d->pred_to_gt.begin(), d->pred_to_gt.end()),
                  *std::max_element(d->gt_to_pred.begin(), d->gt_to_pred.end()));
}

std::optional<double> hausdorff_2d(const LabelSlice& pred, const LabelSlice& gt, int class_id, double sx, double sy) {
  if (pred.nx != gt.nx || pred.ny != gt.ny) throw StructuralError("hausdorff_2d: slice dims differ");
  const auto bp = boundary_pixels(pred, class_id);
  const auto bg = boundary_pixels(gt, class_id);
  if (bp.empty() || bg.empty()) return std::nullopt;
  auto sq = [&](const Pixel& a, const Pixel& b) {
    const double dx = (a.i - b.i) * sx;
    const double dy = (a.j - b.j) * sy;
    return dx * dx + dy * dy;
  };
  const auto a = nearest_distances(bp, bg, sq);
  const auto b = nearest_distances(bg, bp, sq);
  return std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
}

std::optional<double> volumetric_error_pct(const LabelVolume& pred, const LabelVolume& gt, int class_id,
                                           Spacing spacing) {
  check_same_grid(pred, gt);
  const double vg = static_cast<double>(gt.count(class_id)) * spacing.voxel_volume();
  if (vg == 0.0) return std::nullopt;
  const double vp = static_cast<double>(pred.count(class_id)) * spacing.voxel_volume();
  return 100.0 * std::abs(vp - vg) / vg;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AggregateRow> MetricsReport::aggregate() const {
  struct Bucket {
    std::vector<double> dsc, asd, hd, vol;
  };
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, Bucket> buckets;
  auto add = [](Bucket& b, const MetricsRow& r) {
    b.dsc.push_back(r.dsc);
    if (r.asd_mm) b.asd.push_back(*r.asd_mm);
    if (r.hd_max_mm) b.hd.push_back(*r.hd_max_mm);
    if (r.vol_err_pct) b.vol.push_back(*r.vol_err_pct);
  };
  for (const auto& r : rows) {
    add(buckets[{r.strategy, r.n_slices, r.class_id}], r);
    add(buckets[{r.strategy, r.n_slices, 0}], r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, b] : buckets) {
    AggregateRow a;
    std::tie(a.strategy, a.n_slices, a.class_id) = key;
    a.dsc = summarize(b.dsc);
    a.asd_mm = summarize(b.asd);
    a.hd_max_mm = summarize(b.hd);
    a.vol_err_pct = summarize(b.vol);
    out.push_back(std::move(a));
  }
  return out;
}

MetricsReport evaluate(std::span<const LabelVolume> preds, std::span<const LabelVolume> gts,
                       const EvaluationMeta& meta, int threads) {
  if (preds.size() != gts.size()) throw StructuralError("evaluate: prediction and ground-truth lists differ in size");
  if (!meta.subject_ids.empty() && meta.subject_ids.size() != gts.size()) {
    throw StructuralError("evaluate: one subject id per volume required");
  }
  std::vector<std::vector<MetricsRow>> per_subject(gts.size());
  parallel_for(gts.size(), threads, [&](std::size_t s) {
    const auto& pred = preds[s];
    const auto& gt = gts[s];
    check_same_grid(pred, gt);
    if (pred.n_class() != gt.n_class()) throw StructuralError("evaluate: n_class differs between pred and gt");
    for (int c = 1; c < gt.n_class(); ++c) {
      MetricsRow row;
      row.subject_id = meta.subject_ids.empty() ? "subject_" + std::to_string(s) : meta.subject_ids[s];
      row.strategy = meta.strategy;
      row.n_slices = meta.n_slices;
      row.class_id = c;
      row.dsc = dsc(pred, gt, c);
      if (const auto d = surface_distances(pred, gt, c, gt.spacing())) {
        double sum = 0.0;
        for (double x : d->pred_to_gt) sum += x;
        for (double x : d->gt_to_pred) sum += x;
        row.asd_mm = sum / static_cast<double>(d->pred_to_gt.size() + d->gt_to_pred.size());
        row.hd_max_mm = std::max(*std::max_element(d->pred_to_gt.begin(), d->pred_to_gt.end()),
                                 *std::max_element(d->gt_to_pred.begin(), d->gt_to_pred.end()));
      }
      row.vol_err_pct = volumetric_error_pct(pred, gt, c, gt.spacing());
      per_subject[s].push_back(std::move(row));
    }
  });
  MetricsReport report;
  for (auto& rows : per_subject) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  return report;
}

void write_report_csv(std::ostream& os, const MetricsReport& report, bool header) {
  if (header) os << kReportHeader << '\n';
  for (const auto& r : report.rows) {
    os << r.subject_id << ',' << r.strategy << ',' << r.n_slices << ',' << r.class_id << ',' << format_optional(r.dsc)
       << ',' << format_optional(r.asd_mm) << ',' << format_optional(r.hd_max_mm) << ','
       << format_optional(r.vol_err_pct) << '\n';
  }
}

MetricsReport read_report_csv(std::istream& is) {
  MetricsReport report;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kReportHeader) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw IoError("report line " + std::to_string(line_no) + ": expected 8 columns, got " +
                    std::to_string(cells.size()));
    }
    MetricsRow r;
    r.subject_id = cells[0];
    r.strategy = cells[1];
    try {
      r.n_slices = std::stoi(cells[2]);
      r.class_id = std::stoi(cells[3]);
    } catch (const std::exception&) {
      throw IoError("report line " + std::to_string(line_no) + ": bad integer cell");
    }
    const auto d = parse_optional(cells[4], line_no);
    if (!d) throw IoError("report line " + std::to_string(line_no) + ": dsc cannot be NA");
    r.dsc = *d;
    r.asd_mm = parse_optional(cells[5], line_no);
    r.hd_max_mm = parse_optional(cells[6], line_no);
    r.vol_err_pct = parse_optional(cells[7], line_no);
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace shapeprior
