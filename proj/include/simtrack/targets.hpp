// Copyright 2026 The SimTrack Authors.
//
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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

#include "simtrack/bev_map.hpp"
#include "simtrack/geometry.hpp"
#include "simtrack/scenario.hpp"

namespace simtrack {

enum class AssignmentKind { kTracked, kDead, kNewborn, kAbsent };

/// Category of an object across a (t-1, t) pair.
constexpr AssignmentKind assignment_kind(bool present_prev, bool present_cur) {
  if (present_prev && present_cur) return AssignmentKind::kTracked;
  if (present_prev) return AssignmentKind::kDead;
  if (present_cur) return AssignmentKind::kNewborn;
  return AssignmentKind::kAbsent;
}

struct TargetConfig {
  double min_overlap = 0.1;
  int min_radius = 2;
};

/// Largest integer radius (in cells) such that a box whose corners are
/// displaced by the radius still reaches `min_overlap` IoU with the original,
/// over the three corner-displacement cases; clamped below by `min_radius`.
/// Each bound is the exact root of its case's IoU quadratic.
inline int gaussian_radius(double l_cells, double w_cells, double min_overlap,
                           int min_radius = 2) {
  const double h = l_cells;
  const double w = w_cells;
  const double o = min_overlap;

  // One corner inside, one outside: (h-r)(w-r) / (2hw - (h-r)(w-r)) >= o.
  const double b1 = h + w;
  const double c1 = w * h * (1.0 - o) / (1.0 + o);
  const double r1 = (b1 - std::sqrt(b1 * b1 - 4.0 * c1)) / 2.0;

  // Both corners inside: (h-2r)(w-2r) / hw >= o.
  const double a2 = 4.0;
  const double b2 = 2.0 * (h + w);
  const double c2 = (1.0 - o) * w * h;
  const double r2 = (b2 - std::sqrt(b2 * b2 - 4.0 * a2 * c2)) / (2.0 * a2);

  // Both corners outside: hw / ((h+2r)(w+2r)) >= o.
  const double a3 = 4.0 * o;
  const double b3 = 2.0 * o * (h + w);
  const double c3 = (o - 1.0) * w * h;
  const double r3 = (-b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / (2.0 * a3);

  const double r = std::min({r1, r2, r3});
  return std::max(min_radius, static_cast<int>(std::floor(r + 1e-9)));
}

inline double gaussian_sigma(int radius) { return (2.0 * radius + 1.0) / 6.0; }

/// Max-merges a Gaussian of height `peak` into one class plane. Returns false
/// (and leaves the map untouched) when the center is off the grid.
inline bool render_gaussian(CenternessMap& map, int class_id, CellIndex center, int radius,
                            double peak) {
  if (!map.contains(center) || class_id < 0 || class_id >= map.channels()) return false;
  const double two_sigma_sq = 2.0 * gaussian_sigma(radius) * gaussian_sigma(radius);
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const CellIndex c{center.row + dr, center.col + dc};
      if (!map.contains(c)) continue;
      const double v = peak * std::exp(-(dr * dr + dc * dc) / two_sigma_sq);
      double& cell = map.at(class_id, c);
      cell = std::max(cell, v);
    }
  }
  return true;
}

struct TargetCenter {
  int class_id = 0;
  CellIndex cell;
  int track_id = 0;
  AssignmentKind kind = AssignmentKind::kNewborn;
  friend bool operator==(const TargetCenter&, const TargetCenter&) = default;
};

struct TargetMaps {
  CenternessMap centerness;
  MotionMap motion;
  RegressionMaps regression;
  std::vector<TargetCenter> centers;
  std::vector<int> skipped;  // track ids whose anchor fell off the grid
};

using RegressionValues = std::array<double, kRegressionChannels>;

inline RegressionValues regression_values(const Box3D& b) {
  return {b.center.z, b.size.w, b.size.l, b.size.h, std::sin(b.yaw), std::cos(b.yaw)};
}

namespace detail {

// One object's contribution to the dense maps.
struct RenderItem {
  int track_id = -1;
  int class_id = 0;
  Vec2 anchor;  // continuous position the cell was rasterized from
  CellIndex cell;
  int radius = 2;
  double peak = 1.0;
  Vec2 motion;
  RegressionValues regression{};
  AssignmentKind kind = AssignmentKind::kNewborn;
};

struct RenderedMaps {
  CenternessMap centerness;
  MotionMap motion;
  RegressionMaps regression;
};

// Centerness is max-merged. Motion and regression over a footprint belong to
// the object with the larger unit-height Gaussian weight there, so a zero-score
// object still owns its footprint.
inline RenderedMaps render_items(const GridSpec& g, const std::vector<RenderItem>& items) {
  RenderedMaps out{make_centerness_map(g), make_motion_map(g), make_regression_maps(g)};
  std::vector<double> owner(static_cast<std::size_t>(g.height()) * g.width(), -1.0);
  for (const RenderItem& it : items) {
    if (!g.contains(it.cell)) continue;
    if (it.peak > 0.0) {
      render_gaussian(out.centerness, it.class_id, it.cell, it.radius, it.peak);
    }
    const double two_sigma_sq = 2.0 * gaussian_sigma(it.radius) * gaussian_sigma(it.radius);
    for (int dr = -it.radius; dr <= it.radius; ++dr) {
      for (int dc = -it.radius; dc <= it.radius; ++dc) {
        const CellIndex c{it.cell.row + dr, it.cell.col + dc};
        if (!g.contains(c)) continue;
        const double weight = std::exp(-(dr * dr + dc * dc) / two_sigma_sq);
        double& own = owner[static_cast<std::size_t>(c.row) * g.width() + c.col];
        if (weight <= own) continue;
        own = weight;
        out.motion.at(0, c) = it.motion.x;
        out.motion.at(1, c) = it.motion.y;
        for (int k = 0; k < kRegressionChannels; ++k) out.regression.at(k, c) = it.regression[k];
      }
    }
  }
  return out;
}

inline int object_radius(const Box3D& b, const GridSpec& g, const TargetConfig& cfg) {
  return gaussian_radius(b.size.l / g.cell_size, b.size.w / g.cell_size, cfg.min_overlap,
                         cfg.min_radius);
}

// Tracked objects anchor at their t-1 center, newborns at their t center; dead
// objects produce nothing. Items come out in gt_cur order.
inline std::vector<RenderItem> target_items(const FrameGroundTruth& gt_prev,
                                            const FrameGroundTruth& gt_cur,
                                            const GridSpec& g, const TargetConfig& cfg,
                                            std::vector<int>* skipped) {
  std::unordered_map<int, const GtObject*> prev;
  for (const GtObject& o : gt_prev.objects) prev.emplace(o.track_id, &o);
  std::vector<RenderItem> items;
  for (const GtObject& cur : gt_cur.objects) {
    const auto it = prev.find(cur.track_id);
    const AssignmentKind kind = assignment_kind(it != prev.end(), true);
    RenderItem item;
    item.track_id = cur.track_id;
    item.class_id = cur.box.class_id;
    item.radius = object_radius(cur.box, g, cfg);
    item.regression = regression_values(cur.box);
    item.kind = kind;
    Vec2 anchor = cur.box.bev_center();
    if (kind == AssignmentKind::kTracked) {
      anchor = it->second->box.bev_center();
      item.motion = cur.box.bev_center() - anchor;
    }
    const auto cell = world_to_cell(g, anchor);
    if (!cell) {
      if (skipped) skipped->push_back(cur.track_id);
      continue;
    }
    item.anchor = anchor;
    item.cell = *cell;
    items.push_back(item);
  }
  return items;
}

inline TargetMaps targets_from_items(const GridSpec& g, const std::vector<RenderItem>& items,
                                     std::vector<int> skipped) {
  RenderedMaps maps = render_items(g, items);
  TargetMaps out{std::move(maps.centerness), std::move(maps.motion),
                 std::move(maps.regression), {}, std::move(skipped)};
  for (const RenderItem& it : items) {
    out.centers.push_back({it.class_id, it.cell, it.track_id, it.kind});
  }
  return out;
}

}  // namespace detail

/// Hybrid-time targets for a consecutive pair. `gt_prev` must already be
/// expressed in the ego frame of t.
inline TargetMaps build_targets(const FrameGroundTruth& gt_prev,
                                const FrameGroundTruth& gt_cur, const GridSpec& g,
                                const TargetConfig& cfg = {}) {
  std::vector<int> skipped;
  auto items = detail::target_items(gt_prev, gt_cur, g, cfg, &skipped);
  return detail::targets_from_items(g, items, std::move(skipped));
}

/// First frame of a sequence: everything is newborn.
inline TargetMaps build_targets_single(const FrameGroundTruth& gt0, const GridSpec& g,
                                       const TargetConfig& cfg = {}) {
  return build_targets(FrameGroundTruth{}, gt0, g, cfg);
}

}  // namespace simtrack
