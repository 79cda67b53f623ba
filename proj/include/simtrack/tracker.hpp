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

// Online joint detection and tracking by read-off. The updated map Z is kept
// as a sparse list of entries and rasterized on demand; there is no
// detection-to-track distance matching anywhere in this file.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "simtrack/bev_map.hpp"
#include "simtrack/geometry.hpp"

namespace simtrack {

struct TrackerConfig {
  double tau = 0.1;
  int nms_window = 3;        // odd, cells
  double read_radius = 1.5;  // cells, Euclidean
  bool emit_coasting = true;
  bool combine_maps = true;  // false: drop the (Y + Z) / 2 averaging
  double frame_dt = 0.5;     // only used to report velocities

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw Error("tracker: tau must lie in (0, 1)");
    if (nms_window < 1 || nms_window % 2 == 0) throw Error("tracker: nms_window must be odd");
    if (read_radius < 0.0) throw Error("tracker: read_radius must be >= 0");
    if (!(frame_dt > 0.0)) throw Error("tracker: frame_dt must be positive");
  }
};

struct Peak {
  int class_id = 0;
  CellIndex cell;
  double score = 0.0;
  friend bool operator==(const Peak&, const Peak&) = default;
};

/// Thresholded local maxima over an nms_window x nms_window neighborhood.
/// Equal-valued neighbors resolve toward the lower (row, col); output is sorted
/// by descending score, then (row, col, class).
inline std::vector<Peak> extract_peaks(const CenternessMap& y, const TrackerConfig& cfg) {
  const int half = cfg.nms_window / 2;
  std::vector<Peak> peaks;
  for (int k = 0; k < y.channels(); ++k) {
    for (int r = 0; r < y.height(); ++r) {
      for (int c = 0; c < y.width(); ++c) {
        const double v = y.at(k, r, c);
        if (v < cfg.tau) continue;
        bool is_peak = true;
        for (int dr = -half; dr <= half && is_peak; ++dr) {
          for (int dc = -half; dc <= half; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const CellIndex n{r + dr, c + dc};
            if (!y.contains(n)) continue;
            const double nv = y.at(k, n);
            if (nv > v || (nv == v && n < CellIndex{r, c})) {
              is_peak = false;
              break;
            }
          }
        }
        if (is_peak) peaks.push_back({k, {r, c}, v});
      }
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.cell.row, a.cell.col, a.class_id) <
           std::tie(b.cell.row, b.cell.col, b.class_id);
  });
  return peaks;
}

struct TrackEntry {
  int track_id = 0;
  int class_id = 0;
  Vec2 center;  // meters, current ego frame
  double score = 0.0;
  Box3D box;
  Vec2 last_motion;  // meters per frame
  int age = 0;       // frames since birth
};

struct TrackerState {
  std::vector<TrackEntry> entries;
  int next_id = 0;
  int frame = 0;
  GridSpec grid;
};

struct TrackReport {
  int track_id = 0;
  int class_id = 0;
  Vec2 center;
  Box3D box;
  double score = 0.0;
  Vec2 motion;
  Vec2 velocity;
  bool coasting = false;  // survived on Z alone, no current evidence above tau
};

struct FrameTracks {
  int frame = 0;
  std::vector<TrackReport> tracks;
};

struct StepResult {
  TrackerState state;
  FrameTracks tracks;
};

namespace detail {

inline Box3D box_from_regression(const HeadOutput& out, CellIndex cell, Vec2 center,
                                 int class_id) {
  constexpr double kMinSize = 1e-3;
  const RegressionMaps& s = out.regression;
  Box3D b;
  b.center = {center.x, center.y, s.at(kRegZ, cell)};
  b.size = {std::max(kMinSize, s.at(kRegW, cell)), std::max(kMinSize, s.at(kRegL, cell)),
            std::max(kMinSize, s.at(kRegH, cell))};
  const double sn = s.at(kRegSin, cell);
  const double cs = s.at(kRegCos, cell);
  b.yaw = (sn == 0.0 && cs == 0.0) ? 0.0 : std::atan2(sn, cs);
  b.class_id = class_id;
  return b;
}

inline TrackReport make_report(const TrackEntry& e, bool coasting, double frame_dt) {
  TrackReport r;
  r.track_id = e.track_id;
  r.class_id = e.class_id;
  r.center = e.center;
  r.box = e.box;
  r.score = e.score;
  r.motion = e.last_motion;
  r.velocity = e.last_motion / frame_dt;
  r.box.velocity = r.velocity;
  r.coasting = coasting;
  return r;
}

inline void check_grid(const GridSpec& g, const HeadOutput& out) {
  if (!(out.grid == g) || out.centerness.channels() != g.num_classes ||
      out.centerness.height() != g.height() || out.centerness.width() != g.width() ||
      out.motion.channels() != kMotionChannels ||
      out.regression.channels() != kRegressionChannels) {
    throw Error("tracker: head output grid does not match the tracker grid");
  }
}

}  // namespace detail

/// First frame: every peak above tau opens a track, ids in descending score.
inline StepResult init(const HeadOutput& out0, const TrackerConfig& cfg) {
  cfg.validate();
  detail::check_grid(out0.grid, out0);
  StepResult res;
  res.state.grid = out0.grid;
  for (const Peak& p : extract_peaks(out0.centerness, cfg)) {
    TrackEntry e;
    e.track_id = res.state.next_id++;
    e.class_id = p.class_id;
    e.center = cell_center(out0.grid, p.cell);
    e.score = p.score;
    e.box = detail::box_from_regression(out0, p.cell, e.center, p.class_id);
    e.last_motion = out0.motion_at(p.cell);
    res.state.entries.push_back(e);
    res.tracks.tracks.push_back(detail::make_report(e, false, cfg.frame_dt));
  }
  res.tracks.frame = 0;
  return res;
}

/// One online step. `ego_rel` maps the ego frame of t-1 into that of t.
inline StepResult step(const TrackerState& state, const Pose2D& ego_rel, const HeadOutput& out,
                       const TrackerConfig& cfg) {
  cfg.validate();
  const GridSpec& g = state.grid;
  detail::check_grid(g, out);

  // Ego-motion compensation of Z.
  std::vector<TrackEntry> prev = state.entries;
  for (TrackEntry& e : prev) {
    e.center = transform_point(ego_rel, e.center);
    e.box.center.x = e.center.x;
    e.box.center.y = e.center.y;
    e.box.yaw = normalize_angle(e.box.yaw + ego_rel.yaw);
  }

  // Point-mass raster of Z, then (Y + Z) / 2.
  std::vector<std::optional<CellIndex>> entry_cell(prev.size());
  CenternessMap z = make_centerness_map(g);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    entry_cell[i] = world_to_cell(g, prev[i].center);
    if (!entry_cell[i]) continue;
    double& v = z.at(prev[i].class_id, *entry_cell[i]);
    v = std::max(v, prev[i].score);
  }
  CenternessMap fused = out.centerness;
  if (cfg.combine_maps) {
    auto fv = fused.values();
    const auto zv = z.values();
    for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = 0.5 * (fv[i] + zv[i]);
  }

  const std::vector<Peak> peaks = extract_peaks(fused, cfg);

  // Read-off: each peak inherits the identity recorded at (about) the same cell
  // of Z, claimed in descending peak score.
  std::vector<bool> claimed(prev.size(), false);
  StepResult res;
  res.state.grid = g;
  res.state.next_id = state.next_id;
  res.state.frame = state.frame + 1;
  res.tracks.frame = state.frame + 1;
  for (const Peak& p : peaks) {
    const Vec2 peak_center = cell_center(g, p.cell);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (claimed[i] || !entry_cell[i] || prev[i].class_id != p.class_id) continue;
      const double dr = entry_cell[i]->row - p.cell.row;
      const double dc = entry_cell[i]->col - p.cell.col;
      if (std::hypot(dr, dc) > cfg.read_radius) continue;
      const double d = (prev[i].center - peak_center).norm();
      if (d < best_dist || (d == best_dist && prev[i].track_id < prev[best].track_id)) {
        best = static_cast<int>(i);
        best_dist = d;
      }
    }

    const Vec2 motion = out.motion_at(p.cell);
    TrackEntry e;
    if (best >= 0) {
      claimed[best] = true;
      e = prev[best];
      e.center = e.center + motion;
      ++e.age;
    } else {
      e.track_id = res.state.next_id++;
      e.class_id = p.class_id;
      e.center = peak_center + motion;
      e.age = 0;
    }
    e.score = p.score;
    e.last_motion = motion;
    e.box = detail::box_from_regression(out, p.cell, e.center, p.class_id);
    const bool coasting = out.centerness.at(p.class_id, p.cell) < cfg.tau;
    res.state.entries.push_back(e);
    if (!coasting || cfg.emit_coasting) {
      res.tracks.tracks.push_back(detail::make_report(e, coasting, cfg.frame_dt));
    }
  }
  return res;
}

/// Runs init on the first output and step on the rest. `ego_poses` are world
/// poses of the ego vehicle, one per output.
inline std::vector<FrameTracks> run_sequence(std::span<const HeadOutput> outputs,
                                             std::span<const Pose2D> ego_poses,
                                             const TrackerConfig& cfg) {
  if (outputs.size() != ego_poses.size()) {
    throw Error("run_sequence: outputs and ego poses differ in length");
  }
  std::vector<FrameTracks> result;
  if (outputs.empty()) return result;
  StepResult r = init(outputs[0], cfg);
  result.push_back(r.tracks);
  for (std::size_t t = 1; t < outputs.size(); ++t) {
    r = step(r.state, relative_pose(ego_poses[t - 1], ego_poses[t]), outputs[t], cfg);
    result.push_back(r.tracks);
  }
  return result;
}

}  // namespace simtrack
