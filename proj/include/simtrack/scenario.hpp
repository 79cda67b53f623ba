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
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simtrack/geometry.hpp"
#include "simtrack/rng.hpp"

namespace simtrack {

inline constexpr int kCar = 0;
inline constexpr int kPedestrian = 1;
inline constexpr int kBicycle = 2;
inline constexpr int kNumClasses = 3;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "car", "pedestrian", "bicycle"};

inline std::string class_name(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) return "class" + std::to_string(class_id);
  return std::string(kClassNames[class_id]);
}

inline std::optional<int> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return i;
  }
  return std::nullopt;
}

struct Waypoint {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct ObjectSpec {
  int track_id = 0;
  int class_id = kCar;
  BoxSize size;
  int birth_frame = 0;
  int death_frame = 0;  // last frame the object exists
  std::vector<Waypoint> waypoints;

  bool alive_at(int frame) const { return frame >= birth_frame && frame <= death_frame; }

  // World pose at a frame; linear in position and yaw between waypoints and
  // clamped outside them.
  Pose2D pose_at(int frame) const {
    if (waypoints.empty()) throw Error("object has no waypoints");
    if (frame <= waypoints.front().frame) {
      const auto& w = waypoints.front();
      return {w.x, w.y, normalize_angle(w.yaw)};
    }
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      const Waypoint& a = waypoints[i - 1];
      const Waypoint& b = waypoints[i];
      if (frame <= b.frame) {
        const double s = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
        const double dyaw = normalize_angle(b.yaw - a.yaw);
        return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                normalize_angle(a.yaw + s * dyaw)};
      }
    }
    const auto& w = waypoints.back();
    return {w.x, w.y, normalize_angle(w.yaw)};
  }

  void validate() const {
    if (birth_frame > death_frame) throw Error("object: birth_frame > death_frame");
    if (!(size.w > 0 && size.l > 0 && size.h > 0)) throw Error("object: non-positive size");
    if (waypoints.empty()) throw Error("object: no waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (waypoints[i].frame <= waypoints[i - 1].frame) {
        throw Error("object: waypoint frames must increase");
      }
    }
    if (waypoints.front().frame > birth_frame || waypoints.back().frame < death_frame) {
      throw Error("object: waypoints do not cover the lifetime");
    }
  }
};

struct Scenario {
  int frames = 0;
  double dt = 0.5;
  std::vector<Pose2D> ego;
  std::vector<ObjectSpec> objects;
  std::uint64_t seed = 0;
};

struct GtObject {
  int track_id = 0;
  Box3D box;       // ego frame
  Vec2 velocity;   // m/s, ego frame axes
  double visibility = 1.0;
};

struct FrameGroundTruth {
  int frame = 0;
  std::vector<GtObject> objects;
};

struct SensorConfig {
  int num_beams = 720;
  double max_range = 80.0;
  int points_per_hit = 1;
  double noise_sigma = 0.02;
};

struct ScenarioConfig {
  int frames = 40;
  double dt = 0.5;
  int min_objects = 6;
  int max_objects = 12;
  std::array<double, kNumClasses> class_mix = {0.5, 0.3, 0.2};
  std::array<BoxSize, kNumClasses> class_sizes = {
      BoxSize{1.9, 4.5, 1.7}, BoxSize{0.7, 0.7, 1.8}, BoxSize{0.6, 1.8, 1.4}};
  std::array<double, kNumClasses> speed_min = {0.0, 0.0, 0.0};
  std::array<double, kNumClasses> speed_max = {8.0, 1.5, 5.0};
  double birth_prob = 0.25;
  double death_prob = 0.25;
  bool lifecycle_events = true;
  int occluders = 0;
  double ego_speed = 3.0;
  double ego_yaw_rate = 0.0;
  double spawn_radius = 35.0;
  double min_spawn_radius = 8.0;
  double min_separation = 2.0;
  double ego_clearance = 3.0;
  int max_attempts = 200;
  std::vector<ObjectSpec> explicit_objects;  // appended verbatim
  std::vector<Pose2D> explicit_ego;          // replaces the generated path

  void validate() const {
    if (frames <= 0) throw Error("scenario: frames must be positive");
    if (!(dt > 0.0)) throw Error("scenario: dt must be positive");
    if (min_objects < 0 || max_objects < min_objects) {
      throw Error("scenario: invalid object count range");
    }
    double mix = 0.0;
    for (double w : class_mix) {
      if (w < 0.0) throw Error("scenario: negative class_mix weight");
      mix += w;
    }
    if (mix <= 0.0 && max_objects > 0) throw Error("scenario: empty class_mix");
    if (lifecycle_events && frames < 4 && max_objects > 0) {
      throw Error("scenario: lifecycle_events needs at least 4 frames");
    }
    if (!explicit_ego.empty() && static_cast<int>(explicit_ego.size()) != frames) {
      throw Error("scenario: explicit ego length must equal frames");
    }
    for (int c = 0; c < kNumClasses; ++c) {
      if (speed_min[c] < 0 || speed_max[c] < speed_min[c]) {
        throw Error("scenario: invalid speed range for " + class_name(c));
      }
    }
    if (birth_prob < 0 || birth_prob > 1 || death_prob < 0 || death_prob > 1) {
      throw Error("scenario: probabilities must lie in [0, 1]");
    }
  }
};

namespace detail {

inline std::vector<Pose2D> ego_path(const ScenarioConfig& cfg) {
  if (!cfg.explicit_ego.empty()) return cfg.explicit_ego;
  std::vector<Pose2D> ego;
  ego.reserve(cfg.frames);
  Pose2D p;
  for (int t = 0; t < cfg.frames; ++t) {
    ego.push_back(p);
    const double mid = p.yaw + 0.5 * cfg.ego_yaw_rate * cfg.dt;
    p = {p.x + cfg.ego_speed * cfg.dt * std::cos(mid),
         p.y + cfg.ego_speed * cfg.dt * std::sin(mid),
         normalize_angle(p.yaw + cfg.ego_yaw_rate * cfg.dt)};
  }
  return ego;
}

inline double half_diagonal(const BoxSize& s) { return 0.5 * std::hypot(s.w, s.l); }

inline bool placement_ok(const ObjectSpec& cand, const std::vector<ObjectSpec>& placed,
                         const std::vector<Pose2D>& ego, const ScenarioConfig& cfg) {
  for (int t = cand.birth_frame; t <= cand.death_frame; ++t) {
    const Pose2D p = cand.pose_at(t);
    const Vec2 c{p.x, p.y};
    if ((c - ego[t].translation()).norm() < cfg.ego_clearance + half_diagonal(cand.size)) {
      return false;
    }
    for (const ObjectSpec& o : placed) {
      if (!o.alive_at(t)) continue;
      const Pose2D q = o.pose_at(t);
      // Circumscribed-circle gap, conservative for any pair of headings.
      if ((c - Vec2{q.x, q.y}).norm() <
          cfg.min_separation + half_diagonal(cand.size) + half_diagonal(o.size)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Deterministic synthetic world for a (config, seed) pair.
inline Scenario generate(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_stream(seed, "scenario");
  Scenario s;
  s.frames = cfg.frames;
  s.dt = cfg.dt;
  s.seed = seed;
  s.ego = detail::ego_path(cfg);

  std::set<int> used_ids;
  for (const ObjectSpec& o : cfg.explicit_objects) {
    o.validate();
    if (!used_ids.insert(o.track_id).second) throw Error("scenario: duplicate track_id");
    if (o.death_frame >= cfg.frames) throw Error("scenario: object outlives the scenario");
    s.objects.push_back(o);
  }
  int next_id = used_ids.empty() ? 0 : *used_ids.rbegin() + 1;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  for (int k = 0; k < cfg.occluders; ++k) {
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      ObjectSpec o;
      o.track_id = next_id;
      o.class_id = kCar;
      o.size = {2.5, 10.0, 3.5};
      o.birth_frame = 0;
      o.death_frame = cfg.frames - 1;
      const double r = uniform(cfg.min_spawn_radius, cfg.spawn_radius);
      const double th = uniform(-kPi, kPi);
      const Vec2 c = transform_point(s.ego[0], {r * std::cos(th), r * std::sin(th)});
      o.waypoints = {{0, c.x, c.y, uniform(-kPi, kPi)}};
      if (detail::placement_ok(o, s.objects, s.ego, cfg)) {
        s.objects.push_back(o);
        ++next_id;
        break;
      }
    }
  }

  std::discrete_distribution<int> class_dist(cfg.class_mix.begin(), cfg.class_mix.end());
  const int n = cfg.max_objects > 0 ? uniform_int(cfg.min_objects, cfg.max_objects) : 0;
  const int forced = std::max(1, cfg.frames / 4);
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      ObjectSpec o;
      o.track_id = next_id;
      o.class_id = class_dist(rng);
      o.size = cfg.class_sizes[o.class_id];
      o.birth_frame = 0;
      o.death_frame = cfg.frames - 1;
      if (cfg.frames > 2 && unit(rng) < cfg.birth_prob) {
        o.birth_frame = uniform_int(1, cfg.frames - 2);
      }
      if (o.birth_frame < cfg.frames - 2 && unit(rng) < cfg.death_prob) {
        o.death_frame = uniform_int(o.birth_frame + 1, cfg.frames - 2);
      }
      if (cfg.lifecycle_events && i == 0) {
        o.birth_frame = forced;
        o.death_frame = cfg.frames - 1;
      } else if (cfg.lifecycle_events && i == 1) {
        o.birth_frame = 0;
        o.death_frame = cfg.frames - 1 - forced;
      }
      const double r = uniform(cfg.min_spawn_radius, cfg.spawn_radius);
      const double th = uniform(-kPi, kPi);
      const Vec2 c0 =
          transform_point(s.ego[o.birth_frame], {r * std::cos(th), r * std::sin(th)});
      const double heading = uniform(-kPi, kPi);
      const double speed = uniform(cfg.speed_min[o.class_id], cfg.speed_max[o.class_id]);
      const double span = (o.death_frame - o.birth_frame) * cfg.dt;
      const Vec2 c1 = c0 + Vec2{std::cos(heading), std::sin(heading)} * (speed * span);
      o.waypoints = {{o.birth_frame, c0.x, c0.y, heading}};
      if (o.death_frame > o.birth_frame) {
        o.waypoints.push_back({o.death_frame, c1.x, c1.y, heading});
      }
      if (detail::placement_ok(o, s.objects, s.ego, cfg)) {
        s.objects.push_back(o);
        ++next_id;
        break;
      }
    }
  }
  return s;
}

namespace detail {

// Entry distance of the ray origin + t * dir into the box footprint, if hit.
inline std::optional<double> ray_box_hit(Vec2 dir, const Box3D& b) {
  const Vec2 o = rotate(Vec2{0.0, 0.0} - b.bev_center(), -b.yaw);
  const Vec2 d = rotate(dir, -b.yaw);
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  const double half[2] = {0.5 * b.size.l, 0.5 * b.size.w};
  const double oc[2] = {o.x, o.y};
  const double dc[2] = {d.x, d.y};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(dc[k]) < 1e-15) {
      if (std::abs(oc[k]) > half[k]) return std::nullopt;
      continue;
    }
    double a = (-half[k] - oc[k]) / dc[k];
    double c = (half[k] - oc[k]) / dc[k];
    if (a > c) std::swap(a, c);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, c);
  }
  if (t_lo > t_hi || t_hi < 0.0) return std::nullopt;
  return std::max(t_lo, 0.0);
}

inline double beam_angle(int k, int num_beams) {
  return -kPi + (k + 0.5) * (2.0 * kPi / num_beams);
}

struct BeamHit {
  int object = -1;  // index into the box list, -1 for no return
  double range = 0.0;
};

// Nearest in-range footprint per beam, plus per-object counts of beams that
// intersect it in range.
struct BeamCast {
  std::vector<BeamHit> nearest;
  std::vector<int> subtended;
  std::vector<int> visible;
};

inline BeamCast cast_beams(const std::vector<Box3D>& boxes, const SensorConfig& sensor) {
  if (sensor.num_beams < 1) throw Error("sensor: num_beams must be >= 1");
  BeamCast cast;
  cast.nearest.assign(sensor.num_beams, {});
  cast.subtended.assign(boxes.size(), 0);
  cast.visible.assign(boxes.size(), 0);
  for (int k = 0; k < sensor.num_beams; ++k) {
    const double a = beam_angle(k, sensor.num_beams);
    const Vec2 dir{std::cos(a), std::sin(a)};
    BeamHit best{-1, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto hit = ray_box_hit(dir, boxes[i]);
      if (!hit || *hit > sensor.max_range) continue;
      ++cast.subtended[i];
      if (*hit < best.range) best = {static_cast<int>(i), *hit};
    }
    if (best.object >= 0) {
      cast.nearest[k] = best;
      ++cast.visible[best.object];
    }
  }
  return cast;
}

inline std::vector<double> visibilities(const std::vector<Box3D>& boxes,
                                        const SensorConfig& sensor) {
  const BeamCast cast = cast_beams(boxes, sensor);
  std::vector<double> vis(boxes.size(), 0.0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (cast.subtended[i] > 0) {
      vis[i] = static_cast<double>(cast.visible[i]) / cast.subtended[i];
      continue;
    }
    // Thin object between beams: decide by the ray through its center.
    const Vec2 c = boxes[i].bev_center();
    const double range = c.norm();
    if (range > sensor.max_range || range == 0.0) continue;
    const Vec2 dir = c / range;
    const auto own = ray_box_hit(dir, boxes[i]);
    if (!own) continue;
    bool blocked = false;
    for (std::size_t j = 0; j < boxes.size() && !blocked; ++j) {
      if (j == i) continue;
      const auto h = ray_box_hit(dir, boxes[j]);
      blocked = h && *h < *own;
    }
    vis[i] = blocked ? 0.0 : 1.0;
  }
  return vis;
}

inline std::vector<Box3D> alive_boxes_ego(const Scenario& s, int t, std::vector<int>* ids) {
  const Pose2D to_ego = invert(s.ego[t]);
  std::vector<Box3D> boxes;
  for (const ObjectSpec& o : s.objects) {
    if (!o.alive_at(t)) continue;
    const Pose2D wp = o.pose_at(t);
    const Pose2D ep = compose(to_ego, wp);
    Box3D b;
    b.center = {ep.x, ep.y, 0.5 * o.size.h};
    b.size = o.size;
    b.yaw = ep.yaw;
    b.class_id = o.class_id;
    boxes.push_back(b);
    if (ids) ids->push_back(o.track_id);
  }
  return boxes;
}

inline void check_frame(const Scenario& s, int t) {
  if (t < 0 || t >= s.frames) {
    throw Error("frame " + std::to_string(t) + " out of range [0, " +
                std::to_string(s.frames) + ")");
  }
}

}  // namespace detail

/// Alive objects at frame t in the ego frame of t. Occluded objects are kept;
/// their visibility is reported alongside.
inline FrameGroundTruth ground_truth_at(const Scenario& s, int t,
                                        const SensorConfig& sensor = {}) {
  detail::check_frame(s, t);
  std::vector<int> ids;
  std::vector<Box3D> boxes = detail::alive_boxes_ego(s, t, &ids);
  const std::vector<double> vis = detail::visibilities(boxes, sensor);
  FrameGroundTruth gt;
  gt.frame = t;
  std::size_t k = 0;
  for (const ObjectSpec& o : s.objects) {
    if (!o.alive_at(t)) continue;
    Vec2 v_world;
    if (t > o.birth_frame) {
      const Pose2D a = o.pose_at(t - 1);
      const Pose2D b = o.pose_at(t);
      v_world = Vec2{b.x - a.x, b.y - a.y} / s.dt;
    } else if (t < o.death_frame) {
      const Pose2D a = o.pose_at(t);
      const Pose2D b = o.pose_at(t + 1);
      v_world = Vec2{b.x - a.x, b.y - a.y} / s.dt;
    }
    GtObject g;
    g.track_id = o.track_id;
    g.box = boxes[k];
    g.velocity = rotate(v_world, -s.ego[t].yaw);
    g.box.velocity = g.velocity;
    g.visibility = vis[k];
    gt.objects.push_back(g);
    ++k;
  }
  return gt;
}

/// Fraction of the object's subtended beams on which it is the nearest return.
inline double visibility(const Scenario& s, int t, int track_id,
                         const SensorConfig& sensor = {}) {
  detail::check_frame(s, t);
  std::vector<int> ids;
  const std::vector<Box3D> boxes = detail::alive_boxes_ego(s, t, &ids);
  const auto it = std::find(ids.begin(), ids.end(), track_id);
  if (it == ids.end()) {
    throw Error("object " + std::to_string(track_id) + " not alive at frame " +
                std::to_string(t));
  }
  return detail::visibilities(boxes, sensor)[it - ids.begin()];
}

/// Single-sweep BEV ray cast from the ego origin. Position noise is Gaussian
/// truncated at 3 sigma in norm.
inline std::vector<Point5D> sample_lidar(const Scenario& s, int t, const SensorConfig& sensor,
                                         Rng& rng) {
  detail::check_frame(s, t);
  const std::vector<Box3D> boxes = detail::alive_boxes_ego(s, t, nullptr);
  const detail::BeamCast cast = detail::cast_beams(boxes, sensor);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point5D> cloud;
  for (int k = 0; k < sensor.num_beams; ++k) {
    const detail::BeamHit& hit = cast.nearest[k];
    if (hit.object < 0) continue;
    const Box3D& b = boxes[hit.object];
    const double a = detail::beam_angle(k, sensor.num_beams);
    const Vec2 p{hit.range * std::cos(a), hit.range * std::sin(a)};
    for (int j = 0; j < sensor.points_per_hit; ++j) {
      Vec2 n{noise(rng), noise(rng)};
      if (n.norm() > 3.0) n = n * (3.0 / n.norm());
      const Vec2 q = p + n * sensor.noise_sigma;
      const double z = b.center.z + (unit(rng) - 0.5) * b.size.h;
      cloud.push_back({q.x, q.y, z, unit(rng), 0.0});
    }
  }
  return cloud;
}

/// Keeps the objects whose BEV center falls inside the grid.
inline FrameGroundTruth crop_to_grid(const FrameGroundTruth& gt, const GridSpec& g) {
  FrameGroundTruth out;
  out.frame = gt.frame;
  for (const GtObject& o : gt.objects) {
    if (in_grid(g, o.box.bev_center())) out.objects.push_back(o);
  }
  return out;
}

/// Expresses a frame's objects in another ego frame (e.g. t-1 boxes in the
/// frame of t). Velocities are rotated, not re-differenced.
inline FrameGroundTruth transform_frame(const FrameGroundTruth& gt, const Pose2D& rel) {
  FrameGroundTruth out = gt;
  for (GtObject& o : out.objects) {
    const Vec2 c = transform_point(rel, o.box.bev_center());
    o.box.center.x = c.x;
    o.box.center.y = c.y;
    o.box.yaw = normalize_angle(o.box.yaw + rel.yaw);
    o.velocity = rotate(o.velocity, rel.yaw);
    o.box.velocity = o.velocity;
  }
  return out;
}

}  // namespace simtrack
