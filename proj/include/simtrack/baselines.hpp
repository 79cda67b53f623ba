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

// Tracking-by-detection baselines: a center-distance greedy matcher with
// velocity back-propagation, and a constant-velocity Kalman tracker with
// Hungarian assignment. Both share the track-life rules (max_age, min_hits)
// that read-off tracking does without.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "simtrack/assignment.hpp"
#include "simtrack/bev_map.hpp"
#include "simtrack/geometry.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {

struct Detection {
  Box3D box;
  double score = 0.0;
  int class_id = 0;
  Vec2 velocity;  // m/s
};

/// Peaks of the raw head output turned into time-t detections. Peaks sit at
/// first-appear locations, so each center is advanced by its motion.
inline std::vector<Detection> detections_from_head(const HeadOutput& out, const GridSpec& g,
                                                   double tau, double frame_dt) {
  if (!(frame_dt > 0.0)) throw Error("detections_from_head: frame_dt must be positive");
  TrackerConfig peak_cfg;
  peak_cfg.tau = tau;
  std::vector<Detection> dets;
  for (const Peak& p : extract_peaks(out.centerness, peak_cfg)) {
    const Vec2 m = out.motion_at(p.cell);
    const Vec2 center = cell_center(g, p.cell) + m;
    Detection d;
    d.box = detail::box_from_regression(out, p.cell, center, p.class_id);
    d.score = p.score;
    d.class_id = p.class_id;
    d.velocity = m / frame_dt;
    d.box.velocity = d.velocity;
    dets.push_back(d);
  }
  return dets;
}

struct KfConfig {
  double q_pos = 0.05;  // m^2 per second
  double q_vel = 0.5;   // (m/s)^2 per second
  double r_pos = 0.25;  // m^2
  double init_vel_var = 4.0;
};

struct BaselineConfig {
  std::array<double, kNumClasses> max_dist = {4.0, 1.0, 2.5};  // car, pedestrian, bicycle
  int max_age = 3;
  int min_hits = 1;
  KfConfig kf;

  double gate(int class_id) const {
    if (class_id < 0 || class_id >= kNumClasses) return max_dist[0];
    return max_dist[class_id];
  }

  void validate() const {
    for (double d : max_dist) {
      if (!(d > 0.0)) throw Error("baseline: max_dist must be positive");
    }
    if (max_age < 0 || min_hits < 0) throw Error("baseline: max_age and min_hits must be >= 0");
    if (kf.q_pos < 0 || kf.q_vel < 0 || kf.r_pos < 0 || kf.init_vel_var < 0) {
      throw Error("baseline: Kalman noise terms must be >= 0");
    }
  }
};

struct KfState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();  // x, y, vx, vy
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
};

namespace detail {

inline void check_psd(const Eigen::Matrix4d& p) {
  if (!p.allFinite() || (p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error("kalman: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(p, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw Error("kalman: covariance is not PSD");
}

}  // namespace detail

inline KfState kf_predict(const KfState& s, double dt, const KfConfig& cfg = {}) {
  if (!(dt > 0.0)) throw Error("kalman: dt must be positive");
  detail::check_psd(s.covariance);
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  const Eigen::Vector4d q(cfg.q_pos, cfg.q_pos, cfg.q_vel, cfg.q_vel);
  KfState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose();
  out.covariance.diagonal() += q * dt;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

/// Position measurement update, Joseph form.
inline KfState kf_update(const KfState& s, Vec2 z, const KfConfig& cfg = {}) {
  detail::check_psd(s.covariance);
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * cfg.r_pos;
  const Eigen::Matrix2d innov_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain =
      s.covariance * h.transpose() * innov_cov.inverse();
  const Eigen::Vector2d innov = Eigen::Vector2d(z.x, z.y) - h * s.mean;
  KfState out;
  out.mean = s.mean + gain * innov;
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

inline KfState kf_transform(const KfState& s, const Pose2D& rel) {
  const Eigen::Rotation2Dd rot(rel.yaw);
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  t.topLeftCorner<2, 2>() = rot.toRotationMatrix();
  t.bottomRightCorner<2, 2>() = rot.toRotationMatrix();
  KfState out;
  out.mean = t * s.mean;
  out.mean(0) += rel.x;
  out.mean(1) += rel.y;
  out.covariance = t * s.covariance * t.transpose();
  return out;
}

struct BaselineTrack {
  int track_id = 0;
  int class_id = 0;
  Vec2 position;  // meters, ego frame of the latest step
  Vec2 velocity;  // m/s
  Box3D box;
  double score = 0.0;
  int misses = 0;  // consecutive unmatched steps
  int hits = 0;    // consecutive matched steps
  bool confirmed = false;
  KfState kf;
};

struct BaselineState {
  std::vector<BaselineTrack> tracks;
  int next_id = 0;
  int frame = -1;
};

struct BaselineStepResult {
  BaselineState state;
  FrameTracks tracks;
};

namespace detail {

inline TrackReport baseline_report(const BaselineTrack& t, double frame_dt) {
  TrackReport r;
  r.track_id = t.track_id;
  r.class_id = t.class_id;
  r.center = t.position;
  r.box = t.box;
  r.box.center.x = t.position.x;
  r.box.center.y = t.position.y;
  r.score = t.score;
  r.velocity = t.velocity;
  r.motion = t.velocity * frame_dt;
  r.box.velocity = t.velocity;
  return r;
}

// Applies matches, ages the rest and opens tentative tracks. `matched_det`
// holds the detection index per track or -1. Coasting is the caller's job.
inline BaselineStepResult finish_step(BaselineState state, std::vector<int> matched_det,
                                      std::span<const Detection> dets,
                                      const BaselineConfig& cfg, double frame_dt, bool kalman) {
  std::vector<bool> det_used(dets.size(), false);
  BaselineStepResult res;
  res.state.next_id = state.next_id;
  res.state.frame = state.frame + 1;
  res.tracks.frame = res.state.frame;
  for (std::size_t j = 0; j < state.tracks.size(); ++j) {
    BaselineTrack t = state.tracks[j];
    const int di = matched_det[j];
    if (di >= 0) {
      const Detection& d = dets[di];
      det_used[di] = true;
      if (kalman) {
        t.kf = kf_update(t.kf, d.box.bev_center(), cfg.kf);
        t.position = {t.kf.mean(0), t.kf.mean(1)};
        t.velocity = {t.kf.mean(2), t.kf.mean(3)};
      } else {
        t.position = d.box.bev_center();
        t.velocity = d.velocity;
      }
      t.box = d.box;
      t.score = d.score;
      t.misses = 0;
      ++t.hits;
      if (t.hits >= cfg.min_hits) t.confirmed = true;
      res.state.tracks.push_back(t);
      if (t.confirmed) res.tracks.tracks.push_back(baseline_report(t, frame_dt));
    } else {
      ++t.misses;
      t.hits = 0;
      if (t.misses > cfg.max_age) continue;
      res.state.tracks.push_back(t);
    }
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (det_used[i]) continue;
    const Detection& d = dets[i];
    BaselineTrack t;
    t.track_id = res.state.next_id++;
    t.class_id = d.class_id;
    t.position = d.box.bev_center();
    t.velocity = d.velocity;
    t.box = d.box;
    t.score = d.score;
    t.hits = 1;
    t.confirmed = t.hits >= cfg.min_hits;
    if (kalman) {
      t.kf.mean << t.position.x, t.position.y, t.velocity.x, t.velocity.y;
      t.kf.covariance = Eigen::Vector4d(cfg.kf.r_pos, cfg.kf.r_pos, cfg.kf.init_vel_var,
                                        cfg.kf.init_vel_var)
                            .asDiagonal();
    }
    res.state.tracks.push_back(t);
    if (t.confirmed) res.tracks.tracks.push_back(baseline_report(t, frame_dt));
  }
  return res;
}

}  // namespace detail

/// Greedy closest-first association. Detections are moved back by
/// velocity * frame_dt and matched, globally by ascending distance, to live
/// tracks of the same class within the class gate. Unmatched tracks coast at
/// constant velocity for up to max_age steps.
inline BaselineStepResult greedy_step(const BaselineState& state,
                                      std::span<const Detection> dets,
                                      const BaselineConfig& cfg, double frame_dt,
                                      const Pose2D& ego_rel = Pose2D::identity()) {
  cfg.validate();
  BaselineState s = state;
  for (BaselineTrack& t : s.tracks) {
    t.position = transform_point(ego_rel, t.position);
    t.velocity = rotate(t.velocity, ego_rel.yaw);
  }

  struct Pair {
    double dist;
    int det;
    int track;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Vec2 back = dets[i].box.bev_center() - dets[i].velocity * frame_dt;
    for (std::size_t j = 0; j < s.tracks.size(); ++j) {
      if (s.tracks[j].class_id != dets[i].class_id) continue;
      const double d = (back - s.tracks[j].position).norm();
      if (d > cfg.gate(dets[i].class_id)) continue;
      pairs.push_back({d, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.det, a.track) < std::tie(b.dist, b.det, b.track);
  });
  std::vector<int> matched_det(s.tracks.size(), -1);
  std::vector<bool> det_taken(dets.size(), false);
  for (const Pair& p : pairs) {
    if (det_taken[p.det] || matched_det[p.track] >= 0) continue;
    det_taken[p.det] = true;
    matched_det[p.track] = p.det;
  }
  for (std::size_t j = 0; j < s.tracks.size(); ++j) {
    if (matched_det[j] < 0) {
      s.tracks[j].position = s.tracks[j].position + s.tracks[j].velocity * frame_dt;
    }
  }
  return detail::finish_step(std::move(s), std::move(matched_det), dets, cfg, frame_dt, false);
}

/// Constant-velocity Kalman tracker with gated Hungarian assignment on the
/// predicted center distance.
inline BaselineStepResult kf_step(const BaselineState& state, std::span<const Detection> dets,
                                  const BaselineConfig& cfg, double frame_dt,
                                  const Pose2D& ego_rel = Pose2D::identity()) {
  cfg.validate();
  BaselineState s = state;
  for (BaselineTrack& t : s.tracks) {
    t.kf = kf_predict(kf_transform(t.kf, ego_rel), frame_dt, cfg.kf);
    t.position = {t.kf.mean(0), t.kf.mean(1)};
    t.velocity = {t.kf.mean(2), t.kf.mean(3)};
  }
  std::vector<int> matched_det(s.tracks.size(), -1);
  if (!s.tracks.empty() && !dets.empty()) {
    CostMatrix cost(static_cast<int>(s.tracks.size()), static_cast<int>(dets.size()));
    for (std::size_t j = 0; j < s.tracks.size(); ++j) {
      for (std::size_t i = 0; i < dets.size(); ++i) {
        const double d = (dets[i].box.bev_center() - s.tracks[j].position).norm();
        const bool ok = s.tracks[j].class_id == dets[i].class_id &&
                        d <= cfg.gate(dets[i].class_id);
        cost(static_cast<int>(j), static_cast<int>(i)) = ok ? d : kGatedCost;
      }
    }
    const Assignment a = hungarian(cost);
    for (std::size_t j = 0; j < s.tracks.size(); ++j) {
      const int i = a.row_to_col[j];
      if (i >= 0 && cost(static_cast<int>(j), i) < kGatedCost) matched_det[j] = i;
    }
  }
  return detail::finish_step(std::move(s), std::move(matched_det), dets, cfg, frame_dt, true);
}

enum class BaselineKind { kGreedy, kKalman };

/// Runs a baseline over a detection stream; `ego_poses` are world poses.
inline std::vector<FrameTracks> run_baseline(BaselineKind kind,
                                             std::span<const std::vector<Detection>> dets,
                                             std::span<const Pose2D> ego_poses,
                                             const BaselineConfig& cfg, double frame_dt) {
  if (dets.size() != ego_poses.size()) {
    throw Error("run_baseline: detections and ego poses differ in length");
  }
  std::vector<FrameTracks> out;
  BaselineState state;
  for (std::size_t t = 0; t < dets.size(); ++t) {
    const Pose2D rel =
        t == 0 ? Pose2D::identity() : relative_pose(ego_poses[t - 1], ego_poses[t]);
    BaselineStepResult r = kind == BaselineKind::kGreedy
                               ? greedy_step(state, dets[t], cfg, frame_dt, rel)
                               : kf_step(state, dets[t], cfg, frame_dt, rel);
    state = std::move(r.state);
    out.push_back(std::move(r.tracks));
  }
  return out;
}

}  // namespace simtrack
