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
#include <cmath>
#include <random>
#include <unordered_map>
#include <vector>

#include "simtrack/bev_map.hpp"
#include "simtrack/rng.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/targets.hpp"

namespace simtrack {

// Degradation model for the ground-truth-driven head.
struct NoiseConfig {
  double score_sigma = 0.0;
  double center_sigma = 0.0;  // meters
  double drop_prob = 0.0;
  double fp_rate = 0.0;       // Poisson mean per frame
  double motion_sigma = 0.0;  // meters per channel
  double visibility_floor = 0.0;

  void validate() const {
    if (score_sigma < 0 || center_sigma < 0 || fp_rate < 0 || motion_sigma < 0) {
      throw Error("noise: parameters must be non-negative");
    }
    if (drop_prob < 0 || drop_prob > 1) throw Error("noise: drop_prob must lie in [0, 1]");
    if (visibility_floor < 0 || visibility_floor > 1) {
      throw Error("noise: visibility_floor must lie in [0, 1]");
    }
  }
};

struct OraclePrediction {
  HeadOutput output;
  int false_positives = 0;
  int dropped = 0;
};

inline constexpr int kFalsePositiveRadius = 2;

/// Emulates a two-sweep head: renders the hybrid-time targets and degrades
/// them. A tracked object's score follows its visibility at t while its motion
/// and regression stay exact, so a fully occluded object keeps its footprint.
inline OraclePrediction predict_pair_detailed(const FrameGroundTruth& gt_prev,
                                              const FrameGroundTruth& gt_cur,
                                              const GridSpec& g, const NoiseConfig& noise,
                                              Rng& rng, const TargetConfig& tcfg = {}) {
  noise.validate();
  std::unordered_map<int, double> vis;
  for (const GtObject& o : gt_cur.objects) vis.emplace(o.track_id, o.visibility);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  OraclePrediction pred;
  std::vector<detail::RenderItem> items = detail::target_items(gt_prev, gt_cur, g, tcfg, nullptr);
  std::vector<detail::RenderItem> kept;
  kept.reserve(items.size());
  for (detail::RenderItem it : items) {
    // Fixed draw count per object keeps the stream aligned across configs.
    const double u_drop = unit(rng);
    const double n_score = normal(rng);
    const Vec2 n_center{normal(rng), normal(rng)};
    const Vec2 n_motion{normal(rng), normal(rng)};
    if (u_drop < noise.drop_prob) {
      ++pred.dropped;
      continue;
    }
    const double v = std::clamp(vis.at(it.track_id), noise.visibility_floor, 1.0);
    it.peak = std::clamp(v * (1.0 - std::abs(noise.score_sigma * n_score)), 0.0, 1.0);
    if (noise.center_sigma > 0.0) {
      const auto cell = world_to_cell(g, it.anchor + n_center * noise.center_sigma);
      if (!cell) continue;
      it.cell = *cell;
    }
    it.motion = it.motion + n_motion * noise.motion_sigma;
    kept.push_back(it);
  }

  pred.false_positives = std::poisson_distribution<int>(noise.fp_rate)(rng);
  for (int k = 0; k < pred.false_positives; ++k) {
    detail::RenderItem fp;
    fp.class_id = std::uniform_int_distribution<int>(0, g.num_classes - 1)(rng);
    fp.cell = {std::uniform_int_distribution<int>(0, g.height() - 1)(rng),
               std::uniform_int_distribution<int>(0, g.width() - 1)(rng)};
    fp.anchor = cell_center(g, fp.cell);
    fp.radius = kFalsePositiveRadius;
    fp.peak = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
    fp.regression = {0.5, 1.0, 1.0, 1.0, 0.0, 1.0};
    kept.push_back(fp);
  }

  detail::RenderedMaps maps = detail::render_items(g, kept);
  pred.output = {g, std::move(maps.centerness), std::move(maps.motion),
                 std::move(maps.regression)};
  return pred;
}

inline HeadOutput predict_pair(const FrameGroundTruth& gt_prev, const FrameGroundTruth& gt_cur,
                               const GridSpec& g, const NoiseConfig& noise, Rng& rng,
                               const TargetConfig& tcfg = {}) {
  return predict_pair_detailed(gt_prev, gt_cur, g, noise, rng, tcfg).output;
}

/// Single-sweep head for the first frame: every object is newborn.
inline HeadOutput predict_single(const FrameGroundTruth& gt0, const GridSpec& g,
                                 const NoiseConfig& noise, Rng& rng,
                                 const TargetConfig& tcfg = {}) {
  return predict_pair(FrameGroundTruth{}, gt0, g, noise, rng, tcfg);
}

}  // namespace simtrack
