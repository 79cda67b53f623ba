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


#include <gtest/gtest.h>

#include <cmath>

#include "simtrack/oracle_head.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {
namespace {

HeadOutput PeakAt(const GridSpec& g, int cls, CellIndex c, double peak, Vec2 motion = {}) {
  HeadOutput out = HeadOutput::zeros(g);
  render_gaussian(out.centerness, cls, c, 2, peak);
  for (int dr = -2; dr <= 2; ++dr) {
    for (int dc = -2; dc <= 2; ++dc) {
      const CellIndex n{c.row + dr, c.col + dc};
      if (!g.contains(n)) continue;
      out.motion.at(0, n) = motion.x;
      out.motion.at(1, n) = motion.y;
      out.regression.at(kRegCos, n) = 1.0;
    }
  }
  return out;
}

TEST(ExtractPeaks, EmptyMap) {
  EXPECT_TRUE(extract_peaks(make_centerness_map(GridSpec{}), TrackerConfig{}).empty());
}

TEST(ExtractPeaks, SingleGaussianGivesItsCenter) {
  CenternessMap m = make_centerness_map(GridSpec{});
  render_gaussian(m, 1, {30, 40}, 2, 1.0);
  const auto p = extract_peaks(m, TrackerConfig{});
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].cell, (CellIndex{30, 40}));
  EXPECT_EQ(p[0].class_id, 1);
  EXPECT_EQ(p[0].score, 1.0);
}

TEST(ExtractPeaks, TwoSeparatedGaussians) {
  CenternessMap m = make_centerness_map(GridSpec{});
  render_gaussian(m, 0, {50, 50}, 2, 1.0);
  render_gaussian(m, 0, {50, 60}, 2, 1.0);
  EXPECT_EQ(extract_peaks(m, TrackerConfig{}).size(), 2u);
}

TEST(ExtractPeaks, ThresholdAndOrder) {
  CenternessMap m = make_centerness_map(GridSpec{});
  m.at(0, 10, 10) = 0.3;
  m.at(1, 90, 5) = 0.8;
  m.at(2, 60, 60) = 0.05;
  const auto p = extract_peaks(m, TrackerConfig{});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].score, 0.8);
  EXPECT_EQ(p[1].score, 0.3);
}

TEST(ExtractPeaks, PlateauKeepsOneCell) {
  CenternessMap m = make_centerness_map(GridSpec{});
  m.at(0, 20, 20) = 0.5;
  m.at(0, 20, 21) = 0.5;
  const auto p = extract_peaks(m, TrackerConfig{});
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].cell, (CellIndex{20, 20}));
}

TEST(Init, IdsFollowDescendingScore) {
  const GridSpec g;
  HeadOutput out = HeadOutput::zeros(g);
  render_gaussian(out.centerness, 0, {10, 10}, 2, 0.4);
  render_gaussian(out.centerness, 1, {100, 30}, 2, 0.9);
  render_gaussian(out.centerness, 2, {64, 64}, 2, 0.6);
  const StepResult r = init(out, TrackerConfig{});
  ASSERT_EQ(r.tracks.tracks.size(), 3u);
  EXPECT_EQ(r.tracks.tracks[0].track_id, 0);
  EXPECT_EQ(r.tracks.tracks[0].class_id, 1);
  EXPECT_EQ(r.tracks.tracks[1].class_id, 2);
  EXPECT_EQ(r.tracks.tracks[2].class_id, 0);
  EXPECT_EQ(r.state.next_id, 3);
  EXPECT_EQ(r.tracks.tracks[1].center, cell_center(g, {64, 64}));
}

TEST(Init, EmptyOutput) {
  const StepResult r = init(HeadOutput::zeros(GridSpec{}), TrackerConfig{});
  EXPECT_TRUE(r.state.entries.empty());
  EXPECT_TRUE(r.tracks.tracks.empty());
}

TEST(Step, WorkedReadOff) {
  const GridSpec g;
  TrackerState s;
  s.grid = g;
  s.next_id = 8;
  TrackEntry e;
  e.track_id = 7;
  e.class_id = kCar;
  e.center = cell_center(g, {50, 50});
  e.score = 0.9;
  s.entries = {e};
  const StepResult r =
      step(s, Pose2D::identity(), PeakAt(g, kCar, {50, 50}, 0.7, {2.0, 0.0}), TrackerConfig{});
  ASSERT_EQ(r.state.entries.size(), 1u);
  EXPECT_EQ(r.state.entries[0].track_id, 7);
  EXPECT_DOUBLE_EQ(r.state.entries[0].score, 0.8);
  EXPECT_DOUBLE_EQ(r.state.entries[0].center.x, cell_center(g, {50, 50}).x + 2.0);
  EXPECT_DOUBLE_EQ(r.state.entries[0].center.y, cell_center(g, {50, 50}).y);
  EXPECT_EQ(r.state.next_id, 8);
}

TEST(Step, UnsupportedTrackHalvesUntilBelowThreshold) {
  const GridSpec g;
  TrackerConfig cfg;
  StepResult r = init(PeakAt(g, kPedestrian, {70, 20}, 0.9), cfg);
  double s = 0.9;
  int steps = 0;
  while (!r.state.entries.empty()) {
    r = step(r.state, Pose2D::identity(), HeadOutput::zeros(g), cfg);
    s /= 2;
    ++steps;
    if (s >= cfg.tau) {
      ASSERT_EQ(r.state.entries.size(), 1u);
      EXPECT_EQ(r.state.entries[0].score, s);
      EXPECT_EQ(r.state.entries[0].track_id, 0);
      ASSERT_EQ(r.tracks.tracks.size(), 1u);
      EXPECT_TRUE(r.tracks.tracks[0].coasting);
    }
  }
  EXPECT_EQ(steps, 4);
}

TEST(Step, DecayLawForManyStartingScores) {
  const GridSpec g;
  for (double tau : {0.05, 0.1, 0.3}) {
    TrackerConfig cfg;
    cfg.tau = tau;
    for (double s0 = tau; s0 <= 1.0; s0 += 0.037) {
      StepResult r = init(PeakAt(g, kCar, {64, 64}, s0), cfg);
      int k = 0;
      double s = s0;
      while (!r.state.entries.empty()) {
        r = step(r.state, Pose2D::identity(), HeadOutput::zeros(g), cfg);
        ++k;
        s /= 2;
      }
      EXPECT_LT(s, tau);
      EXPECT_GE(s * 2, tau);
      EXPECT_EQ(k, static_cast<int>(std::floor(std::log2(s0 / tau))) + 1)
          << "s0 " << s0 << " tau " << tau;
    }
  }
}

TEST(Step, FreshPeakGetsNewId) {
  const GridSpec g;
  TrackerConfig cfg;
  StepResult r = init(PeakAt(g, kCar, {20, 20}, 0.9), cfg);
  r = step(r.state, Pose2D::identity(), PeakAt(g, kCar, {80, 80}, 0.9), cfg);
  std::vector<int> ids;
  for (const TrackEntry& e : r.state.entries) ids.push_back(e.track_id);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<int>{0, 1}));
}

TEST(Step, OtherClassDoesNotInheritIdentity) {
  const GridSpec g;
  TrackerConfig cfg;
  StepResult r = init(PeakAt(g, kCar, {40, 40}, 0.9), cfg);
  r = step(r.state, Pose2D::identity(), PeakAt(g, kBicycle, {40, 40}, 0.9), cfg);
  bool bike_new = false;
  for (const TrackEntry& e : r.state.entries) bike_new |= e.class_id == kBicycle && e.track_id == 1;
  EXPECT_TRUE(bike_new);
}

TEST(Step, EgoMotionMovesEntriesBeforeReadOff) {
  const GridSpec g;
  TrackerConfig cfg;
  StepResult r = init(PeakAt(g, kCar, {64, 74}, 0.9), cfg);  // 8 m ahead
  // Ego drives 4 m forward: the object now sits 4 m ahead.
  const Pose2D rel = relative_pose({0, 0, 0}, {4.0, 0, 0});
  r = step(r.state, rel, PeakAt(g, kCar, {64, 69}, 0.9), cfg);
  ASSERT_EQ(r.state.entries.size(), 1u);
  EXPECT_EQ(r.state.entries[0].track_id, 0);
  EXPECT_NEAR(r.state.entries[0].center.x, cell_center(g, {64, 74}).x - 4.0, 1e-12);
}

TEST(Step, CoastingHiddenWhenDisabled) {
  const GridSpec g;
  TrackerConfig cfg;
  cfg.emit_coasting = false;
  StepResult r = init(PeakAt(g, kCar, {64, 64}, 0.9), cfg);
  r = step(r.state, Pose2D::identity(), HeadOutput::zeros(g), cfg);
  EXPECT_EQ(r.state.entries.size(), 1u);
  EXPECT_TRUE(r.tracks.tracks.empty());
}

TEST(Step, GridMismatchThrows) {
  TrackerState s;
  s.grid = GridSpec{};
  GridSpec other;
  other.cell_size = 0.4;
  EXPECT_THROW(step(s, Pose2D::identity(), HeadOutput::zeros(other), TrackerConfig{}), Error);
}

Scenario StaticScene(int frames, int birth) {
  Scenario s;
  s.frames = frames;
  s.ego.assign(frames, Pose2D::identity());
  ObjectSpec a;
  a.track_id = 0;
  a.size = {1.9, 4.5, 1.7};
  a.death_frame = frames - 1;
  a.waypoints = {{0, 10, 5, 0}, {frames - 1, 10, 5, 0}};
  ObjectSpec b = a;
  b.track_id = 1;
  b.class_id = kPedestrian;
  b.size = {0.7, 0.7, 1.8};
  b.birth_frame = birth;
  b.waypoints = {{birth, -15, -3, 0}, {frames - 1, -15, -3, 0}};
  s.objects = {a, b};
  return s;
}

std::vector<HeadOutput> CleanHeads(const Scenario& s) {
  const GridSpec g;
  Rng rng(0);
  std::vector<HeadOutput> out;
  for (int t = 0; t < s.frames; ++t) {
    const FrameGroundTruth cur = ground_truth_at(s, t);
    out.push_back(t == 0 ? predict_single(cur, g, NoiseConfig{}, rng)
                         : predict_pair(ground_truth_at(s, t - 1), cur, g, NoiseConfig{}, rng));
  }
  return out;
}

TEST(RunSequence, LifecycleOfStaticScene) {
  const Scenario s = StaticScene(10, 5);
  const auto heads = CleanHeads(s);
  const auto tracks = run_sequence(heads, s.ego, TrackerConfig{});
  ASSERT_EQ(tracks.size(), 10u);
  for (int t = 0; t < 10; ++t) {
    ASSERT_EQ(tracks[t].tracks.size(), t < 5 ? 1u : 2u) << "frame " << t;
    EXPECT_EQ(tracks[t].frame, t);
    EXPECT_EQ(tracks[t].tracks[0].track_id, 0);
  }
  EXPECT_EQ(tracks[5].tracks[1].track_id, 1);
  EXPECT_EQ(tracks[9].tracks[1].track_id, 1);
}

TEST(RunSequence, SingleFrameEqualsInit) {
  const Scenario s = StaticScene(1, 0);
  const auto heads = CleanHeads(s);
  const auto tracks = run_sequence(heads, s.ego, TrackerConfig{});
  const StepResult r = init(heads[0], TrackerConfig{});
  ASSERT_EQ(tracks.size(), 1u);
  ASSERT_EQ(tracks[0].tracks.size(), r.tracks.tracks.size());
  for (std::size_t i = 0; i < r.tracks.tracks.size(); ++i) {
    EXPECT_EQ(tracks[0].tracks[i].track_id, r.tracks.tracks[i].track_id);
    EXPECT_EQ(tracks[0].tracks[i].center, r.tracks.tracks[i].center);
  }
}

TEST(RunSequence, LengthMismatchThrows) {
  const std::vector<HeadOutput> heads(2, HeadOutput::zeros(GridSpec{}));
  const std::vector<Pose2D> ego(3);
  EXPECT_THROW(run_sequence(heads, ego, TrackerConfig{}), Error);
}

TEST(RunSequence, Deterministic) {
  ScenarioConfig cfg;
  const Scenario s = generate(cfg, 21);
  NoiseConfig n;
  n.fp_rate = 1.0;
  n.score_sigma = 0.1;
  const GridSpec g;
  const auto make = [&] {
    Rng rng = make_stream(21, "noise");
    std::vector<HeadOutput> out;
    for (int t = 0; t < s.frames; ++t) {
      const auto cur = crop_to_grid(ground_truth_at(s, t), g);
      if (t == 0) {
        out.push_back(predict_single(cur, g, n, rng));
      } else {
        const auto prev = transform_frame(crop_to_grid(ground_truth_at(s, t - 1), g),
                                          relative_pose(s.ego[t - 1], s.ego[t]));
        out.push_back(predict_pair(prev, cur, g, n, rng));
      }
    }
    return run_sequence(out, s.ego, TrackerConfig{});
  };
  const auto a = make(), b = make();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    ASSERT_EQ(a[t].tracks.size(), b[t].tracks.size());
    for (std::size_t i = 0; i < a[t].tracks.size(); ++i) {
      EXPECT_EQ(a[t].tracks[i].track_id, b[t].tracks[i].track_id);
      EXPECT_EQ(a[t].tracks[i].center, b[t].tracks[i].center);
      EXPECT_EQ(a[t].tracks[i].score, b[t].tracks[i].score);
    }
  }
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrackerConfig{};
  c.read_radius = -1;
  EXPECT_THROW(c.validate(), Error);
  c = TrackerConfig{};
  c.nms_window = 4;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace simtrack
