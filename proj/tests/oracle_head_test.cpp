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

#include <algorithm>
#include <random>

#include "simtrack/oracle_head.hpp"
#include "simtrack/rng.hpp"

namespace simtrack {
namespace {

GtObject Object(int id, int cls, double x, double y, double vis = 1.0) {
  GtObject o;
  o.track_id = id;
  o.box.class_id = cls;
  o.box.center = {x, y, 0.8};
  o.box.size = {1.9, 4.5, 1.7};
  o.visibility = vis;
  return o;
}

FrameGroundTruth Frame(std::vector<GtObject> objects) {
  FrameGroundTruth f;
  f.objects = std::move(objects);
  return f;
}

template <typename Map>
bool SameValues(const Map& a, const Map& b) {
  return std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end());
}

TEST(PredictPair, ZeroNoiseEqualsTargets) {
  const GridSpec g;
  const FrameGroundTruth prev = Frame({Object(0, kCar, 3, 4), Object(1, kBicycle, -12, 20),
                                       Object(2, kPedestrian, 30, -7)});
  const FrameGroundTruth cur = Frame({Object(0, kCar, 4.2, 4.1), Object(1, kBicycle, -11, 19),
                                      Object(3, kPedestrian, -30, -30)});
  Rng rng(0);
  const HeadOutput out = predict_pair(prev, cur, g, NoiseConfig{}, rng);
  const TargetMaps t = build_targets(prev, cur, g);
  EXPECT_TRUE(SameValues(out.centerness, t.centerness));
  EXPECT_TRUE(SameValues(out.motion, t.motion));
  EXPECT_TRUE(SameValues(out.regression, t.regression));
}

TEST(PredictPair, OccludedTrackedObjectKeepsMotionWithoutScore) {
  const GridSpec g;
  const FrameGroundTruth prev = Frame({Object(0, kCar, 0, 0)});
  const FrameGroundTruth cur = Frame({Object(0, kCar, 1.5, 0.5, 0.0)});
  Rng rng(0);
  const HeadOutput out = predict_pair(prev, cur, g, NoiseConfig{}, rng);
  for (double v : out.centerness.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(out.motion_at({64, 64}), (Vec2{1.5, 0.5}));
  EXPECT_EQ(out.motion_at({65, 63}), (Vec2{1.5, 0.5}));
}

TEST(PredictPair, VisibilityScalesPeakAboveFloor) {
  const GridSpec g;
  const FrameGroundTruth cur = Frame({Object(0, kCar, 0, 0, 0.3)});
  NoiseConfig n;
  Rng rng(0);
  EXPECT_DOUBLE_EQ(predict_single(cur, g, n, rng).centerness.at(kCar, 64, 64), 0.3);
  n.visibility_floor = 0.6;
  EXPECT_DOUBLE_EQ(predict_single(cur, g, n, rng).centerness.at(kCar, 64, 64), 0.6);
}

TEST(PredictPair, PoissonFalsePositiveMean) {
  const GridSpec g;
  NoiseConfig n;
  n.fp_rate = 2.0;
  Rng rng = make_stream(11, "noise");
  long total = 0;
  const int frames = 10000;
  for (int i = 0; i < frames; ++i) {
    total += predict_pair_detailed(Frame({}), Frame({}), g, n, rng).false_positives;
  }
  const double mean = static_cast<double>(total) / frames;
  EXPECT_GE(mean, 1.9);
  EXPECT_LE(mean, 2.1);
}

TEST(PredictPair, FalsePositiveScoresInRange) {
  const GridSpec g;
  NoiseConfig n;
  n.fp_rate = 5.0;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const HeadOutput out = predict_single(Frame({}), g, n, rng);
    for (double v : out.centerness.values()) {
      EXPECT_LE(v, 0.5);
      EXPECT_GE(v, 0.0);
    }
  }
}

TEST(PredictSingle, EmptyFrameGivesZeroMap) {
  Rng rng(0);
  const HeadOutput out = predict_single(Frame({}), GridSpec{}, NoiseConfig{}, rng);
  for (double v : out.centerness.values()) EXPECT_EQ(v, 0.0);
}

TEST(PredictSingle, OneVisibleObjectGivesOneUnitPeak) {
  Rng rng(0);
  const HeadOutput out =
      predict_single(Frame({Object(0, kPedestrian, 7, -9)}), GridSpec{}, NoiseConfig{}, rng);
  int ones = 0;
  for (double v : out.centerness.values()) ones += v == 1.0;
  EXPECT_EQ(ones, 1);
}

TEST(PredictSingle, DropEverything) {
  NoiseConfig n;
  n.drop_prob = 1.0;
  Rng rng(0);
  const HeadOutput out = predict_single(
      Frame({Object(0, kCar, 1, 1), Object(1, kCar, -20, 5), Object(2, kBicycle, 9, 9)}),
      GridSpec{}, n, rng);
  for (double v : out.centerness.values()) EXPECT_EQ(v, 0.0);
}

TEST(PredictPair, DeterministicForSeed) {
  NoiseConfig n;
  n.score_sigma = 0.2;
  n.center_sigma = 0.4;
  n.drop_prob = 0.2;
  n.fp_rate = 1.5;
  n.motion_sigma = 0.1;
  const FrameGroundTruth prev = Frame({Object(0, kCar, 3, 4), Object(1, kCar, -5, -5)});
  const FrameGroundTruth cur = Frame({Object(0, kCar, 4, 4), Object(1, kCar, -4, -5)});
  Rng a = make_stream(5, "noise"), b = make_stream(5, "noise");
  for (int i = 0; i < 20; ++i) {
    const HeadOutput x = predict_pair(prev, cur, GridSpec{}, n, a);
    const HeadOutput y = predict_pair(prev, cur, GridSpec{}, n, b);
    EXPECT_TRUE(SameValues(x.centerness, y.centerness));
    EXPECT_TRUE(SameValues(x.motion, y.motion));
  }
}

TEST(PredictPair, ScoresStayInUnitInterval) {
  NoiseConfig n;
  n.score_sigma = 3.0;
  n.fp_rate = 1.0;
  Rng rng(9);
  std::vector<GtObject> objs;
  for (int i = 0; i < 12; ++i) objs.push_back(Object(i, i % 3, -40 + 7 * i, 3 * (i % 5)));
  for (int k = 0; k < 20; ++k) {
    const HeadOutput out = predict_pair(Frame(objs), Frame(objs), GridSpec{}, n, rng);
    for (double v : out.centerness.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(PredictPair, RemovingAnObjectLeavesDistantFootprintsAlone) {
  const GridSpec g;
  const GtObject a = Object(0, kCar, -20, -20), b = Object(1, kCar, 20, 20);
  Rng r1(0), r2(0);
  const HeadOutput both = predict_pair(Frame({a, b}), Frame({a, b}), g, NoiseConfig{}, r1);
  const HeadOutput only_b = predict_pair(Frame({b}), Frame({b}), g, NoiseConfig{}, r2);
  const CellIndex cb = *world_to_cell(g, {20, 20});
  for (int dr = -2; dr <= 2; ++dr) {
    for (int dc = -2; dc <= 2; ++dc) {
      const CellIndex c{cb.row + dr, cb.col + dc};
      EXPECT_EQ(both.centerness.at(kCar, c), only_b.centerness.at(kCar, c));
      EXPECT_EQ(both.regression.at(kRegL, c), only_b.regression.at(kRegL, c));
    }
  }
}

TEST(NoiseConfig, Validation) {
  NoiseConfig n;
  n.drop_prob = 1.5;
  EXPECT_THROW(n.validate(), Error);
  n = NoiseConfig{};
  n.fp_rate = -1;
  EXPECT_THROW(n.validate(), Error);
}

}  // namespace
}  // namespace simtrack
