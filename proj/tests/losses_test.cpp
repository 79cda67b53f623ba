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
#include <random>

#include "simtrack/losses.hpp"

namespace simtrack {
namespace {

std::vector<TargetCenter> OneCenter() { return {{0, {0, 0}, 0, AssignmentKind::kNewborn}}; }

CenternessMap Single(double v) {
  CenternessMap m(1, 1, 1);
  m.values()[0] = v;
  return m;
}

TEST(FocalLoss, ExactBinaryMatchIsZero) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.1);
  CenternessMap y(3, 8, 8);
  for (double& v : y.values()) v = coin(rng) ? 1.0 : 0.0;
  const auto c = OneCenter();
  EXPECT_NEAR(focal_loss(y, y, c), 0.0, 1e-20);
}

TEST(FocalLoss, PositiveCellAtHalf) {
  EXPECT_NEAR(focal_loss(Single(0.5), Single(1.0), OneCenter()), 0.25 * std::log(2.0), 1e-12);
  EXPECT_NEAR(focal_loss(Single(0.5), Single(1.0), OneCenter()), 0.173287, 1e-6);
}

TEST(FocalLoss, SoftTargetAtHalf) {
  EXPECT_NEAR(focal_loss(Single(0.5), Single(0.5), OneCenter()), 0.010830, 1e-6);
  EXPECT_NEAR(focal_loss(Single(0.5), Single(0.5), OneCenter()),
              std::pow(0.5, 4) * 0.25 * std::log(2.0), 1e-15);
}

TEST(FocalLoss, NormalizedByCenterCount) {
  std::vector<TargetCenter> c(4, OneCenter()[0]);
  EXPECT_NEAR(focal_loss(Single(0.5), Single(1.0), c), 0.25 * std::log(2.0) / 4, 1e-12);
}

TEST(FocalLoss, ErrorsOnShapeMismatchOrNoCenters) {
  EXPECT_THROW(focal_loss(CenternessMap(1, 2, 2), CenternessMap(1, 2, 3), OneCenter()), Error);
  EXPECT_THROW(focal_loss(Single(0.5), Single(1.0), {}), Error);
  EXPECT_THROW(focal_loss_grad(Single(0.5), Single(1.0), {}), Error);
}

TEST(FocalLoss, NonNegativeAndZeroOnlyOnBinaryMatch) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double t = u(rng) < 0.3 ? 1.0 : (u(rng) < 0.5 ? 0.0 : u(rng));
    const double y = u(rng);
    const double l = focal_loss(Single(y), Single(t), OneCenter());
    EXPECT_GE(l, 0.0);
    if (y > 1e-6 && y < 1 - 1e-6) {
      EXPECT_GT(l, 0.0) << "y " << y << " t " << t;
    }
  }
}

TEST(FocalLoss, ClampsExactZeroAndOne) {
  EXPECT_TRUE(std::isfinite(focal_loss(Single(0.0), Single(1.0), OneCenter())));
  EXPECT_TRUE(std::isfinite(focal_loss(Single(1.0), Single(0.0), OneCenter())));
}

double CentralDifference(double y, double t, double h = 1e-6) {
  return (focal_loss(Single(y + h), Single(t), OneCenter()) -
          focal_loss(Single(y - h), Single(t), OneCenter())) /
         (2 * h);
}

TEST(FocalLossGrad, MatchesFiniteDifferenceAtHalf) {
  for (double t : {0.5, 1.0, 0.0}) {
    const double g = focal_loss_grad(Single(0.5), Single(t), OneCenter()).values()[0];
    EXPECT_NEAR(g, CentralDifference(0.5, t), 1e-6 * std::abs(g)) << "target " << t;
  }
}

TEST(FocalLossGrad, VanishesNearPositiveOne) {
  const double g = focal_loss_grad(Single(1 - 1e-4), Single(1.0), OneCenter()).values()[0];
  EXPECT_LT(std::abs(g), 1e-7);
  EXPECT_NEAR(g, CentralDifference(1 - 1e-4, 1.0, 1e-7), 1e-6 * std::abs(g) + 1e-15);
}

TEST(FocalLossGrad, TinyAtEpsilonForNegative) {
  const LossConfig cfg;
  const double g = focal_loss_grad(Single(cfg.eps), Single(0.0), OneCenter()).values()[0];
  EXPECT_LT(std::abs(g), 1e-6);
}

TEST(FocalLossGrad, MatchesFiniteDifferenceOnRandomCells) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 3000; ++i) {
    const double y = u(rng);
    const double t = u(rng) < 0.3 ? 1.0 : (u(rng) < 0.3 ? 0.0 : u(rng));
    const double g = focal_loss_grad(Single(y), Single(t), OneCenter()).values()[0];
    EXPECT_NEAR(g, CentralDifference(y, t), 1e-5 * std::abs(g)) << "y " << y << " t " << t;
  }
}

TEST(MotionLoss, Examples) {
  MotionMap m(2, 4, 4), mt(2, 4, 4);
  const std::vector<TargetCenter> one = {{0, {1, 2}, 0, AssignmentKind::kTracked}};
  EXPECT_EQ(motion_loss(m, mt, one), 0.0);
  mt.at(0, 1, 2) = 1.0;
  mt.at(1, 1, 2) = -0.5;
  EXPECT_DOUBLE_EQ(motion_loss(m, mt, one), 1.5);

  MotionMap a(2, 4, 4), b(2, 4, 4);
  const std::vector<TargetCenter> two = {{0, {0, 0}, 0, AssignmentKind::kTracked},
                                         {1, {3, 3}, 1, AssignmentKind::kTracked}};
  b.at(0, 0, 0) = 1.0;
  b.at(1, 3, 3) = -3.0;
  EXPECT_DOUBLE_EQ(motion_loss(a, b, two), 2.0);
  EXPECT_THROW(motion_loss(a, b, {}), Error);
}

TEST(MotionLoss, ReadsOnlyCenterCells) {
  MotionMap m(2, 6, 6), mt(2, 6, 6);
  const std::vector<TargetCenter> c = {{0, {2, 2}, 0, AssignmentKind::kTracked}};
  m.at(0, 0, 0) = 50.0;
  mt.at(1, 5, 5) = -20.0;
  EXPECT_EQ(motion_loss(m, mt, c), 0.0);
}

TEST(RegLoss, Examples) {
  RegressionMaps s(6, 3, 3), st(6, 3, 3);
  const std::vector<TargetCenter> c = {{2, {1, 1}, 0, AssignmentKind::kNewborn}};
  EXPECT_EQ(reg_loss(s, st, c), 0.0);
  for (int k = 0; k < 6; ++k) st.at(k, 1, 1) = (k % 2 ? 0.1 : -0.1);
  EXPECT_NEAR(reg_loss(s, st, c), 0.6, 1e-12);
}

TEST(TotalLoss, Examples) {
  EXPECT_NEAR(total_loss({0.2, 0.4, 0.8}), 0.8, 1e-15);
  EXPECT_EQ(total_loss({0, 0, 0}), 0.0);
  LossConfig ones;
  ones.w_reg = 1.0;
  EXPECT_DOUBLE_EQ(total_loss({0.3, 1.7, 2.5}, ones), 0.3 + 1.7 + 2.5);
}

TEST(LossConfig, Validation) {
  LossConfig c;
  EXPECT_NO_THROW(c.validate());
  c.eps = 1e-3;
  EXPECT_THROW(c.validate(), Error);
  c = LossConfig{};
  c.alpha = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(FocalLoss, OrderOfSummationDoesNotMatter) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CenternessMap y(3, 16, 16), t(3, 16, 16);
  for (double& v : y.values()) v = u(rng);
  for (double& v : t.values()) v = u(rng) < 0.05 ? 1.0 : u(rng) * 0.5;
  CenternessMap yr(3, 16, 16), tr(3, 16, 16);
  const std::size_t n = y.values().size();
  for (std::size_t i = 0; i < n; ++i) {
    yr.values()[i] = y.values()[n - 1 - i];
    tr.values()[i] = t.values()[n - 1 - i];
  }
  const auto c = OneCenter();
  EXPECT_NEAR(focal_loss(y, t, c), focal_loss(yr, tr, c), 1e-12);
}

}  // namespace
}  // namespace simtrack
