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

#include <cstddef>
#include <span>
#include <vector>

#include "simtrack/geometry.hpp"

namespace simtrack {

/// Dense channel-major BEV tensor (channel, row, col). The tag parameter keeps
/// centerness, motion and regression maps from being mixed up.
template <typename Tag>
class BevMap {
 public:
  BevMap() = default;
  BevMap(int channels, int height, int width, double fill = 0.0)
      : channels_(channels),
        height_(height),
        width_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {}

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double& at(int channel, int row, int col) { return data_[index(channel, row, col)]; }
  double at(int channel, int row, int col) const {
    return data_[index(channel, row, col)];
  }
  double& at(int channel, CellIndex c) { return at(channel, c.row, c.col); }
  double at(int channel, CellIndex c) const { return at(channel, c.row, c.col); }

  std::span<double> plane(int channel) {
    return {data_.data() + channel * plane_size(), plane_size()};
  }
  std::span<const double> plane(int channel) const {
    return {data_.data() + channel * plane_size(), plane_size()};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const BevMap& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  bool contains(CellIndex c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }

  friend bool operator==(const BevMap&, const BevMap&) = default;

 private:
  std::size_t index(int channel, int row, int col) const {
    return (static_cast<std::size_t>(channel) * height_ + row) * width_ + col;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

struct CenternessTag {};
struct MotionTag {};
struct RegressionTag {};

/// Per-class score grid in [0, 1].
using CenternessMap = BevMap<CenternessTag>;
/// Two channels: dx, dy in meters (ego frame at t).
using MotionMap = BevMap<MotionTag>;
/// Six channels, see RegChannel.
using RegressionMaps = BevMap<RegressionTag>;

inline constexpr int kMotionChannels = 2;
inline constexpr int kRegressionChannels = 6;

enum RegChannel : int { kRegZ = 0, kRegW, kRegL, kRegH, kRegSin, kRegCos };

inline CenternessMap make_centerness_map(const GridSpec& g) {
  return CenternessMap(g.num_classes, g.height(), g.width());
}
inline MotionMap make_motion_map(const GridSpec& g) {
  return MotionMap(kMotionChannels, g.height(), g.width());
}
inline RegressionMaps make_regression_maps(const GridSpec& g) {
  return RegressionMaps(kRegressionChannels, g.height(), g.width());
}

/// One inference step's map triple.
struct HeadOutput {
  GridSpec grid;
  CenternessMap centerness;
  MotionMap motion;
  RegressionMaps regression;

  static HeadOutput zeros(const GridSpec& g) {
    return {g, make_centerness_map(g), make_motion_map(g), make_regression_maps(g)};
  }

  Vec2 motion_at(CellIndex c) const {
    return {motion.at(0, c), motion.at(1, c)};
  }

  friend bool operator==(const HeadOutput&, const HeadOutput&) = default;
};

}  // namespace simtrack
