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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace simtrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
};

inline Vec2 rotate(Vec2 v, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Rigid SE(2) transform. Maps coordinates expressed in the pose's local frame
// into the parent frame.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  static Pose2D identity() { return {}; }
  Vec2 translation() const { return {x, y}; }
};

inline Pose2D make_pose(double x, double y, double yaw) {
  return {x, y, normalize_angle(yaw)};
}

// Applies b, then a.
inline Pose2D compose(const Pose2D& a, const Pose2D& b) {
  const Vec2 t = a.translation() + rotate(b.translation(), a.yaw);
  return {t.x, t.y, normalize_angle(a.yaw + b.yaw)};
}

inline Pose2D invert(const Pose2D& p) {
  const Vec2 t = rotate(Vec2{-p.x, -p.y}, -p.yaw);
  return {t.x, t.y, normalize_angle(-p.yaw)};
}

inline Vec2 transform_point(const Pose2D& p, Vec2 pt) {
  return p.translation() + rotate(pt, p.yaw);
}

// Transform taking coordinates in `from`'s frame into `to`'s frame, both poses
// given in a common world frame.
inline Pose2D relative_pose(const Pose2D& from, const Pose2D& to) {
  return compose(invert(to), from);
}

struct Point5D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double r = 0.0;   // reflectance in [0, 1]
  double dt = 0.0;  // seconds relative to the current sweep, <= 0
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(Vec3, Vec3) = default;
};

// Box size convention: l runs along the heading, w across it.
struct BoxSize {
  double w = 1.0;
  double l = 1.0;
  double h = 1.0;
  friend bool operator==(BoxSize, BoxSize) = default;
};

struct Box3D {
  Vec3 center;
  BoxSize size;
  double yaw = 0.0;
  int class_id = 0;
  std::optional<Vec2> velocity;  // filled by trackers; not part of equality

  Vec2 bev_center() const { return {center.x, center.y}; }

  friend bool operator==(const Box3D& a, const Box3D& b) {
    return a.center == b.center && a.size == b.size && a.yaw == b.yaw &&
           a.class_id == b.class_id;
  }
};

inline double bev_center_distance(const Box3D& a, const Box3D& b) {
  return (a.bev_center() - b.bev_center()).norm();
}

// Four BEV corners in counter-clockwise order.
inline std::vector<Vec2> footprint_corners(const Box3D& b) {
  const double hl = 0.5 * b.size.l;
  const double hw = 0.5 * b.size.w;
  std::vector<Vec2> out;
  out.reserve(4);
  for (Vec2 local : {Vec2{hl, hw}, Vec2{-hl, hw}, Vec2{-hl, -hw}, Vec2{hl, -hw}}) {
    out.push_back(b.bev_center() + rotate(local, b.yaw));
  }
  return out;
}

// Whether pt lies inside the BEV footprint dilated by `margin` along each local
// axis.
inline bool footprint_contains(const Box3D& b, Vec2 pt, double margin = 0.0) {
  const Vec2 local = rotate(pt - b.bev_center(), -b.yaw);
  return std::abs(local.x) <= 0.5 * b.size.l + margin &&
         std::abs(local.y) <= 0.5 * b.size.w + margin;
}

struct CellIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
  friend auto operator<=>(CellIndex, CellIndex) = default;
};

// BEV raster. Rows index y, columns index x. Cells are half-open [low, high).
struct GridSpec {
  double x_min = -51.2;
  double x_max = 51.2;
  double y_min = -51.2;
  double y_max = 51.2;
  double cell_size = 0.8;
  int num_classes = 3;

  int width() const {
    return static_cast<int>(std::lround((x_max - x_min) / cell_size));
  }
  int height() const {
    return static_cast<int>(std::lround((y_max - y_min) / cell_size));
  }

  void validate() const {
    if (!(cell_size > 0.0)) throw Error("grid: cell_size must be positive");
    if (!(x_max > x_min) || !(y_max > y_min)) {
      throw Error("grid: range_max must exceed range_min");
    }
    const auto integral = [this](double lo, double hi) {
      const double n = (hi - lo) / cell_size;
      return std::abs(n - std::round(n)) < 1e-6;
    };
    if (!integral(x_min, x_max) || !integral(y_min, y_max)) {
      throw Error("grid: range is not an integer number of cells");
    }
    if (num_classes < 1) throw Error("grid: num_classes must be >= 1");
  }

  bool contains(CellIndex c) const {
    return c.row >= 0 && c.row < height() && c.col >= 0 && c.col < width();
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec default_grid() { return GridSpec{}; }

namespace detail {
// Absorbs representation error such as 51.2 / 0.8 = 63.999...
inline constexpr double kCellSnap = 1e-9;
}  // namespace detail

inline std::optional<CellIndex> world_to_cell(const GridSpec& g, Vec2 pt) {
  const double fc = (pt.x - g.x_min) / g.cell_size;
  const double fr = (pt.y - g.y_min) / g.cell_size;
  if (!std::isfinite(fc) || !std::isfinite(fr)) return std::nullopt;
  const CellIndex c{static_cast<int>(std::floor(fr + detail::kCellSnap)),
                    static_cast<int>(std::floor(fc + detail::kCellSnap))};
  if (!g.contains(c)) return std::nullopt;
  return c;
}

inline Vec2 cell_center(const GridSpec& g, CellIndex c) {
  return {g.x_min + (c.col + 0.5) * g.cell_size,
          g.y_min + (c.row + 0.5) * g.cell_size};
}

inline bool in_grid(const GridSpec& g, Vec2 pt) {
  return world_to_cell(g, pt).has_value();
}

// Per-pillar point count and mean relative timestamp.
struct PillarGrid {
  GridSpec grid;
  std::vector<int> count;
  std::vector<double> mean_dt;

  int at_count(CellIndex c) const {
    return count[static_cast<std::size_t>(c.row) * grid.width() + c.col];
  }
  double at_mean_dt(CellIndex c) const {
    return mean_dt[static_cast<std::size_t>(c.row) * grid.width() + c.col];
  }
};

inline PillarGrid pillarize(std::span<const Point5D> cloud, const GridSpec& g) {
  const std::size_t n = static_cast<std::size_t>(g.height()) * g.width();
  PillarGrid out{g, std::vector<int>(n, 0), std::vector<double>(n, 0.0)};
  for (const Point5D& p : cloud) {
    const auto cell = world_to_cell(g, {p.x, p.y});
    if (!cell) continue;
    const std::size_t i = static_cast<std::size_t>(cell->row) * g.width() + cell->col;
    ++out.count[i];
    out.mean_dt[i] += (p.dt - out.mean_dt[i]) / out.count[i];
  }
  return out;
}

}  // namespace simtrack
