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
#include <span>

#include "simtrack/bev_map.hpp"
#include "simtrack/targets.hpp"

namespace simtrack {

struct LossConfig {
  double alpha = 2.0;
  double beta = 4.0;
  double w_cen = 1.0;
  double w_mot = 1.0;
  double w_reg = 0.25;
  double eps = 1e-12;

  void validate() const {
    if (alpha < 0 || beta < 0) throw Error("loss: alpha and beta must be >= 0");
    if (!(eps > 0.0) || eps > 1e-4) throw Error("loss: eps must lie in (0, 1e-4]");
  }
};

struct LossParts {
  double centerness = 0.0;
  double motion = 0.0;
  double regression = 0.0;
};

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      c_ += (sum_ - t) + v;
    } else {
      c_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

namespace detail {

inline void check_loss_inputs(const CenternessMap& y, const CenternessMap& y_tgt,
                              std::span<const TargetCenter> centers) {
  if (!y.same_shape(y_tgt)) throw Error("focal_loss: shape mismatch");
  if (centers.empty()) throw Error("loss: no centers (N = 0)");
}

// Per-cell focal term f such that the loss is -(1/N) * sum(f).
inline double focal_term(double y, double tgt, const LossConfig& cfg) {
  y = std::clamp(y, cfg.eps, 1.0 - cfg.eps);
  if (tgt == 1.0) return std::pow(1.0 - y, cfg.alpha) * std::log(y);
  return std::pow(1.0 - tgt, cfg.beta) * std::pow(y, cfg.alpha) * std::log(1.0 - y);
}

inline double focal_term_derivative(double y, double tgt, const LossConfig& cfg) {
  y = std::clamp(y, cfg.eps, 1.0 - cfg.eps);
  const double a = cfg.alpha;
  if (tgt == 1.0) {
    const double dpow = a == 0.0 ? 0.0 : -a * std::pow(1.0 - y, a - 1.0) * std::log(y);
    return dpow + std::pow(1.0 - y, a) / y;
  }
  const double neg_w = std::pow(1.0 - tgt, cfg.beta);
  const double dpow = a == 0.0 ? 0.0 : a * std::pow(y, a - 1.0) * std::log(1.0 - y);
  return neg_w * (dpow - std::pow(y, a) / (1.0 - y));
}

template <typename Tag>
double center_l1(const BevMap<Tag>& pred, const BevMap<Tag>& tgt,
                 std::span<const TargetCenter> centers) {
  if (!pred.same_shape(tgt)) throw Error("l1 loss: shape mismatch");
  if (centers.empty()) throw Error("loss: no centers (N = 0)");
  CompensatedSum sum;
  for (const TargetCenter& c : centers) {
    for (int k = 0; k < pred.channels(); ++k) {
      sum.add(std::abs(tgt.at(k, c.cell) - pred.at(k, c.cell)));
    }
  }
  return sum.value() / static_cast<double>(centers.size());
}

}  // namespace detail

/// Penalty-reduced focal loss over every cell and class, normalized by the
/// number of rendered centers.
inline double focal_loss(const CenternessMap& y, const CenternessMap& y_tgt,
                         std::span<const TargetCenter> centers, const LossConfig& cfg = {}) {
  detail::check_loss_inputs(y, y_tgt, centers);
  CompensatedSum sum;
  const auto pv = y.values();
  const auto tv = y_tgt.values();
  for (std::size_t i = 0; i < pv.size(); ++i) sum.add(detail::focal_term(pv[i], tv[i], cfg));
  const double loss = -sum.value() / static_cast<double>(centers.size());
  return loss == 0.0 ? 0.0 : loss;  // no -0.0
}

/// d(focal_loss)/dY per cell, evaluated at the clamped prediction.
inline CenternessMap focal_loss_grad(const CenternessMap& y, const CenternessMap& y_tgt,
                                     std::span<const TargetCenter> centers,
                                     const LossConfig& cfg = {}) {
  detail::check_loss_inputs(y, y_tgt, centers);
  CenternessMap grad(y.channels(), y.height(), y.width());
  const auto pv = y.values();
  const auto tv = y_tgt.values();
  auto gv = grad.values();
  const double scale = -1.0 / static_cast<double>(centers.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    gv[i] = scale * detail::focal_term_derivative(pv[i], tv[i], cfg);
  }
  return grad;
}

/// L1 over the two motion channels at the center cells only.
inline double motion_loss(const MotionMap& m, const MotionMap& m_tgt,
                          std::span<const TargetCenter> centers) {
  return detail::center_l1(m, m_tgt, centers);
}

/// L1 over the six regression channels at the center cells only.
inline double reg_loss(const RegressionMaps& s, const RegressionMaps& s_tgt,
                       std::span<const TargetCenter> centers) {
  return detail::center_l1(s, s_tgt, centers);
}

inline double total_loss(const LossParts& parts, const LossConfig& cfg = {}) {
  return cfg.w_cen * parts.centerness + cfg.w_mot * parts.motion + cfg.w_reg * parts.regression;
}

/// All three terms of a head output against its targets.
inline LossParts loss_parts(const HeadOutput& out, const TargetMaps& tgt,
                            const LossConfig& cfg = {}) {
  return {focal_loss(out.centerness, tgt.centerness, tgt.centers, cfg),
          motion_loss(out.motion, tgt.motion, tgt.centers),
          reg_loss(out.regression, tgt.regression, tgt.centers)};
}

}  // namespace simtrack
