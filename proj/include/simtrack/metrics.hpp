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

// CLEAR-MOT accumulation, recall-averaged MOTA, and velocity error.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "simtrack/assignment.hpp"
#include "simtrack/geometry.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {

// Common currency for predictions and ground truth.
struct EvalObject {
  int id = 0;
  int class_id = 0;
  Vec2 center;
  Vec2 velocity;
  double score = 1.0;
  bool ignore = false;  // outside the evaluation range: never TP, FP or FN
};

using EvalFrame = std::vector<EvalObject>;
using EvalSequence = std::vector<EvalFrame>;

inline EvalSequence to_eval(std::span<const FrameTracks> tracks) {
  EvalSequence seq;
  for (const FrameTracks& f : tracks) {
    EvalFrame frame;
    for (const TrackReport& r : f.tracks) {
      frame.push_back({r.track_id, r.class_id, r.center, r.velocity, r.score});
    }
    seq.push_back(std::move(frame));
  }
  return seq;
}

inline EvalSequence to_eval(std::span<const FrameGroundTruth> gt) {
  EvalSequence seq;
  for (const FrameGroundTruth& f : gt) {
    EvalFrame frame;
    for (const GtObject& o : f.objects) {
      frame.push_back({o.track_id, o.box.class_id, o.box.bev_center(), o.velocity, 1.0});
    }
    seq.push_back(std::move(frame));
  }
  return seq;
}

inline EvalSequence filter_class(const EvalSequence& seq, int class_id) {
  EvalSequence out;
  for (const EvalFrame& f : seq) {
    EvalFrame g;
    for (const EvalObject& o : f) {
      if (o.class_id == class_id) g.push_back(o);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline EvalSequence filter_score(const EvalSequence& seq, double min_score) {
  EvalSequence out;
  for (const EvalFrame& f : seq) {
    EvalFrame g;
    for (const EvalObject& o : f) {
      if (o.score >= min_score) g.push_back(o);
    }
    out.push_back(std::move(g));
  }
  return out;
}

/// Flags objects farther than their class range from the ego origin.
inline EvalSequence mark_out_of_range(EvalSequence seq,
                                      const std::array<double, kNumClasses>& class_range) {
  for (EvalFrame& f : seq) {
    for (EvalObject& o : f) {
      const bool known = o.class_id >= 0 && o.class_id < kNumClasses;
      o.ignore = known && o.center.norm() > class_range[o.class_id];
    }
  }
  return seq;
}

struct FrameMatch {
  struct Pair {
    int gt = 0;    // index into the gt frame
    int pred = 0;  // index into the prediction frame
    double dist = 0.0;
  };
  std::vector<Pair> pairs;
};

/// One frame of CLEAR-MOT correspondence. Pairs recorded in `prev` (gt id to
/// prediction id) survive if still within the gate; the rest is solved by a
/// gated minimum-distance assignment. Classes never match across.
inline FrameMatch match_frame(const EvalFrame& preds, const EvalFrame& gts, double gate,
                              const std::unordered_map<int, int>& prev = {}) {
  if (!(gate > 0.0)) throw Error("match_frame: gate must be positive");
  FrameMatch out;
  std::vector<bool> gt_used(gts.size(), false), pred_used(preds.size(), false);
  std::unordered_map<int, int> pred_by_id;
  for (std::size_t j = 0; j < preds.size(); ++j) pred_by_id.emplace(preds[j].id, static_cast<int>(j));
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto p = prev.find(gts[i].id);
    if (p == prev.end()) continue;
    const auto q = pred_by_id.find(p->second);
    if (q == pred_by_id.end() || pred_used[q->second]) continue;
    const EvalObject& pr = preds[q->second];
    if (pr.class_id != gts[i].class_id) continue;
    const double d = (pr.center - gts[i].center).norm();
    if (d > gate) continue;
    gt_used[i] = true;
    pred_used[q->second] = true;
    out.pairs.push_back({static_cast<int>(i), q->second, d});
  }

  std::vector<int> rows, cols;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gt_used[i]) rows.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (!pred_used[j]) cols.push_back(static_cast<int>(j));
  }
  if (!rows.empty() && !cols.empty()) {
    CostMatrix cost(static_cast<int>(rows.size()), static_cast<int>(cols.size()), kGatedCost);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) {
        const EvalObject& g = gts[rows[a]];
        const EvalObject& p = preds[cols[b]];
        if (g.class_id != p.class_id) continue;
        const double d = (p.center - g.center).norm();
        if (d <= gate) cost(static_cast<int>(a), static_cast<int>(b)) = d;
      }
    }
    const Assignment asg = hungarian(cost);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const int b = asg.row_to_col[a];
      if (b < 0 || cost(static_cast<int>(a), b) >= kGatedCost) continue;
      out.pairs.push_back({rows[a], cols[b], cost(static_cast<int>(a), b)});
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const FrameMatch::Pair& x, const FrameMatch::Pair& y) { return x.gt < y.gt; });
  return out;
}

struct MotStats {
  double mota = 0.0;
  double motp = 0.0;  // meters, mean over true positives; 0 when there are none
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long frags = 0;
  long tp = 0;
  long gt_count = 0;
  double dist_sum = 0.0;
  std::vector<int> matches_per_frame;

  double recall() const { return gt_count > 0 ? static_cast<double>(tp) / gt_count : 0.0; }

  void finalize() {
    const double denom = gt_count > 0 ? static_cast<double>(gt_count) : 1.0;
    mota = 1.0 - static_cast<double>(fp + fn + ids) / denom;
    motp = tp > 0 ? dist_sum / tp : 0.0;
  }

  /// Merges another sequence's counts (associative).
  MotStats& operator+=(const MotStats& o) {
    fp += o.fp;
    fn += o.fn;
    ids += o.ids;
    frags += o.frags;
    tp += o.tp;
    gt_count += o.gt_count;
    dist_sum += o.dist_sum;
    matches_per_frame.insert(matches_per_frame.end(), o.matches_per_frame.begin(),
                             o.matches_per_frame.end());
    finalize();
    return *this;
  }
};

// Per-TP callback: (gt, pred, dist).
using TpVisitor = std::function<void(const EvalObject&, const EvalObject&, double)>;

/// CLEAR-MOT over a sequence. Matching sees every object; ignored ground
/// truth absorbs its match silently and ignored predictions are never FPs.
inline MotStats clear_mot(const EvalSequence& preds, const EvalSequence& gts, double gate,
                          const TpVisitor& visit = {}) {
  if (preds.size() != gts.size()) throw Error("clear_mot: frame counts differ");
  MotStats st;
  std::unordered_map<int, int> last_id;      // gt id -> last matched prediction id
  std::unordered_map<int, bool> interrupted;  // gt id -> missed since its last match
  for (std::size_t t = 0; t < gts.size(); ++t) {
    const EvalFrame& g = gts[t];
    const EvalFrame& p = preds[t];
    const FrameMatch m = match_frame(p, g, gate, last_id);
    std::vector<bool> gt_hit(g.size(), false), pred_hit(p.size(), false);
    long tp = 0;
    for (const FrameMatch::Pair& pr : m.pairs) {
      gt_hit[pr.gt] = true;
      pred_hit[pr.pred] = true;
      const int gid = g[pr.gt].id;
      const int pid = p[pr.pred].id;
      if (g[pr.gt].ignore) {
        last_id[gid] = pid;
        continue;
      }
      const auto last = last_id.find(gid);
      if (last != last_id.end()) {
        if (last->second != pid) ++st.ids;
        if (interrupted[gid]) ++st.frags;
      }
      last_id[gid] = pid;
      interrupted[gid] = false;
      st.dist_sum += pr.dist;
      ++tp;
      if (visit) visit(g[pr.gt], p[pr.pred], pr.dist);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i].ignore) continue;
      ++st.gt_count;
      if (gt_hit[i]) continue;
      ++st.fn;
      if (last_id.count(g[i].id)) interrupted[g[i].id] = true;
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!pred_hit[j] && !p[j].ignore) ++st.fp;
    }
    st.tp += tp;
    st.matches_per_frame.push_back(static_cast<int>(tp));
  }
  st.finalize();
  return st;
}

struct AmotaReport {
  double amota = 0.0;
  double amotp = 0.0;
  std::vector<double> recalls;      // target recall grid
  std::vector<double> motar;        // per target recall
  std::vector<double> thresholds;   // chosen score threshold, NaN if unachievable
};

namespace detail {

inline std::vector<double> distinct_scores_desc(const EvalSequence& preds) {
  std::set<double, std::greater<>> s;
  for (const EvalFrame& f : preds) {
    for (const EvalObject& o : f) s.insert(o.score);
  }
  return {s.begin(), s.end()};
}

}  // namespace detail

/// Recall-normalized MOTA averaged over n target recalls, for one class (or any
/// pre-filtered sequence). Unachievable recalls score 0 and count the gate
/// distance toward AMOTP.
inline AmotaReport amota(const EvalSequence& preds, const EvalSequence& gts, double gate,
                         int n_recalls = 40) {
  if (n_recalls < 1) throw Error("amota: n_recalls must be >= 1");
  AmotaReport rep;
  long p_total = 0;
  for (const EvalFrame& f : gts) {
    for (const EvalObject& o : f) p_total += o.ignore ? 0 : 1;
  }
  const std::vector<double> thr = detail::distinct_scores_desc(preds);
  std::vector<MotStats> at;  // lazily filled, index-aligned with thr
  at.reserve(thr.size());
  std::size_t next = 0;  // thresholds evaluated so far
  double motar_sum = 0.0, motp_sum = 0.0;
  for (int k = 1; k <= n_recalls; ++k) {
    const double r = static_cast<double>(k) / n_recalls;
    rep.recalls.push_back(r);
    double value = 0.0;
    double motp = gate;
    double chosen = std::nan("");
    if (p_total > 0) {
      // Highest threshold whose recall reaches r.
      for (std::size_t i = 0; i < thr.size(); ++i) {
        while (next <= i) {
          at.push_back(clear_mot(filter_score(preds, thr[next]), gts, gate));
          ++next;
        }
        const MotStats& s = at[i];
        if (s.recall() + 1e-12 < r) continue;
        const double p = static_cast<double>(p_total);
        const double num = static_cast<double>(s.ids + s.fp + s.fn) - (1.0 - r) * p;
        value = std::clamp(1.0 - num / (r * p), 0.0, 1.0);
        motp = s.motp;
        chosen = thr[i];
        break;
      }
    }
    rep.motar.push_back(value);
    rep.thresholds.push_back(chosen);
    motar_sum += value;
    motp_sum += motp;
  }
  rep.amota = motar_sum / n_recalls;
  rep.amotp = motp_sum / n_recalls;
  return rep;
}

/// Mean L2 velocity error of true positives with score >= score_thresh,
/// averaged per class and then over classes. Undefined without true positives.
inline std::optional<double> mave(const EvalSequence& preds, const EvalSequence& gts,
                                  double gate, double score_thresh = 0.1) {
  std::map<int, std::pair<double, long>> per_class;
  clear_mot(filter_score(preds, score_thresh), gts, gate,
            [&](const EvalObject& g, const EvalObject& p, double) {
              auto& acc = per_class[g.class_id];
              acc.first += (p.velocity - g.velocity).norm();
              ++acc.second;
            });
  if (per_class.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [cls, acc] : per_class) sum += acc.first / acc.second;
  return sum / static_cast<double>(per_class.size());
}

struct CurvePoint {
  double threshold = 0.0;
  double recall = 0.0;
  double mota = 0.0;
  long ids = 0;
  long frags = 0;
  long fp = 0;
  long fn = 0;
};

/// CLEAR-MOT at up to n thresholds spread over the quantiles of the distinct
/// prediction scores, ascending threshold.
inline std::vector<CurvePoint> recall_curves(const EvalSequence& preds, const EvalSequence& gts,
                                             double gate, int n = 40) {
  if (n < 1) throw Error("recall_curves: n must be >= 1");
  std::vector<double> s = detail::distinct_scores_desc(preds);
  std::reverse(s.begin(), s.end());
  std::vector<double> picks;
  if (s.size() <= static_cast<std::size_t>(n)) {
    picks = s;
  } else {
    for (int k = 0; k < n; ++k) {
      const std::size_t idx =
          n == 1 ? 0 : static_cast<std::size_t>(std::llround(k * (s.size() - 1.0) / (n - 1.0)));
      if (picks.empty() || picks.back() != s[idx]) picks.push_back(s[idx]);
    }
  }
  std::vector<CurvePoint> out;
  for (double thr : picks) {
    const MotStats st = clear_mot(filter_score(preds, thr), gts, gate);
    out.push_back({thr, st.recall(), st.mota, st.ids, st.frags, st.fp, st.fn});
  }
  return out;
}

struct MetricsConfig {
  double gate = 2.0;  // meters
  // Radial evaluation range per class (car, pedestrian, bicycle), meters.
  std::array<double, kNumClasses> class_range = {50.0, 40.0, 40.0};
  int n_recalls = 40;
  double mave_score = 0.1;
  int curve_points = 40;

  void validate() const {
    if (!(gate > 0.0)) throw Error("metrics: gate must be positive");
    if (n_recalls < 1 || curve_points < 1) throw Error("metrics: counts must be >= 1");
    for (double r : class_range) {
      if (!(r > 0.0)) throw Error("metrics: class_range must be positive");
    }
  }
};

struct ClassReport {
  std::string name;  // class name or "overall"
  MotStats mot;
  AmotaReport amota;
  std::optional<double> mave;
  bool has_gt = false;
};

struct EvalReport {
  std::vector<ClassReport> classes;  // one per class, then "overall"
};

/// Per-class reports plus an overall row. Overall counts are pooled over
/// classes; overall AMOTA/AMOTP average the classes present in ground truth.
inline EvalReport evaluate(const EvalSequence& preds_in, const EvalSequence& gts_in,
                           const MetricsConfig& cfg = {}) {
  cfg.validate();
  const EvalSequence preds = mark_out_of_range(preds_in, cfg.class_range);
  const EvalSequence gts = mark_out_of_range(gts_in, cfg.class_range);
  EvalReport rep;
  ClassReport overall;
  overall.name = "overall";
  double amota_sum = 0.0, amotp_sum = 0.0, mave_sum = 0.0;
  int present = 0, mave_n = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const EvalSequence p = filter_class(preds, c);
    const EvalSequence g = filter_class(gts, c);
    ClassReport cr;
    cr.name = class_name(c);
    cr.mot = clear_mot(p, g, cfg.gate);
    cr.amota = amota(p, g, cfg.gate, cfg.n_recalls);
    cr.mave = mave(p, g, cfg.gate, cfg.mave_score);
    cr.has_gt = cr.mot.gt_count > 0;
    if (cr.has_gt) {
      ++present;
      amota_sum += cr.amota.amota;
      amotp_sum += cr.amota.amotp;
    }
    if (cr.mave) {
      ++mave_n;
      mave_sum += *cr.mave;
    }
    overall.mot += cr.mot;
    rep.classes.push_back(std::move(cr));
  }
  overall.mot.finalize();
  overall.has_gt = present > 0;
  overall.amota.amota = present > 0 ? amota_sum / present : 0.0;
  overall.amota.amotp = present > 0 ? amotp_sum / present : cfg.gate;
  if (mave_n > 0) overall.mave = mave_sum / mave_n;
  rep.classes.push_back(std::move(overall));
  return rep;
}

}  // namespace simtrack
