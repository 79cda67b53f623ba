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

// End-to-end pipeline (scenario, ground truth, head outputs, tracking,
// evaluation) and the file-producing commands built on it.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "simtrack/baselines.hpp"
#include "simtrack/config.hpp"
#include "simtrack/io.hpp"
#include "simtrack/metrics.hpp"
#include "simtrack/oracle_head.hpp"
#include "simtrack/rng.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {

struct SequenceData {
  Scenario scenario;
  std::vector<FrameGroundTruth> gt;  // cropped to the grid, ego frame
  std::vector<HeadOutput> heads;
};

/// Ground truth and oracle head outputs for an existing scenario. Head noise
/// comes from the "noise" stream of the scenario seed.
inline SequenceData simulate_scenario(const Scenario& s, const ExperimentConfig& cfg) {
  SequenceData d;
  d.scenario = s;
  for (int t = 0; t < s.frames; ++t) {
    d.gt.push_back(crop_to_grid(ground_truth_at(s, t, cfg.sensor), cfg.grid));
  }
  Rng rng = make_stream(s.seed, "noise");
  for (int t = 0; t < s.frames; ++t) {
    if (t == 0) {
      d.heads.push_back(predict_single(d.gt[0], cfg.grid, cfg.noise, rng, cfg.targets));
    } else {
      const Pose2D rel = relative_pose(s.ego[t - 1], s.ego[t]);
      d.heads.push_back(predict_pair(transform_frame(d.gt[t - 1], rel), d.gt[t], cfg.grid,
                                     cfg.noise, rng, cfg.targets));
    }
  }
  return d;
}

inline SequenceData simulate(const ExperimentConfig& cfg, std::uint64_t seed) {
  return simulate_scenario(generate(cfg.scenario, seed), cfg);
}

/// Runs the named tracker on a head-output stream.
inline std::vector<FrameTracks> run_tracker(const std::string& name,
                                            const std::vector<HeadOutput>& heads,
                                            const std::vector<Pose2D>& ego,
                                            const ExperimentConfig& cfg) {
  TrackerConfig tcfg = cfg.tracker;
  tcfg.frame_dt = cfg.scenario.dt;
  if (name == "simtrack") return run_sequence(heads, ego, tcfg);
  BaselineKind kind;
  if (name == "greedy") {
    kind = BaselineKind::kGreedy;
  } else if (name == "kalman") {
    kind = BaselineKind::kKalman;
  } else {
    throw ConfigError("unknown tracker '" + name + "'");
  }
  std::vector<std::vector<Detection>> dets;
  for (const HeadOutput& h : heads) {
    dets.push_back(detections_from_head(h, h.grid, tcfg.tau, tcfg.frame_dt));
  }
  std::vector<FrameTracks> out = run_baseline(kind, dets, ego, cfg.baseline, tcfg.frame_dt);
  for (std::size_t t = 0; t < out.size(); ++t) out[t].frame = static_cast<int>(t);
  return out;
}

inline std::vector<FrameTracks> run_tracker(const SequenceData& d, const ExperimentConfig& cfg) {
  return run_tracker(cfg.tracker_name, d.heads, d.scenario.ego, cfg);
}

inline EvalReport evaluate_tracks(const std::vector<FrameTracks>& tracks,
                                  const std::vector<FrameGroundTruth>& gt,
                                  const MetricsConfig& mcfg) {
  if (tracks.size() != gt.size()) throw Error("evaluate: tracks and ground truth frame counts differ");
  return evaluate(to_eval(tracks), to_eval(gt), mcfg);
}

// --- formatting ---------------------------------------------------------------

namespace fmt_detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string opt(const std::optional<double>& v) { return v ? num(*v) : "nan"; }

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

inline std::string cell_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace fmt_detail

inline std::string metrics_csv(const EvalReport& rep, const FileHeader& tracks_header) {
  using fmt_detail::num;
  std::ostringstream os;
  os << "# config_hash=" << tracks_header.config_hash << '\n';
  os << "# seed=" << tracks_header.seed << '\n';
  os << "# tracker=" << tracks_header.tracker << '\n';
  os << "class,amota,amotp,mota,motp,ids,frags,fp,fn,tp,gt,mave\n";
  for (const ClassReport& c : rep.classes) {
    os << c.name << ',' << num(c.amota.amota) << ',' << num(c.amota.amotp) << ','
       << num(c.mot.mota) << ',' << num(c.mot.motp) << ',' << c.mot.ids << ',' << c.mot.frags
       << ',' << c.mot.fp << ',' << c.mot.fn << ',' << c.mot.tp << ',' << c.mot.gt_count << ','
       << fmt_detail::opt(c.mave) << '\n';
  }
  return os.str();
}

inline Json summary_json(const EvalReport& rep, const FileHeader& tracks_header) {
  Json classes = Json::object();
  for (const ClassReport& c : rep.classes) {
    Json motar = Json::array();
    for (double v : c.amota.motar) motar.push_back(v);
    classes[c.name] = {{"amota", c.amota.amota},
                       {"amotp", c.amota.amotp},
                       {"mota", c.mot.mota},
                       {"motp", c.mot.motp},
                       {"ids", c.mot.ids},
                       {"frags", c.mot.frags},
                       {"fp", c.mot.fp},
                       {"fn", c.mot.fn},
                       {"tp", c.mot.tp},
                       {"gt", c.mot.gt_count},
                       {"mave", c.mave ? Json(*c.mave) : Json(nullptr)},
                       {"motar", motar}};
  }
  return {{"config_hash", tracks_header.config_hash},
          {"seed", tracks_header.seed},
          {"tracker", tracks_header.tracker},
          {"classes", classes}};
}

inline std::string curves_csv(const EvalSequence& preds, const EvalSequence& gts,
                              const MetricsConfig& mcfg, const FileHeader& tracks_header) {
  using fmt_detail::num;
  std::ostringstream os;
  os << "# config_hash=" << tracks_header.config_hash << '\n';
  os << "# seed=" << tracks_header.seed << '\n';
  os << "class,threshold,recall,mota,ids,frags,fp,fn\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const auto pts = recall_curves(mark_out_of_range(filter_class(preds, c), mcfg.class_range),
                                   mark_out_of_range(filter_class(gts, c), mcfg.class_range),
                                   mcfg.gate, mcfg.curve_points);
    for (const CurvePoint& p : pts) {
      os << class_name(c) << ',' << num(p.threshold) << ',' << num(p.recall) << ','
         << num(p.mota) << ',' << p.ids << ',' << p.frags << ',' << p.fp << ',' << p.fn << '\n';
    }
  }
  return os.str();
}

// --- commands -----------------------------------------------------------------

namespace fs = std::filesystem;

inline std::string seed_suffix(std::uint64_t seed) { return "seed" + std::to_string(seed); }

/// Writes scenario_seed<N>.json and gt_seed<N>.jsonl per seed; returns the paths.
inline std::vector<fs::path> cmd_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> written;
  for (std::uint64_t seed : cfg.seeds) {
    const Scenario s = generate(cfg.scenario, seed);
    const fs::path sp = out_dir / ("scenario_" + seed_suffix(seed) + ".json");
    fmt_detail::write_file(sp, scenario_json(s, hash).dump(2) + "\n");
    std::vector<FrameGroundTruth> gt;
    for (int t = 0; t < s.frames; ++t) {
      gt.push_back(crop_to_grid(ground_truth_at(s, t, cfg.sensor), cfg.grid));
    }
    std::ostringstream os;
    write_ground_truth(os, {"ground_truth", s.frames, seed, hash, s.dt, ""}, gt);
    const fs::path gp = out_dir / ("gt_" + seed_suffix(seed) + ".jsonl");
    fmt_detail::write_file(gp, os.str());
    written.push_back(sp);
    written.push_back(gp);
  }
  return written;
}

/// Tracks one scenario file; writes tracks_<tracker>_seed<N>.jsonl and, when
/// `dump_heads` is set, the head outputs consumed.
inline fs::path cmd_track(const fs::path& scenario_path, const std::string& tracker_name,
                          const ExperimentConfig& cfg, const fs::path& out_dir,
                          bool dump_heads = false) {
  if (!known_tracker(tracker_name)) throw ConfigError("unknown tracker '" + tracker_name + "'");
  Json sj;
  try {
    sj = Json::parse(read_text_file(scenario_path.string()));
  } catch (const Json::parse_error& e) {
    throw IoError(scenario_path.string() + ": " + e.what());
  }
  const Scenario s = scenario_from(sj);
  const SequenceData d = simulate_scenario(s, cfg);
  const std::vector<FrameTracks> tracks = run_tracker(tracker_name, d.heads, s.ego, cfg);
  fs::create_directories(out_dir);
  std::ostringstream os;
  write_tracks(os, {"tracks", s.frames, s.seed, config_hash(cfg), s.dt, tracker_name}, tracks);
  const fs::path tp = out_dir / ("tracks_" + tracker_name + "_" + seed_suffix(s.seed) + ".jsonl");
  fmt_detail::write_file(tp, os.str());
  if (dump_heads) {
    std::ofstream hb(out_dir / ("heads_" + seed_suffix(s.seed) + ".bin"), std::ios::binary);
    write_head_outputs(hb, d.heads);
  }
  return tp;
}

/// Writes metrics.csv, summary.json and curves.csv.
inline EvalReport cmd_eval(const fs::path& tracks_path, const fs::path& gt_path,
                           const MetricsConfig& mcfg, const fs::path& out_dir) {
  FileHeader th, gh;
  std::ifstream tin(tracks_path);
  if (!tin) throw IoError("cannot open '" + tracks_path.string() + "'");
  const std::vector<FrameTracks> tracks = read_tracks(tin, &th);
  std::ifstream gin(gt_path);
  if (!gin) throw IoError("cannot open '" + gt_path.string() + "'");
  const std::vector<FrameGroundTruth> gt = read_ground_truth(gin, &gh);
  if (th.frames != gh.frames) {
    throw Error("eval: tracks have " + std::to_string(th.frames) + " frames, ground truth " +
                std::to_string(gh.frames));
  }
  const EvalSequence preds = to_eval(tracks);
  const EvalSequence gts = to_eval(gt);
  const EvalReport rep = evaluate(preds, gts, mcfg);
  fs::create_directories(out_dir);
  fmt_detail::write_file(out_dir / "metrics.csv", metrics_csv(rep, th));
  fmt_detail::write_file(out_dir / "summary.json", summary_json(rep, th).dump(2) + "\n");
  fmt_detail::write_file(out_dir / "curves.csv", curves_csv(preds, gts, mcfg, th));
  return rep;
}

// --- sweeps -------------------------------------------------------------------

struct SweepAxis {
  std::string path;          // dotted config path, e.g. "baseline.max_age"
  std::vector<Json> values;  // in sweep order
};

/// Parses "path=v1,v2,..."; values are JSON literals, anything else is a string.
inline SweepAxis parse_axis(const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("sweep axis '" + spec + "': expected path=v1,v2,...");
  }
  SweepAxis ax;
  ax.path = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw ConfigError("sweep axis '" + ax.path + "': empty value");
    const Json v = Json::parse(tok, nullptr, false);
    ax.values.push_back(v.is_discarded() ? Json(tok) : v);
  }
  return ax;
}

struct SweepRow {
  std::size_t cell = 0;
  std::vector<Json> values;  // one per axis
  std::string tracker;
  std::uint64_t seed = 0;
  ClassReport overall;
};

struct SweepOptions {
  int jobs = 1;
  bool amota = true;  // false skips the recall sweep (IDS/MOTA studies)
};

/// Runs the cross product of axes over every seed. Rows come back ordered by
/// (cell, seed) regardless of scheduling.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                       const std::vector<SweepAxis>& axes,
                                       const SweepOptions& opt = {}) {
  if (axes.empty()) throw ConfigError("sweep: empty grid");
  std::size_t cells = 1;
  for (const SweepAxis& a : axes) {
    if (a.values.empty()) throw ConfigError("sweep axis '" + a.path + "': no values");
    cells *= a.values.size();
  }
  std::vector<ExperimentConfig> cfgs;
  std::vector<std::vector<Json>> cell_values;
  for (std::size_t c = 0; c < cells; ++c) {
    ExperimentConfig cfg = base;
    std::vector<Json> vals;
    std::size_t rem = c;
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      idx[k] = rem % axes[k].values.size();
      rem /= axes[k].values.size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      cfg = override_config(cfg, axes[k].path, axes[k].values[idx[k]]);
      vals.push_back(axes[k].values[idx[k]]);
    }
    cfgs.push_back(std::move(cfg));
    cell_values.push_back(std::move(vals));
  }

  // Cells that only differ in tracker settings share simulated inputs.
  const auto input_key = [](const ExperimentConfig& c) {
    Json j = config_to_json(c);
    for (const char* k : {"seeds", "tracker_name", "tracker", "baseline", "metrics"}) j.erase(k);
    return j.dump();
  };
  std::map<std::string, std::size_t> input_ids;
  std::vector<std::size_t> cell_input(cells);
  std::vector<const ExperimentConfig*> input_cfg;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto [it, inserted] = input_ids.emplace(input_key(cfgs[c]), input_cfg.size());
    if (inserted) input_cfg.push_back(&cfgs[c]);
    cell_input[c] = it->second;
  }

  const std::vector<std::uint64_t>& seeds = base.seeds;
  const std::size_t n_inputs = input_cfg.size() * seeds.size();
  std::vector<SequenceData> inputs(n_inputs);
  std::vector<SweepRow> rows(cells * seeds.size());
  const int jobs = std::max(1, opt.jobs);

  const auto parallel = [jobs](std::size_t n, const auto& fn) {
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    const auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs && static_cast<std::size_t>(k) < n; ++k) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  };

  parallel(n_inputs, [&](std::size_t i) {
    inputs[i] = simulate(*input_cfg[i / seeds.size()], seeds[i % seeds.size()]);
  });
  parallel(rows.size(), [&](std::size_t i) {
    const std::size_t c = i / seeds.size();
    const std::size_t s = i % seeds.size();
    const ExperimentConfig& cfg = cfgs[c];
    const SequenceData& d = inputs[cell_input[c] * seeds.size() + s];
    const auto tracks = run_tracker(d, cfg);
    SweepRow& row = rows[i];
    row.cell = c;
    row.values = cell_values[c];
    row.tracker = cfg.tracker_name;
    row.seed = seeds[s];
    if (opt.amota) {
      row.overall = evaluate_tracks(tracks, d.gt, cfg.metrics).classes.back();
    } else {
      row.overall.name = "overall";
      row.overall.mot =
          clear_mot(mark_out_of_range(to_eval(tracks), cfg.metrics.class_range),
                    mark_out_of_range(to_eval(d.gt), cfg.metrics.class_range), cfg.metrics.gate);
    }
  });
  return rows;
}

/// Run rows followed by one mean row per cell.
inline std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows,
                             const std::string& hash) {
  using fmt_detail::num;
  std::ostringstream os;
  os << "# config_hash=" << hash << '\n';
  os << "cell,tracker";
  for (const SweepAxis& a : axes) os << ',' << a.path;
  os << ",seed,amota,amotp,mota,motp,ids,frags,fp,fn,gt,mave\n";
  const auto prefix = [&](const SweepRow& r) {
    std::ostringstream p;
    p << r.cell << ',' << r.tracker;
    for (const Json& v : r.values) p << ',' << fmt_detail::cell_value(v);
    return p.str();
  };
  for (const SweepRow& r : rows) {
    const ClassReport& o = r.overall;
    os << prefix(r) << ',' << r.seed << ',' << num(o.amota.amota) << ',' << num(o.amota.amotp)
       << ',' << num(o.mot.mota) << ',' << num(o.mot.motp) << ',' << o.mot.ids << ','
       << o.mot.frags << ',' << o.mot.fp << ',' << o.mot.fn << ',' << o.mot.gt_count << ','
       << fmt_detail::opt(o.mave) << '\n';
  }
  std::map<std::size_t, std::vector<const SweepRow*>> by_cell;
  for (const SweepRow& r : rows) by_cell[r.cell].push_back(&r);
  for (const auto& [cell, rs] : by_cell) {
    const double n = static_cast<double>(rs.size());
    double a = 0, ap = 0, m = 0, mp = 0, ids = 0, fr = 0, fp = 0, fn = 0, gt = 0, mv = 0;
    int mv_n = 0;
    for (const SweepRow* r : rs) {
      const ClassReport& o = r->overall;
      a += o.amota.amota;
      ap += o.amota.amotp;
      m += o.mot.mota;
      mp += o.mot.motp;
      ids += o.mot.ids;
      fr += o.mot.frags;
      fp += o.mot.fp;
      fn += o.mot.fn;
      gt += o.mot.gt_count;
      if (o.mave) {
        mv += *o.mave;
        ++mv_n;
      }
    }
    os << prefix(*rs.front()) << ",mean," << num(a / n) << ',' << num(ap / n) << ','
       << num(m / n) << ',' << num(mp / n) << ',' << num(ids / n) << ',' << num(fr / n) << ','
       << num(fp / n) << ',' << num(fn / n) << ',' << num(gt / n) << ','
       << (mv_n > 0 ? num(mv / mv_n) : std::string("nan")) << '\n';
  }
  return os.str();
}

inline fs::path cmd_sweep(const ExperimentConfig& cfg, const std::vector<SweepAxis>& axes,
                          const fs::path& out_dir, int jobs = 1) {
  const std::vector<SweepRow> rows = run_sweep(cfg, axes, {jobs, true});
  fs::create_directories(out_dir);
  const fs::path p = out_dir / "sweep.csv";
  fmt_detail::write_file(p, sweep_csv(axes, rows, config_hash(cfg)));
  return p;
}

}  // namespace simtrack
