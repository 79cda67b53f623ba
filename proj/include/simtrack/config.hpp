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

// Experiment configuration: strict JSON schema (unknown keys are errors) and a
// canonical form whose hash tags every artifact.

#pragma once

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "simtrack/baselines.hpp"
#include "simtrack/io.hpp"
#include "simtrack/metrics.hpp"
#include "simtrack/oracle_head.hpp"
#include "simtrack/rng.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/targets.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline const std::array<std::string, 3> kTrackerNames = {"simtrack", "greedy", "kalman"};

inline bool known_tracker(const std::string& name) {
  for (const auto& n : kTrackerNames) {
    if (n == name) return true;
  }
  return false;
}

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds = {0};
  std::string tracker_name = "simtrack";
  ScenarioConfig scenario;
  GridSpec grid;
  SensorConfig sensor;
  NoiseConfig noise;
  TargetConfig targets;
  TrackerConfig tracker;
  BaselineConfig baseline;
  MetricsConfig metrics;

  void validate() const {
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (!known_tracker(tracker_name)) {
      throw ConfigError("tracker_name: unknown tracker '" + tracker_name + "'");
    }
    try {
      scenario.validate();
      grid.validate();
      noise.validate();
      tracker.validate();
      baseline.validate();
      metrics.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (sensor.num_beams < 1 || !(sensor.max_range > 0) || sensor.points_per_hit < 1 ||
        sensor.noise_sigma < 0) {
      throw ConfigError("sensor: invalid parameters");
    }
    if (!(targets.min_overlap > 0 && targets.min_overlap < 1) || targets.min_radius < 0) {
      throw ConfigError("targets: invalid parameters");
    }
  }
};

namespace config_detail {

// Reads one JSON object, remembering consumed keys so leftovers can be
// reported with their full path.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const Json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(key_path(key) + ": wrong type (got " + v->dump() + ")");
    }
  }

  template <typename F>
  void section(const std::string& key, F&& f) {
    const Json* v = find(key);
    if (!v) return;
    Section s(*v, key_path(key));
    f(s);
    s.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
    }
  }

  std::string where() const { return path_.empty() ? "<root>" : path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline double number_or_inf(const Json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path + ": expected a number or \"inf\"");
}

inline Json inf_or_number(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

// Per-class values as an object keyed by class name; partial objects keep the
// defaults of the missing classes.
inline void read_per_class(Section& s, const std::string& key, std::array<double, kNumClasses>& out,
                           bool allow_scalar) {
  const Json* v = s.find(key);
  if (!v) return;
  const std::string path = s.key_path(key);
  if (allow_scalar && !v->is_object()) {
    out.fill(number_or_inf(*v, path));
    return;
  }
  Section cs(*v, path);
  for (int c = 0; c < kNumClasses; ++c) {
    if (const Json* cv = cs.find(class_name(c))) out[c] = number_or_inf(*cv, cs.key_path(class_name(c)));
  }
  cs.finish();
}

inline Json per_class_json(const std::array<double, kNumClasses>& a) {
  Json j = Json::object();
  for (int c = 0; c < kNumClasses; ++c) j[class_name(c)] = inf_or_number(a[c]);
  return j;
}

}  // namespace config_detail

/// Builds a config from JSON on top of the defaults.
inline ExperimentConfig config_from_json(const Json& root) {
  using config_detail::Section;
  ExperimentConfig cfg;
  Section top(root, "");
  if (const Json* seeds = top.find("seeds")) {
    if (!seeds->is_array()) throw ConfigError("seeds: expected an array of integers");
    cfg.seeds.clear();
    for (const Json& s : *seeds) {
      if (!s.is_number_unsigned()) throw ConfigError("seeds: expected non-negative integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  top.read("tracker_name", cfg.tracker_name);

  top.section("scenario", [&](Section& s) {
    ScenarioConfig& c = cfg.scenario;
    s.read("frames", c.frames);
    s.read("dt", c.dt);
    s.read("min_objects", c.min_objects);
    s.read("max_objects", c.max_objects);
    config_detail::read_per_class(s, "class_mix", c.class_mix, false);
    if (const Json* v = s.find("class_sizes")) {
      Section cs(*v, s.key_path("class_sizes"));
      for (int k = 0; k < kNumClasses; ++k) {
        const Json* sz = cs.find(class_name(k));
        if (!sz) continue;
        if (!sz->is_array() || sz->size() != 3) {
          throw ConfigError(cs.key_path(class_name(k)) + ": expected [w, l, h]");
        }
        c.class_sizes[k] = {(*sz)[0].get<double>(), (*sz)[1].get<double>(),
                            (*sz)[2].get<double>()};
      }
      cs.finish();
    }
    config_detail::read_per_class(s, "speed_min", c.speed_min, false);
    config_detail::read_per_class(s, "speed_max", c.speed_max, false);
    s.read("birth_prob", c.birth_prob);
    s.read("death_prob", c.death_prob);
    s.read("lifecycle_events", c.lifecycle_events);
    s.read("occluders", c.occluders);
    s.read("ego_speed", c.ego_speed);
    s.read("ego_yaw_rate", c.ego_yaw_rate);
    s.read("spawn_radius", c.spawn_radius);
    s.read("min_spawn_radius", c.min_spawn_radius);
    s.read("min_separation", c.min_separation);
    s.read("ego_clearance", c.ego_clearance);
    s.read("max_attempts", c.max_attempts);
    if (const Json* v = s.find("objects")) {
      try {
        for (const Json& o : *v) c.explicit_objects.push_back(object_spec_from(o));
      } catch (const std::exception& e) {
        throw ConfigError(s.key_path("objects") + ": " + e.what());
      }
    }
    if (const Json* v = s.find("ego")) {
      try {
        for (const Json& p : *v) c.explicit_ego.push_back(io::pose_from(p));
      } catch (const std::exception& e) {
        throw ConfigError(s.key_path("ego") + ": " + e.what());
      }
    }
  });

  top.section("grid", [&](Section& s) {
    s.read("x_min", cfg.grid.x_min);
    s.read("x_max", cfg.grid.x_max);
    s.read("y_min", cfg.grid.y_min);
    s.read("y_max", cfg.grid.y_max);
    s.read("cell_size", cfg.grid.cell_size);
  });

  top.section("sensor", [&](Section& s) {
    s.read("num_beams", cfg.sensor.num_beams);
    s.read("max_range", cfg.sensor.max_range);
    s.read("points_per_hit", cfg.sensor.points_per_hit);
    s.read("noise_sigma", cfg.sensor.noise_sigma);
  });

  top.section("noise", [&](Section& s) {
    s.read("score_sigma", cfg.noise.score_sigma);
    s.read("center_sigma", cfg.noise.center_sigma);
    s.read("drop_prob", cfg.noise.drop_prob);
    s.read("fp_rate", cfg.noise.fp_rate);
    s.read("motion_sigma", cfg.noise.motion_sigma);
    s.read("visibility_floor", cfg.noise.visibility_floor);
  });

  top.section("targets", [&](Section& s) {
    s.read("min_overlap", cfg.targets.min_overlap);
    s.read("min_radius", cfg.targets.min_radius);
  });

  top.section("tracker", [&](Section& s) {
    s.read("tau", cfg.tracker.tau);
    s.read("nms_window", cfg.tracker.nms_window);
    s.read("read_radius", cfg.tracker.read_radius);
    s.read("emit_coasting", cfg.tracker.emit_coasting);
    s.read("combine_maps", cfg.tracker.combine_maps);
  });

  top.section("baseline", [&](Section& s) {
    config_detail::read_per_class(s, "max_dist", cfg.baseline.max_dist, true);
    s.read("max_age", cfg.baseline.max_age);
    s.read("min_hits", cfg.baseline.min_hits);
    s.section("kf", [&](Section& k) {
      k.read("q_pos", cfg.baseline.kf.q_pos);
      k.read("q_vel", cfg.baseline.kf.q_vel);
      k.read("r_pos", cfg.baseline.kf.r_pos);
      k.read("init_vel_var", cfg.baseline.kf.init_vel_var);
    });
  });

  top.section("metrics", [&](Section& s) {
    s.read("gate", cfg.metrics.gate);
    config_detail::read_per_class(s, "class_range", cfg.metrics.class_range, true);
    s.read("n_recalls", cfg.metrics.n_recalls);
    s.read("mave_score", cfg.metrics.mave_score);
    s.read("curve_points", cfg.metrics.curve_points);
  });

  top.finish();
  cfg.tracker.frame_dt = cfg.scenario.dt;
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

/// Complete, canonical form; feeding it back yields the same config.
inline Json config_to_json(const ExperimentConfig& cfg) {
  using config_detail::per_class_json;
  const ScenarioConfig& sc = cfg.scenario;
  Json sizes = Json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    sizes[class_name(c)] = {sc.class_sizes[c].w, sc.class_sizes[c].l, sc.class_sizes[c].h};
  }
  Json objects = Json::array();
  for (const ObjectSpec& o : sc.explicit_objects) objects.push_back(object_spec_json(o));
  Json ego = Json::array();
  for (const Pose2D& p : sc.explicit_ego) ego.push_back(io::pose_json(p));
  Json seeds = Json::array();
  for (std::uint64_t s : cfg.seeds) seeds.push_back(s);
  return {
      {"seeds", seeds},
      {"tracker_name", cfg.tracker_name},
      {"scenario",
       {{"frames", sc.frames},
        {"dt", sc.dt},
        {"min_objects", sc.min_objects},
        {"max_objects", sc.max_objects},
        {"class_mix", per_class_json(sc.class_mix)},
        {"class_sizes", sizes},
        {"speed_min", per_class_json(sc.speed_min)},
        {"speed_max", per_class_json(sc.speed_max)},
        {"birth_prob", sc.birth_prob},
        {"death_prob", sc.death_prob},
        {"lifecycle_events", sc.lifecycle_events},
        {"occluders", sc.occluders},
        {"ego_speed", sc.ego_speed},
        {"ego_yaw_rate", sc.ego_yaw_rate},
        {"spawn_radius", sc.spawn_radius},
        {"min_spawn_radius", sc.min_spawn_radius},
        {"min_separation", sc.min_separation},
        {"ego_clearance", sc.ego_clearance},
        {"max_attempts", sc.max_attempts},
        {"objects", objects},
        {"ego", ego}}},
      {"grid",
       {{"x_min", cfg.grid.x_min},
        {"x_max", cfg.grid.x_max},
        {"y_min", cfg.grid.y_min},
        {"y_max", cfg.grid.y_max},
        {"cell_size", cfg.grid.cell_size}}},
      {"sensor",
       {{"num_beams", cfg.sensor.num_beams},
        {"max_range", cfg.sensor.max_range},
        {"points_per_hit", cfg.sensor.points_per_hit},
        {"noise_sigma", cfg.sensor.noise_sigma}}},
      {"noise",
       {{"score_sigma", cfg.noise.score_sigma},
        {"center_sigma", cfg.noise.center_sigma},
        {"drop_prob", cfg.noise.drop_prob},
        {"fp_rate", cfg.noise.fp_rate},
        {"motion_sigma", cfg.noise.motion_sigma},
        {"visibility_floor", cfg.noise.visibility_floor}}},
      {"targets",
       {{"min_overlap", cfg.targets.min_overlap}, {"min_radius", cfg.targets.min_radius}}},
      {"tracker",
       {{"tau", cfg.tracker.tau},
        {"nms_window", cfg.tracker.nms_window},
        {"read_radius", cfg.tracker.read_radius},
        {"emit_coasting", cfg.tracker.emit_coasting},
        {"combine_maps", cfg.tracker.combine_maps}}},
      {"baseline",
       {{"max_dist", per_class_json(cfg.baseline.max_dist)},
        {"max_age", cfg.baseline.max_age},
        {"min_hits", cfg.baseline.min_hits},
        {"kf",
         {{"q_pos", cfg.baseline.kf.q_pos},
          {"q_vel", cfg.baseline.kf.q_vel},
          {"r_pos", cfg.baseline.kf.r_pos},
          {"init_vel_var", cfg.baseline.kf.init_vel_var}}}}},
      {"metrics",
       {{"gate", cfg.metrics.gate},
        {"class_range", per_class_json(cfg.metrics.class_range)},
        {"n_recalls", cfg.metrics.n_recalls},
        {"mave_score", cfg.metrics.mave_score},
        {"curve_points", cfg.metrics.curve_points}}},
  };
}

/// 16 hex digits of FNV-1a over the canonical dump, seeds excluded so one hash
/// covers every seed of an experiment.
inline std::string config_hash(const ExperimentConfig& cfg) {
  Json j = config_to_json(cfg);
  j.erase("seeds");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(j.dump()));
  return buf;
}

/// Returns a copy of `cfg` with the dotted `path` set to `value`. The path must
/// name an existing leaf or section of the canonical form.
inline ExperimentConfig override_config(const ExperimentConfig& cfg, const std::string& path,
                                        const Json& value) {
  Json j = config_to_json(cfg);
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError(path + ": unknown key");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
  return config_from_json(j);
}

}  // namespace simtrack
