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

// On-disk formats: scenario JSON, JSON-lines for ground truth and tracks, and
// a little-endian binary container for head outputs.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "simtrack/bev_map.hpp"
#include "simtrack/geometry.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/tracker.hpp"

namespace simtrack {

using Json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

// Provenance carried by the first line of every JSON-lines file.
struct FileHeader {
  std::string kind;  // "ground_truth" or "tracks"
  int frames = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  double dt = 0.5;
  std::string tracker;  // tracks only
};

namespace io {

inline Json vec2_json(Vec2 v) { return Json::array({v.x, v.y}); }

inline Vec2 vec2_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json box_json(const Box3D& b) {
  return {{"center", {b.center.x, b.center.y, b.center.z}},
          {"size", {b.size.w, b.size.l, b.size.h}},
          {"yaw", b.yaw},
          {"class", class_name(b.class_id)}};
}

inline int class_from_json(const Json& j) {
  const auto c = class_from_name(j.get<std::string>());
  if (!c) throw IoError("unknown class '" + j.get<std::string>() + "'");
  return *c;
}

inline Box3D box_from(const Json& j) {
  Box3D b;
  const Json& c = j.at("center");
  const Json& s = j.at("size");
  b.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  b.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
  b.yaw = j.at("yaw").get<double>();
  b.class_id = class_from_json(j.at("class"));
  return b;
}

inline Json pose_json(const Pose2D& p) { return Json::array({p.x, p.y, p.yaw}); }

inline Pose2D pose_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected [x, y, yaw]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Json header_json(const FileHeader& h) {
  Json j = {{"kind", h.kind},
            {"frames", h.frames},
            {"seed", h.seed},
            {"config_hash", h.config_hash},
            {"dt", h.dt}};
  if (!h.tracker.empty()) j["tracker"] = h.tracker;
  return j;
}

inline FileHeader header_from(const Json& j) {
  FileHeader h;
  h.kind = j.at("kind").get<std::string>();
  h.frames = j.at("frames").get<int>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.config_hash = j.at("config_hash").get<std::string>();
  h.dt = j.at("dt").get<double>();
  if (j.contains("tracker")) h.tracker = j.at("tracker").get<std::string>();
  return h;
}

inline std::vector<Json> read_jsonl(std::istream& in) {
  std::vector<Json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw IoError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace io

// --- scenario ---------------------------------------------------------------

inline Json object_spec_json(const ObjectSpec& o) {
  Json wps = Json::array();
  for (const Waypoint& w : o.waypoints) wps.push_back({w.frame, w.x, w.y, w.yaw});
  return {{"track_id", o.track_id},
          {"class", class_name(o.class_id)},
          {"size", {o.size.w, o.size.l, o.size.h}},
          {"birth_frame", o.birth_frame},
          {"death_frame", o.death_frame},
          {"waypoints", wps}};
}

inline ObjectSpec object_spec_from(const Json& j) {
  ObjectSpec o;
  o.track_id = j.at("track_id").get<int>();
  o.class_id = io::class_from_json(j.at("class"));
  const Json& s = j.at("size");
  o.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
  o.birth_frame = j.at("birth_frame").get<int>();
  o.death_frame = j.at("death_frame").get<int>();
  for (const Json& w : j.at("waypoints")) {
    o.waypoints.push_back(
        {w.at(0).get<int>(), w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()});
  }
  o.validate();
  return o;
}

inline Json scenario_json(const Scenario& s, const std::string& config_hash) {
  Json ego = Json::array();
  for (const Pose2D& p : s.ego) ego.push_back(io::pose_json(p));
  Json objs = Json::array();
  for (const ObjectSpec& o : s.objects) objs.push_back(object_spec_json(o));
  return {{"kind", "scenario"}, {"config_hash", config_hash}, {"seed", s.seed},
          {"frames", s.frames}, {"dt", s.dt},
          {"ego", ego},         {"objects", objs}};
}

inline Scenario scenario_from(const Json& j) {
  try {
    if (j.at("kind").get<std::string>() != "scenario") throw IoError("not a scenario file");
    Scenario s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.frames = j.at("frames").get<int>();
    s.dt = j.at("dt").get<double>();
    for (const Json& p : j.at("ego")) s.ego.push_back(io::pose_from(p));
    for (const Json& o : j.at("objects")) s.objects.push_back(object_spec_from(o));
    if (static_cast<int>(s.ego.size()) != s.frames) throw IoError("ego length != frames");
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("scenario: ") + e.what());
  }
}

// --- ground truth -----------------------------------------------------------

inline void write_ground_truth(std::ostream& out, const FileHeader& h,
                               const std::vector<FrameGroundTruth>& gt) {
  out << io::header_json(h).dump() << '\n';
  for (const FrameGroundTruth& f : gt) {
    for (const GtObject& o : f.objects) {
      const Json rec = {{"frame", f.frame},
                        {"track_id", o.track_id},
                        {"class", class_name(o.box.class_id)},
                        {"center", {o.box.center.x, o.box.center.y, o.box.center.z}},
                        {"box", io::box_json(o.box)},
                        {"velocity", io::vec2_json(o.velocity)},
                        {"visibility", o.visibility}};
      out << rec.dump() << '\n';
    }
  }
}

inline std::vector<FrameGroundTruth> read_ground_truth(std::istream& in, FileHeader* header) {
  const std::vector<Json> lines = io::read_jsonl(in);
  if (lines.empty()) throw IoError("ground truth: empty file");
  try {
    const FileHeader h = io::header_from(lines[0]);
    if (h.kind != "ground_truth") throw IoError("ground truth: wrong file kind '" + h.kind + "'");
    std::vector<FrameGroundTruth> gt(h.frames);
    for (int t = 0; t < h.frames; ++t) gt[t].frame = t;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const Json& r = lines[i];
      const int t = r.at("frame").get<int>();
      if (t < 0 || t >= h.frames) throw IoError("ground truth: frame out of range");
      GtObject o;
      o.track_id = r.at("track_id").get<int>();
      o.box = io::box_from(r.at("box"));
      o.velocity = io::vec2_from(r.at("velocity"));
      o.visibility = r.at("visibility").get<double>();
      gt[t].objects.push_back(o);
    }
    if (header) *header = h;
    return gt;
  } catch (const Json::exception& e) {
    throw IoError(std::string("ground truth: ") + e.what());
  }
}

// --- tracks -----------------------------------------------------------------

inline void write_tracks(std::ostream& out, const FileHeader& h,
                         const std::vector<FrameTracks>& tracks) {
  out << io::header_json(h).dump() << '\n';
  for (const FrameTracks& f : tracks) {
    for (const TrackReport& r : f.tracks) {
      const Json rec = {{"frame", f.frame},
                        {"track_id", r.track_id},
                        {"class", class_name(r.class_id)},
                        {"center", io::vec2_json(r.center)},
                        {"box", io::box_json(r.box)},
                        {"score", r.score},
                        {"motion", io::vec2_json(r.motion)},
                        {"velocity", io::vec2_json(r.velocity)},
                        {"coasting", r.coasting}};
      out << rec.dump() << '\n';
    }
  }
}

inline std::vector<FrameTracks> read_tracks(std::istream& in, FileHeader* header) {
  const std::vector<Json> lines = io::read_jsonl(in);
  if (lines.empty()) throw IoError("tracks: empty file");
  try {
    const FileHeader h = io::header_from(lines[0]);
    if (h.kind != "tracks") throw IoError("tracks: wrong file kind '" + h.kind + "'");
    std::vector<FrameTracks> out(h.frames);
    for (int t = 0; t < h.frames; ++t) out[t].frame = t;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const Json& r = lines[i];
      const int t = r.at("frame").get<int>();
      if (t < 0 || t >= h.frames) throw IoError("tracks: frame out of range");
      TrackReport rep;
      rep.track_id = r.at("track_id").get<int>();
      rep.class_id = io::class_from_json(r.at("class"));
      rep.center = io::vec2_from(r.at("center"));
      rep.box = io::box_from(r.at("box"));
      rep.score = r.at("score").get<double>();
      rep.velocity = io::vec2_from(r.at("velocity"));
      rep.motion = io::vec2_from(r.at("motion"));
      rep.coasting = r.at("coasting").get<bool>();
      rep.box.velocity = rep.velocity;
      out[t].tracks.push_back(rep);
    }
    if (header) *header = h;
    return out;
  } catch (const Json::exception& e) {
    throw IoError(std::string("tracks: ") + e.what());
  }
}

// --- head outputs -----------------------------------------------------------
//
// Layout (little-endian): "SIMTRKHO", u32 version, u32 H, u32 W, u32 classes,
// f32 x_min x_max y_min y_max cell_size, u32 channel count, then per channel a
// u16-length name, then every plane as H*W f32 in channel order, row-major.
// Values are stored as f32, so a round trip rounds to single precision.

inline constexpr char kHeadMagic[8] = {'S', 'I', 'M', 'T', 'R', 'K', 'H', 'O'};
inline constexpr std::uint32_t kHeadVersion = 1;

namespace io {

static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("head output: truncated");
  return v;
}

inline std::vector<std::string> head_channel_names(int num_classes) {
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) names.push_back("centerness/" + class_name(c));
  names.insert(names.end(), {"motion/dx", "motion/dy", "reg/z", "reg/w", "reg/l", "reg/h",
                             "reg/sin", "reg/cos"});
  return names;
}

}  // namespace io

inline void write_head_outputs(std::ostream& out, const std::vector<HeadOutput>& outs) {
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(outs.size()));
  for (const HeadOutput& h : outs) {
    const GridSpec& g = h.grid;
    out.write(kHeadMagic, sizeof(kHeadMagic));
    io::put<std::uint32_t>(out, kHeadVersion);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.height()));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.width()));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.num_classes));
    for (double v : {g.x_min, g.x_max, g.y_min, g.y_max, g.cell_size}) {
      io::put<float>(out, static_cast<float>(v));
    }
    const auto names = io::head_channel_names(g.num_classes);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(names.size()));
    for (const std::string& n : names) {
      io::put<std::uint16_t>(out, static_cast<std::uint16_t>(n.size()));
      out.write(n.data(), static_cast<std::streamsize>(n.size()));
    }
    const auto put_all = [&out](std::span<const double> vals) {
      for (double v : vals) io::put<float>(out, static_cast<float>(v));
    };
    put_all(h.centerness.values());
    put_all(h.motion.values());
    put_all(h.regression.values());
  }
  if (!out) throw IoError("head output: write failed");
}

inline std::vector<HeadOutput> read_head_outputs(std::istream& in) {
  const auto count = io::get<std::uint32_t>(in);
  std::vector<HeadOutput> outs;
  for (std::uint32_t k = 0; k < count; ++k) {
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kHeadMagic, sizeof(magic)) != 0) {
      throw IoError("head output: bad magic");
    }
    if (io::get<std::uint32_t>(in) != kHeadVersion) throw IoError("head output: bad version");
    const auto h = io::get<std::uint32_t>(in);
    const auto w = io::get<std::uint32_t>(in);
    GridSpec g;
    g.num_classes = static_cast<int>(io::get<std::uint32_t>(in));
    g.x_min = io::get<float>(in);
    g.x_max = io::get<float>(in);
    g.y_min = io::get<float>(in);
    g.y_max = io::get<float>(in);
    g.cell_size = io::get<float>(in);
    g.validate();
    if (static_cast<std::uint32_t>(g.height()) != h || static_cast<std::uint32_t>(g.width()) != w) {
      throw IoError("head output: grid header inconsistent");
    }
    const auto n = io::get<std::uint32_t>(in);
    if (io::head_channel_names(g.num_classes).size() != n) {
      throw IoError("head output: unexpected channel count");
    }
    for (std::uint32_t c = 0; c < n; ++c) {
      const auto len = io::get<std::uint16_t>(in);
      std::string name(len, '\0');
      if (!in.read(name.data(), len)) throw IoError("head output: truncated");
    }
    HeadOutput o = HeadOutput::zeros(g);
    const auto get_all = [&in](std::span<double> vals) {
      for (double& v : vals) v = io::get<float>(in);
    };
    get_all(o.centerness.values());
    get_all(o.motion.values());
    get_all(o.regression.values());
    outs.push_back(std::move(o));
  }
  return outs;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace simtrack
