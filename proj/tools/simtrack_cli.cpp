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


// simtrack: gen / track / eval / sweep front end.
// Exit codes: 0 success, 1 usage or config error, 2 runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simtrack/simtrack.hpp"

namespace {

using simtrack::ConfigError;
using simtrack::ExperimentConfig;

ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : simtrack::load_config(path);
  if (seed) cfg.seeds = {*seed};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint detection and tracking by read-off: simulation, tracking, evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string tracker;
  std::string scenario_path, tracks_path, gt_path;
  std::vector<std::string> grid;
  int jobs = 1;
  bool dump_heads = false;

  CLI::App* gen = app.add_subcommand("gen", "generate scenarios and ground truth");
  gen->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--seed", seed, "single seed, overrides the config's seed list");

  CLI::App* track = app.add_subcommand("track", "run a tracker on a scenario");
  track->add_option("--scenario", scenario_path, "scenario JSON from gen")
      ->required()
      ->check(CLI::ExistingFile);
  track->add_option("--tracker", tracker, "simtrack | greedy | kalman");
  track->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  track->add_option("--out", out_dir, "output directory");
  track->add_flag("--dump-heads", dump_heads, "also write the head outputs (binary)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate tracks against ground truth");
  eval->add_option("--tracks", tracks_path, "tracks JSON-lines")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "ground truth JSON-lines")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_path, "experiment config (metrics section)")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "cross-product hyper-parameter sweep");
  sweep->add_option("--config", config_path, "base experiment config (JSON)")
      ->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "axis as path=v1,v2,... (repeatable)")->required();
  sweep->add_option("--tracker", tracker, "tracker, unless swept via tracker_name=...");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "single seed, overrides the config's seed list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      for (const auto& p : simtrack::cmd_gen(load(config_path, seed), out_dir)) {
        std::cout << p.string() << '\n';
      }
    } else if (*track) {
      ExperimentConfig cfg = load(config_path, std::nullopt);
      const std::string name = tracker.empty() ? cfg.tracker_name : tracker;
      std::cout << simtrack::cmd_track(scenario_path, name, cfg, out_dir, dump_heads).string()
                << '\n';
    } else if (*eval) {
      const ExperimentConfig cfg = load(config_path, std::nullopt);
      const auto rep = simtrack::cmd_eval(tracks_path, gt_path, cfg.metrics, out_dir);
      const auto& o = rep.classes.back();
      std::cout << "AMOTA " << simtrack::fmt_detail::num(o.amota.amota) << "  MOTA "
                << simtrack::fmt_detail::num(o.mot.mota) << "  IDS " << o.mot.ids << "  FRAGS "
                << o.mot.frags << '\n';
    } else if (*sweep) {
      ExperimentConfig cfg = load(config_path, seed);
      if (!tracker.empty()) {
        if (!simtrack::known_tracker(tracker)) throw ConfigError("unknown tracker '" + tracker + "'");
        cfg.tracker_name = tracker;
      }
      std::vector<simtrack::SweepAxis> axes;
      for (const auto& g : grid) axes.push_back(simtrack::parse_axis(g));
      std::cout << simtrack::cmd_sweep(cfg, axes, out_dir, jobs).string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
