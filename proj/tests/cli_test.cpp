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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "simtrack/io.hpp"

namespace simtrack {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("simtrack_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult Exec(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd =
        std::string("\"") + SIMTRACK_CLI + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_text_file(err.string());
    return r;
  }

  fs::path Config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string Small(const std::string& seeds) {
    return R"({"seeds": )" + seeds +
           R"(, "scenario": {"frames": 8, "min_objects": 2, "max_objects": 4},
                "metrics": {"n_recalls": 10, "curve_points": 10}})";
  }

  static int Count(const fs::path& d) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(d)) n += e.is_regular_file();
    return n;
  }

  fs::path dir_;
};

TEST_F(Cli, GenOneSeed) {
  const fs::path cfg = Config("c.json", Small("[0]"));
  ASSERT_EQ(Exec("gen --config " + cfg.string() + " --out " + (dir_ / "g").string()).code, 0);
  EXPECT_EQ(Count(dir_ / "g"), 2);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "scenario_seed0.json"));
  EXPECT_TRUE(fs::exists(dir_ / "g" / "gt_seed0.jsonl"));
}

TEST_F(Cli, GenFiveSeedsDeterministicNames) {
  const fs::path cfg = Config("c.json", Small("[1, 2, 3, 4, 5]"));
  ASSERT_EQ(Exec("gen --config " + cfg.string() + " --out " + (dir_ / "g").string()).code, 0);
  EXPECT_EQ(Count(dir_ / "g"), 10);
  for (int s = 1; s <= 5; ++s) {
    EXPECT_TRUE(fs::exists(dir_ / "g" / ("scenario_seed" + std::to_string(s) + ".json")));
    EXPECT_TRUE(fs::exists(dir_ / "g" / ("gt_seed" + std::to_string(s) + ".jsonl")));
  }
}

TEST_F(Cli, SeedFlagOverridesList) {
  const fs::path cfg = Config("c.json", Small("[1, 2, 3]"));
  ASSERT_EQ(
      Exec("gen --config " + cfg.string() + " --seed 42 --out " + (dir_ / "g").string()).code, 0);
  EXPECT_EQ(Count(dir_ / "g"), 2);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "scenario_seed42.json"));
}

TEST_F(Cli, MalformedConfigNamesKey) {
  const fs::path cfg = Config("bad.json", R"({"tracker": {"nms_windw": 3}})");
  const CliResult r = Exec("gen --config " + cfg.string() + " --out " + (dir_ / "g").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("tracker.nms_windw"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(Exec("").code, 1); }

TEST_F(Cli, UnknownTracker) {
  const fs::path cfg = Config("c.json", Small("[0]"));
  ASSERT_EQ(Exec("gen --config " + cfg.string() + " --out " + dir_.string()).code, 0);
  const CliResult r = Exec("track --scenario " + (dir_ / "scenario_seed0.json").string() +
                     " --tracker sort --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("sort"), std::string::npos);
}

TEST_F(Cli, EvalFrameMismatchIsRuntimeError) {
  const fs::path a = Config("a.json", Small("[0]"));
  const fs::path b = Config("b.json", R"({"scenario": {"frames": 5, "min_objects": 1, "max_objects": 3}})");
  ASSERT_EQ(Exec("gen --config " + a.string() + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(Exec("gen --config " + b.string() + " --out " + (dir_ / "b").string()).code, 0);
  ASSERT_EQ(Exec("track --scenario " + (dir_ / "a" / "scenario_seed0.json").string() +
                 " --config " + a.string() + " --out " + (dir_ / "a").string())
                .code,
            0);
  const CliResult r = Exec("eval --tracks " + (dir_ / "a" / "tracks_simtrack_seed0.jsonl").string() +
                     " --gt " + (dir_ / "b" / "gt_seed0.jsonl").string() + " --out " +
                     (dir_ / "e").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("frames"), std::string::npos) << r.err;
}

TEST_F(Cli, EvalTwiceIsByteIdentical) {
  const fs::path cfg = Config("c.json", Small("[3]"));
  const std::string c = " --config " + cfg.string();
  ASSERT_EQ(Exec("gen" + c + " --out " + dir_.string()).code, 0);
  ASSERT_EQ(Exec("track --scenario " + (dir_ / "scenario_seed3.json").string() +
                 " --tracker greedy" + c + " --out " + dir_.string())
                .code,
            0);
  const fs::path tracks = dir_ / "tracks_greedy_seed3.jsonl";
  const std::string ev = "eval --tracks " + tracks.string() + " --gt " +
                         (dir_ / "gt_seed3.jsonl").string() + c + " --out ";
  ASSERT_EQ(Exec(ev + (dir_ / "e1").string()).code, 0);
  ASSERT_EQ(Exec(ev + (dir_ / "e2").string()).code, 0);
  for (const char* f : {"metrics.csv", "summary.json", "curves.csv"}) {
    EXPECT_EQ(read_text_file((dir_ / "e1" / f).string()), read_text_file((dir_ / "e2" / f).string()))
        << f;
  }
}

TEST_F(Cli, EveryOutputCarriesHashAndSeed) {
  const fs::path cfg = Config("c.json", Small("[7]"));
  const std::string c = " --config " + cfg.string();
  ASSERT_EQ(Exec("gen" + c + " --out " + dir_.string()).code, 0);
  ASSERT_EQ(Exec("track --scenario " + (dir_ / "scenario_seed7.json").string() + c + " --out " +
                 dir_.string())
                .code,
            0);
  ASSERT_EQ(Exec("eval --tracks " + (dir_ / "tracks_simtrack_seed7.jsonl").string() + " --gt " +
                 (dir_ / "gt_seed7.jsonl").string() + c + " --out " + dir_.string())
                .code,
            0);
  const std::string hash =
      Json::parse(read_text_file((dir_ / "scenario_seed7.json").string())).at("config_hash");
  ASSERT_EQ(hash.size(), 16u);
  for (const char* f : {"gt_seed7.jsonl", "tracks_simtrack_seed7.jsonl", "metrics.csv",
                        "summary.json", "curves.csv"}) {
    const std::string text = read_text_file((dir_ / f).string());
    EXPECT_NE(text.find(hash), std::string::npos) << f;
    EXPECT_NE(text.find('7'), std::string::npos) << f;
  }
}

TEST_F(Cli, EndToEndDeterminism) {
  const fs::path cfg = Config("c.json", Small("[5]"));
  const std::string c = " --config " + cfg.string();
  for (const char* sub : {"r1", "r2"}) {
    const fs::path d = dir_ / sub;
    ASSERT_EQ(Exec("gen" + c + " --out " + d.string()).code, 0);
    ASSERT_EQ(Exec("track --scenario " + (d / "scenario_seed5.json").string() +
                   " --tracker kalman --dump-heads" + c + " --out " + d.string())
                  .code,
              0);
    ASSERT_EQ(Exec("eval --tracks " + (d / "tracks_kalman_seed5.jsonl").string() + " --gt " +
                   (d / "gt_seed5.jsonl").string() + c + " --out " + d.string())
                  .code,
              0);
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "r1")) {
    const std::string name = e.path().filename().string();
    if (name == "stderr.txt") continue;
    EXPECT_EQ(read_text_file(e.path().string()),
              read_text_file((dir_ / "r2" / name).string()))
        << name;
    ++compared;
  }
  EXPECT_EQ(compared, 7);
}

TEST_F(Cli, SweepCountsRows) {
  const fs::path cfg = Config("c.json", Small("[0, 1, 2]"));
  ASSERT_EQ(Exec("sweep --config " + cfg.string() +
                 " --tracker greedy --grid baseline.max_age=0,3 --grid baseline.min_hits=1,2"
                 " --jobs 2 --out " + dir_.string())
                .code,
            0);
  std::ifstream in(dir_ / "sweep.csv");
  std::string line;
  int runs = 0, means = 0, comments = 0, headers = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      ++comments;
    } else if (line.rfind("cell,", 0) == 0) {
      ++headers;
    } else if (line.find(",mean,") != std::string::npos) {
      ++means;
    } else if (!line.empty()) {
      ++runs;
    }
  }
  EXPECT_EQ(comments, 1);
  EXPECT_EQ(headers, 1);
  EXPECT_EQ(runs, 12);
  EXPECT_EQ(means, 4);
}

TEST_F(Cli, SweepUnknownPathIsConfigError) {
  const fs::path cfg = Config("c.json", Small("[0]"));
  const CliResult r = Exec("sweep --config " + cfg.string() + " --grid baseline.max_agee=0,3 --out " +
                     dir_.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("baseline.max_agee"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace simtrack
