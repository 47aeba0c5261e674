// Copyright 2026 The Vidal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VIDAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("synth, run and report") {
  const fs::path dir = vidal::test::scratch_dir("cli");
  const std::string d = dir.string();

  REQUIRE(run("synth --out " + d + "/data/videos.jsonl --classes 3 --videos-per-class 30 --n-frames 6 --dim 4 --seed 3 --assets") == 0);
  CHECK(fs::exists(dir / "data/videos.jsonl"));
  CHECK(fs::exists(dir / "data/frames/syn-c0-0/0.ppm"));

  {
    std::ofstream cfg(dir / "exp.yaml");
    cfg << "b: 4\nk: 2\niterations: 2\nseeds: [1, 2]\n"
           "dataset:\n  manifest: data/videos.jsonl\n"
           "split: {L: 12, U: 30, T: 15, L_oracle: 24, T_oracle: 9}\n"
           "base_train: {epochs: 30}\noracle_train: {epochs: 30}\n";
  }
  REQUIRE(run("run " + d + "/exp.yaml --strategy proposed --strategy rr --out " + d + "/out") == 0);
  for (const char* f : {"report.json", "timings.json", "accuracy.csv", "oracle_stats.csv"})
    CHECK(fs::exists(dir / "out" / f));

  const auto report = nlohmann::json::parse(slurp(dir / "out/report.json"));
  CHECK(report.at("format") == "vidal-report");
  CHECK(report.at("version") == 1);

  const std::string csv = slurp(dir / "out/accuracy.csv");
  CHECK(csv.rfind("iteration,strategy,mean,std\n", 0) == 0);
  // Header plus iterations 0..2 for two strategies.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  // Re-running yields identical report bytes.
  REQUIRE(run("run " + d + "/exp.yaml --strategy proposed --strategy rr --out " + d + "/out2") == 0);
  CHECK(slurp(dir / "out/report.json") == slurp(dir / "out2/report.json"));

  // CSVs can be regenerated from the report alone.
  REQUIRE(run("report " + d + "/out/report.json --out " + d + "/again") == 0);
  CHECK(slurp(dir / "again/accuracy.csv") == csv);
  CHECK(slurp(dir / "again/oracle_stats.csv") == slurp(dir / "out/oracle_stats.csv"));

  fs::remove_all(dir);
}

TEST_CASE("bad input exits non-zero") {
  const fs::path dir = vidal::test::scratch_dir("cli-bad");
  {
    std::ofstream cfg(dir / "bad.yaml");
    cfg << "b: 4\nbogus: 1\n";
  }
  CHECK(run("run " + (dir / "bad.yaml").string()) != 0);
  CHECK(run("run " + (dir / "absent.yaml").string()) != 0);
  CHECK(run("run " + (dir / "bad.yaml").string() + " --strategy nope") != 0);
  CHECK(run("frobnicate") != 0);
  fs::remove_all(dir);
}
