/* Copyright 2026 The htnmr Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef HTNMR_CLI_PATH
#error "HTNMR_CLI_PATH must be defined by the build"
#endif
#ifndef HTNMR_SOURCE_DIR
#error "HTNMR_SOURCE_DIR must be defined by the build"
#endif

const std::string kCli = HTNMR_CLI_PATH;
const std::string kSrc = HTNMR_SOURCE_DIR;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("htnmr_cli_" + tag);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate is byte-identical for a fixed seed") {
  const fs::path a = temp_dir("rep_a");
  const fs::path b = temp_dir("rep_b");
  const std::string cfg = kSrc + "/configs/hcn.json";
  REQUIRE(run("simulate --config " + cfg + " --seed 5 --out " + a.string()) == 0);
  REQUIRE(run("simulate --config " + cfg + " --seed 5 --out " + b.string()) == 0);
  for (const char* name : {"trace.csv", "spectrum.csv", "peaks.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK_FALSE(slurp(a / name).empty());
  }
  const fs::path c = temp_dir("rep_c");
  REQUIRE(run("simulate --config " + cfg + " --seed 6 --out " + c.string()) == 0);
  CHECK(slurp(a / "trace.csv") != slurp(c / "trace.csv"));
}

TEST_CASE("output files carry a version and config-hash header") {
  const fs::path out = temp_dir("hdr");
  const std::string cfg = kSrc + "/configs/hcn.json";
  REQUIRE(run("simulate --config " + cfg + " --out " + out.string()) == 0);
  const std::string trace = slurp(out / "trace.csv");
  CHECK(trace.rfind("# htnmr v", 0) == 0);
  CHECK(trace.find("config=0x") != std::string::npos);
  const std::string peaks = slurp(out / "peaks.json");
  CHECK(peaks.find("config_hash") != std::string::npos);
}

TEST_CASE("missing molecule exits 2 with no partial output") {
  const fs::path out = temp_dir("missing");
  CHECK(run("simulate --molecule /nonexistent/mol.json --out " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out / "trace.csv"));
}

TEST_CASE("malformed config exits 2") {
  const fs::path bad = fs::temp_directory_path() / "htnmr_bad_config.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run("simulate --config " + bad.string()) == 2);
}

TEST_CASE("validate passes on the reference molecule and random checks") {
  const std::string cfg = kSrc + "/configs/hcn.json";
  CHECK(run("validate --config " + cfg + " --random 3 --seed 11") == 0);
}

TEST_CASE("sensitivity writes report and sweep files") {
  const fs::path out = temp_dir("sens");
  const std::string cfg = kSrc + "/configs/hcn.json";
  REQUIRE(run("sensitivity --config " + cfg + " --sweep-t2nv 1e-6:3e-5:10 --out " +
              out.string()) == 0);
  const std::string report = slurp(out / "report.json");
  CHECK(report.find("snr_ratio_pred") != std::string::npos);
  const std::string fig2 = slurp(out / "fig2.csv");
  int lines = 0;
  for (char ch : fig2)
    if (ch == '\n') ++lines;
  CHECK(lines == 12);  // header, column line, 10 grid points
}

TEST_CASE("standard mode simulates the direct protocol") {
  const fs::path out = temp_dir("std");
  const std::string cfg = kSrc + "/configs/hcn.json";
  REQUIRE(run("simulate --config " + cfg + " --mode standard --out " + out.string()) == 0);
  const std::string peaks = slurp(out / "peaks.json");
  CHECK(peaks.find("\"mode\": \"standard\"") != std::string::npos);
}
