//
// Copyright 2026 The dpgossip Authors.
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
//

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using ::testing::AllOf;
using ::testing::HasSubstr;

struct Result {
  int exit_code = -1;
  std::string output;
};

// Runs the binary with `args`, capturing stdout and stderr together.
Result Invoke(const std::string& args) {
  const std::string command = std::string(DPGOSSIP_BINARY) + " " + args + " 2>&1";
  Result result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  size_t read;
  while ((read = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, read);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string Example(const std::string& name) {
  return std::string(DPGOSSIP_EXAMPLES) + "/" + name;
}

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpgossip_cli_" + std::string(testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(CliTest, RunWritesMetricsAndSummary) {
  Result r = Invoke("run --config " + Example("quadratic.ini") + " --seeds 4 --out " +
                    dir_.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "metrics_seed4.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "summary_seed4.json"));

  std::ifstream metrics(dir_ / "metrics_seed4.jsonl");
  int lines = 0;
  for (std::string line; std::getline(metrics, line); ++lines) {
    nlohmann::json record = nlohmann::json::parse(line);
    EXPECT_EQ(record["t"], lines);
  }
  EXPECT_EQ(lines, 400);
  nlohmann::json summary = nlohmann::json::parse(std::ifstream(dir_ / "summary_seed4.json"));
  EXPECT_EQ(summary["seed"], 4);
  EXPECT_TRUE(summary.contains("theory"));
}

TEST_F(CliTest, RefusesToOverwriteWithoutForce) {
  const std::string args =
      "run --config " + Example("quadratic.ini") + " --seeds 1 --out " + dir_.string();
  ASSERT_EQ(Invoke(args).exit_code, 0);
  Result again = Invoke(args);
  EXPECT_NE(again.exit_code, 0);
  EXPECT_THAT(again.output, HasSubstr("would overwrite"));
  EXPECT_EQ(Invoke(args + " --force").exit_code, 0);
}

TEST_F(CliTest, SeveralSeedsGiveSeveralRuns) {
  Result r = Invoke("run --config " + Example("explicit.ini") + " --seeds 1,2,3 --out " +
                    dir_.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (int seed : {1, 2, 3}) {
    EXPECT_TRUE(fs::exists(dir_ / ("summary_seed" + std::to_string(seed) + ".json")));
  }
}

TEST_F(CliTest, IntervalMismatchNamesBothKeys) {
  fs::create_directories(dir_);
  const fs::path config = dir_ / "bad.ini";
  std::ofstream(config) << "[experiment]\nn = 2\nT = 5\n[lr]\neta = 0.1\n"
                           "[noise]\ntau = 5\n[fusion]\ntau = 6\n";
  Result r = Invoke("run --config " + config.string() + " --out " + (dir_ / "out").string());
  EXPECT_NE(r.exit_code, 0);
  EXPECT_THAT(r.output, AllOf(HasSubstr("fusion.tau"), HasSubstr("noise.tau")));
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, CalcTau) {
  Result r = Invoke("calc tau --theta 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  nlohmann::json out = nlohmann::json::parse(r.output);
  EXPECT_EQ(out["tau"], 5);
  EXPECT_EQ(out["reported_tau"], 6);
}

TEST_F(CliTest, CalcSigma) {
  Result r = Invoke("calc sigma --epsilon 2 --delta 1e-5 --ratio 0.01 --G 0.1 --T 1000 --c1 100");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NEAR(nlohmann::json::parse(r.output)["sigma"].get<double>(), 0.05364, 1e-5);
  Result violated = Invoke("calc sigma --epsilon 2 --delta 1e-5 --ratio 0.01 --G 0.1 --T 1000");
  EXPECT_NE(violated.exit_code, 0);
  EXPECT_THAT(violated.output, HasSubstr("epsilon < c1"));
}

TEST_F(CliTest, CalcRegimeLabel) {
  Result r = Invoke("calc regime --p 0 --n 8 --T 1000 --s 0.25 --L 1 --C 1 --q 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(nlohmann::json::parse(r.output)["regime"], "(log T)^2 / sqrt(nT)");
  EXPECT_NE(Invoke("calc regime --p 0.5 --n 8 --T 1000 --L 1 --C 1 --q 0.5").exit_code, 0);
}

TEST_F(CliTest, CalcMinIterationsAndBound) {
  Result min_t = Invoke("calc minT --L 1 --C 1 --q 0 --n 1 --p 0.5 --K 1");
  ASSERT_EQ(min_t.exit_code, 0) << min_t.output;
  EXPECT_EQ(nlohmann::json::parse(min_t.output)["min_iterations"], 162);
  Result bound = Invoke(
      "calc bound --L 1 --a 1 --m 1 --C 1 --q 0 --F0 1 --x0-norm 1 --d 1 --n 1 --T 1 "
      "--theta 0.5 --tau 6 --M 1 --rho 1 --upsilon 1");
  ASSERT_EQ(bound.exit_code, 0) << bound.output;
  nlohmann::json out = nlohmann::json::parse(bound.output);
  EXPECT_EQ(out["A1"], 186.0);
  EXPECT_EQ(out["A2"], 60.0);
  EXPECT_EQ(out["A3"], 110.0);
}

TEST_F(CliTest, VerifySuites) {
  Result ok = Invoke("verify connectivity");
  EXPECT_EQ(ok.exit_code, 0) << ok.output;
  EXPECT_THAT(ok.output, HasSubstr("[PASS]"));
  EXPECT_THAT(ok.output, testing::Not(HasSubstr("[FAIL]")));
  Result unknown = Invoke("verify bogus");
  EXPECT_NE(unknown.exit_code, 0);
  EXPECT_THAT(unknown.output, HasSubstr("unknown suite"));
}

}  // namespace
