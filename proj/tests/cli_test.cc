// Copyright 2026 The ICU-Sepsis Engine Authors.
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


#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "fixtures.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

using testing::TempDir;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string& official() {
  static const std::string dir = testing::official_dir().string();
  return dir;
}

TEST(Cli, ValidateOfficial) {
  const CliResult r = run({"validate", official()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("716 states, 25 actions"), std::string::npos);
  EXPECT_NE(r.out.find("survival=714 death=713 absorbing=715"), std::string::npos);
  EXPECT_NE(r.out.find("no violations"), std::string::npos);
}

TEST(Cli, SolveAndEvaluate) {
  CliResult r = run({"solve", official()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("J* = 0.875"), std::string::npos) << r.out;
  r = run({"evaluate", official(), "--policy", "random"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("J = 0.780"), std::string::npos) << r.out;
  r = run({"evaluate", official(), "--policy", "expert"});
  EXPECT_NE(r.out.find("J = 0.781"), std::string::npos) << r.out;
}

TEST(Cli, PolicyFileRoundTrip) {
  TempDir dir("cli");
  const std::string pol = (dir / "opt.csv").string();
  ASSERT_EQ(run({"solve", official(), "--policy-out", pol}).code, cli::kOk);
  const CliResult r = run({"evaluate", official(), "--policy", pol, "--iterative"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("J = 0.875"), std::string::npos) << r.out;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"solve", official(), "--bogus"}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"validate", "/no/such/bundle"}).code, cli::kIo);
  EXPECT_EQ(run({"evaluate", official(), "--policy", "nonsense"}).code, cli::kUsage);
  EXPECT_EQ(run({"solve", official(), "--max-iter", "2"}).code, cli::kSolver);
  EXPECT_EQ(run({"build", "/no/such/data.csv", "--out", "/tmp/unused"}).code, cli::kIo);
  EXPECT_EQ(run({"train", official(), "--agent", "a2c"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, InvalidBundleIsValidationFailure) {
  TempDir dir("cli");
  const std::string data = (dir / "d.csv").string();
  ASSERT_EQ(run({"synth", official(), "--episodes", "300", "--out", data}).code, cli::kOk);
  const std::string bundle = (dir / "b").string();
  ASSERT_EQ(run({"build", data, "--out", bundle, "--tau", "1"}).code, cli::kOk);
  // Corrupt one probability.
  const fs::path t = fs::path(bundle) / "transitions.csv";
  std::string text = slurp(t);
  const size_t comma = text.find(',', text.find('\n') + 1);
  ASSERT_NE(comma, std::string::npos);
  text.insert(comma + 1, "7");
  std::ofstream(t) << text;
  const CliResult r = run({"validate", bundle});
  EXPECT_EQ(r.code, cli::kValidation) << r.out << r.err;
}

TEST(Cli, SynthThenBuild) {
  TempDir dir("cli");
  const std::string data = (dir / "episodes.csv").string();
  CliResult r = run({"synth", official(), "--policy", "expert", "--episodes", "2000", "--seed", "3",
               "--out", data});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(slurp(data).rfind("# ", 0), 0u);  // provenance header
  const std::string bundle = (dir / "bundle").string();
  r = run({"build", data, "--out", bundle, "--n-states", "713"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(bundle) / "build_report.txt"));
  EXPECT_TRUE(fs::exists(fs::path(bundle) / "admissible_counts.csv"));
  r = run({"validate", bundle});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  r = run({"report", bundle});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("admissible_actions,states"), std::string::npos);
}

TEST(Cli, TrainWritesTablesWithProvenance) {
  TempDir dir("cli");
  const std::string out = (dir / "run").string();
  const CliResult r = run({"train", official(), "--agent", "sarsa", "--episodes", "300", "--seeds",
                     "2", "--workers", "1", "--set", "learning_rate=0.01", "--out", out});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("seed 0: final-10% return"), std::string::npos) << r.out;
  for (const char* f : {"curves.csv", "summary.csv", "convergence.csv"}) {
    const std::string text = slurp(fs::path(out) / f);
    EXPECT_EQ(text.rfind("# ", 0), 0u) << f;
  }
  EXPECT_NE(slurp(fs::path(out) / "config.txt").find("learning_rate=0.01"), std::string::npos);
  EXPECT_EQ(run({"train", official(), "--set", "learning_rate"}).code, cli::kUsage);
}

TEST(Cli, PerturbAndSearch) {
  TempDir dir("cli");
  const std::string out = (dir / "p").string();
  CliResult r = run({"perturb", official(), "--sigma", "0,0.5", "--policies", "random,optimal",
               "--reps", "2", "--workers", "1", "--out", out});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(slurp(fs::path(out) / "perturbation.csv").rfind("# ", 0), 0u);
  EXPECT_TRUE(fs::exists(fs::path(out) / "perturbation_summary.csv"));

  const fs::path space = dir / "space.txt";
  std::ofstream(space) << "learning_rate = log_uniform(1e-3, 1e-1)\n";
  const std::string csv = (dir / "search.csv").string();
  r = run({"search", official(), "--space", space.string(), "--budget", "2", "--episodes",
           "200", "--workers", "1", "--out", csv});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("#1 score"), std::string::npos);
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("# ", 0), 0u);
  EXPECT_NE(text.find("rank,index,score,learning_rate"), std::string::npos);
}

}  // namespace
}  // namespace icu_sepsis
