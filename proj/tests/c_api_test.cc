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

#include <algorithm>
#include <memory>
#include <vector>

#include "fixtures.h"
#include "icu_sepsis/c_api.h"
#include "icu_sepsis/io.h"
#include "icu_sepsis/simulator.h"

namespace icu_sepsis {
namespace {

struct EnvDeleter {
  void operator()(icu_sepsis_env* e) const { icu_sepsis_env_destroy(e); }
};
using EnvPtr = std::unique_ptr<icu_sepsis_env, EnvDeleter>;

EnvPtr open(int max_steps = 0) {
  return EnvPtr(icu_sepsis_env_create(testing::official_dir().c_str(), max_steps));
}

TEST(CApi, CreateReportsShape) {
  EnvPtr env = open();
  ASSERT_NE(env, nullptr) << icu_sepsis_last_error();
  EXPECT_EQ(icu_sepsis_env_n_states(env.get()), 716);
  EXPECT_EQ(icu_sepsis_env_n_actions(env.get()), 25);
}

TEST(CApi, CreateFailureSetsMessage) {
  EXPECT_EQ(icu_sepsis_env_create("/nonexistent/bundle", 0), nullptr);
  EXPECT_NE(std::string(icu_sepsis_last_error()), "");
  EXPECT_EQ(icu_sepsis_env_create(nullptr, 0), nullptr);
  icu_sepsis_env_destroy(nullptr);
}

TEST(CApi, ResetIsDeterministicAndStartsLive) {
  EnvPtr env = open();
  int a = -1, b = -1;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    ASSERT_EQ(icu_sepsis_env_reset(env.get(), seed, &a), ICU_SEPSIS_OK);
    ASSERT_EQ(icu_sepsis_env_reset(env.get(), seed, &b), ICU_SEPSIS_OK);
    EXPECT_EQ(a, b);
    EXPECT_GE(a, 0);
    EXPECT_LT(a, 713);
  }
}

TEST(CApi, MatchesSimulatorStream) {
  const TabularMdp mdp = load_mdp(MdpFileBundle::in_directory(testing::official_dir()));
  const Simulator sim(mdp);
  EnvPtr env = open();
  Rng rng(42, 0);
  int obs = -1;
  ASSERT_EQ(icu_sepsis_env_reset(env.get(), 42, &obs), ICU_SEPSIS_OK);
  StateId s = sim.reset(rng);
  ASSERT_EQ(obs, s);
  for (int k = 0; k < 100; ++k) {
    const int action = k % 25;
    double reward = -1;
    int term = -1, trunc = -1;
    ASSERT_EQ(icu_sepsis_env_step(env.get(), action, &obs, &reward, &term, &trunc),
              ICU_SEPSIS_OK);
    const Transition t = sim.step(s, action, rng);
    EXPECT_EQ(obs, t.next_state);
    EXPECT_EQ(reward, t.reward);
    EXPECT_EQ(term != 0, t.terminated);
    if (t.terminated) break;
    s = t.next_state;
  }
}

TEST(CApi, EpisodeContract) {
  EnvPtr env = open();
  int obs = 0, term = 0, trunc = 0;
  double reward = 0;
  EXPECT_EQ(icu_sepsis_env_step(env.get(), 0, &obs, &reward, &term, &trunc),
            ICU_SEPSIS_E_STATE);
  int survivals = 0, episodes = 0;
  for (uint64_t seed = 0; seed < 300; ++seed, ++episodes) {
    ASSERT_EQ(icu_sepsis_env_reset(env.get(), seed, &obs), ICU_SEPSIS_OK);
    term = trunc = 0;
    int steps = 0;
    while (!term && !trunc) {
      ASSERT_EQ(icu_sepsis_env_step(env.get(), static_cast<int>(seed % 25), &obs,
                                    &reward, &term, &trunc),
                ICU_SEPSIS_OK);
      ++steps;
      if (!term) EXPECT_EQ(reward, 0.0);
    }
    EXPECT_EQ(icu_sepsis_env_steps_taken(env.get()), steps);
    if (term) {
      EXPECT_TRUE(obs == 713 || obs == 714);
      EXPECT_EQ(reward, obs == 714 ? 1.0 : 0.0);
      survivals += obs == 714;
    }
    EXPECT_EQ(icu_sepsis_env_step(env.get(), 0, &obs, &reward, &term, &trunc),
              ICU_SEPSIS_E_STATE);
  }
  EXPECT_GT(survivals, 0);
  EXPECT_LT(survivals, episodes);
  EXPECT_EQ(icu_sepsis_env_reset(env.get(), 0, &obs), ICU_SEPSIS_OK);
  EXPECT_EQ(icu_sepsis_env_step(env.get(), 25, &obs, &reward, &term, &trunc),
            ICU_SEPSIS_E_ARGUMENT);
  EXPECT_EQ(icu_sepsis_env_step(env.get(), 0, nullptr, nullptr, nullptr, nullptr),
            ICU_SEPSIS_OK);
  EXPECT_EQ(icu_sepsis_env_steps_taken(env.get()), 1);
}

TEST(CApi, TruncatesAtCap) {
  EnvPtr env = open(1);
  int obs = 0, term = 0, trunc = 0;
  double reward = 0;
  int truncated = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    icu_sepsis_env_reset(env.get(), seed, &obs);
    ASSERT_EQ(icu_sepsis_env_step(env.get(), 0, &obs, &reward, &term, &trunc), ICU_SEPSIS_OK);
    EXPECT_TRUE(term || trunc);
    truncated += trunc;
  }
  EXPECT_GT(truncated, 0);
}

TEST(CApi, AdmissibleSets) {
  const TabularMdp mdp = load_mdp(MdpFileBundle::in_directory(testing::official_dir()));
  EnvPtr env = open();
  std::vector<int> buf(25);
  for (int s = 0; s < 716; ++s) {
    const int n = icu_sepsis_env_admissible(env.get(), s, buf.data(), 25);
    const auto& want = mdp.admissible[static_cast<size_t>(s)];
    ASSERT_EQ(n, static_cast<int>(want.size()));
    ASSERT_GT(n, 0);
    for (int i = 0; i < n; ++i) EXPECT_EQ(buf[static_cast<size_t>(i)], want[static_cast<size_t>(i)]);
  }
  // A short buffer still reports the full count.
  int one = -1;
  EXPECT_EQ(icu_sepsis_env_admissible(env.get(), 0, &one, 1),
            static_cast<int>(mdp.admissible[0].size()));
  EXPECT_EQ(one, mdp.admissible[0][0]);
  EXPECT_EQ(icu_sepsis_env_admissible(env.get(), 716, buf.data(), 25), ICU_SEPSIS_E_ARGUMENT);
}

}  // namespace
}  // namespace icu_sepsis
