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


#include "icu_sepsis/c_api.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <optional>
#include <string>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/io.h"
#include "icu_sepsis/simulator.h"

using namespace icu_sepsis;

struct icu_sepsis_env {
  std::unique_ptr<TabularMdp> mdp;
  std::unique_ptr<Simulator> sim;
  int max_steps = kDefaultMaxSteps;
  std::optional<Rng> rng;
  StateId state = -1;
  int steps = 0;
  bool active = false;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& message) {
  last_error = message;
  return code;
}

// Maps the engine's exception hierarchy onto status codes.
template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    return fail(ICU_SEPSIS_E_DATA, e.what());
  } catch (const IoError& e) {
    return fail(ICU_SEPSIS_E_IO, e.what());
  } catch (const UsageError& e) {
    return fail(ICU_SEPSIS_E_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ICU_SEPSIS_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ICU_SEPSIS_E_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

icu_sepsis_env* icu_sepsis_env_create(const char* bundle_dir, int max_steps) {
  if (bundle_dir == nullptr) {
    fail(ICU_SEPSIS_E_ARGUMENT, "bundle_dir is null");
    return nullptr;
  }
  auto env = std::make_unique<icu_sepsis_env>();
  const int rc = guarded([&] {
    env->mdp = std::make_unique<TabularMdp>(
        load_mdp(MdpFileBundle::in_directory(bundle_dir)));
    env->sim = std::make_unique<Simulator>(*env->mdp);
    if (max_steps > 0) env->max_steps = max_steps;
    return ICU_SEPSIS_OK;
  });
  return rc == ICU_SEPSIS_OK ? env.release() : nullptr;
}

void icu_sepsis_env_destroy(icu_sepsis_env* env) { delete env; }

int icu_sepsis_env_n_states(const icu_sepsis_env* env) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  return env->mdp->n_states;
}

int icu_sepsis_env_n_actions(const icu_sepsis_env* env) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  return env->mdp->n_actions;
}

int icu_sepsis_env_reset(icu_sepsis_env* env, uint64_t seed, int* observation) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  return guarded([&] {
    env->rng.emplace(seed, 0);
    env->state = env->sim->reset(*env->rng);
    env->steps = 0;
    env->active = true;
    if (observation != nullptr) *observation = env->state;
    return ICU_SEPSIS_OK;
  });
}

int icu_sepsis_env_step(icu_sepsis_env* env, int action, int* observation,
                        double* reward, int* terminated, int* truncated) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  if (!env->active) {
    return fail(ICU_SEPSIS_E_STATE, "step called without an active episode; call reset");
  }
  if (action < 0 || action >= env->mdp->n_actions) {
    return fail(ICU_SEPSIS_E_ARGUMENT,
                "action " + std::to_string(action) + " outside [0, " +
                    std::to_string(env->mdp->n_actions) + ")");
  }
  return guarded([&] {
    const Transition t = env->sim->step(env->state, action, *env->rng);
    env->state = t.next_state;
    ++env->steps;
    const bool cut = !t.terminated && env->steps >= env->max_steps;
    if (t.terminated || cut) env->active = false;
    if (observation != nullptr) *observation = t.next_state;
    if (reward != nullptr) *reward = t.reward;
    if (terminated != nullptr) *terminated = t.terminated ? 1 : 0;
    if (truncated != nullptr) *truncated = cut ? 1 : 0;
    return ICU_SEPSIS_OK;
  });
}

int icu_sepsis_env_admissible(const icu_sepsis_env* env, int state, int* out,
                              int capacity) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  if (state < 0 || state >= env->mdp->n_states) {
    return fail(ICU_SEPSIS_E_ARGUMENT, "state " + std::to_string(state) + " out of range");
  }
  const auto& set = env->mdp->admissible[static_cast<size_t>(state)];
  const int n = static_cast<int>(set.size());
  if (out != nullptr) std::copy_n(set.begin(), std::min(n, std::max(capacity, 0)), out);
  return n;
}

int icu_sepsis_env_steps_taken(const icu_sepsis_env* env) {
  if (env == nullptr) return fail(ICU_SEPSIS_E_ARGUMENT, "env is null");
  return env->steps;
}

const char* icu_sepsis_last_error(void) { return last_error.c_str(); }

}  // extern "C"
