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


// Plain C entry points for driving the simulator from other languages.
// Every call returning int yields ICU_SEPSIS_OK (0) or a negative status;
// icu_sepsis_last_error() describes the most recent failure on this thread.

#ifndef ICU_SEPSIS_C_API_H_
#define ICU_SEPSIS_C_API_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ICU_SEPSIS_OK 0
#define ICU_SEPSIS_E_ARGUMENT (-1)
#define ICU_SEPSIS_E_DATA (-2)
#define ICU_SEPSIS_E_IO (-3)
#define ICU_SEPSIS_E_STATE (-4)
#define ICU_SEPSIS_E_INTERNAL (-5)

typedef struct icu_sepsis_env icu_sepsis_env;

// max_steps <= 0 selects the engine default (5000). Returns NULL on failure.
icu_sepsis_env* icu_sepsis_env_create(const char* bundle_dir, int max_steps);
void icu_sepsis_env_destroy(icu_sepsis_env* env);

int icu_sepsis_env_n_states(const icu_sepsis_env* env);
int icu_sepsis_env_n_actions(const icu_sepsis_env* env);

int icu_sepsis_env_reset(icu_sepsis_env* env, uint64_t seed, int* observation);

// Fails with ICU_SEPSIS_E_STATE before the first reset and after the episode
// has terminated or been truncated. Any output pointer may be NULL.
int icu_sepsis_env_step(icu_sepsis_env* env, int action, int* observation,
                        double* reward, int* terminated, int* truncated);

// Writes up to `capacity` admissible actions of `state` into `out` and
// returns the full count (call with capacity 0 to size the buffer).
int icu_sepsis_env_admissible(const icu_sepsis_env* env, int state, int* out,
                              int capacity);

int icu_sepsis_env_steps_taken(const icu_sepsis_env* env);

const char* icu_sepsis_last_error(void);

#ifdef __cplusplus
}
#endif

#endif  // ICU_SEPSIS_C_API_H_
