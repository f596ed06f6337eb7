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

#ifndef ICU_SEPSIS_RNG_H_
#define ICU_SEPSIS_RNG_H_

#include <cstdint>

namespace icu_sepsis {

// SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014). The state is a single 64-bit counter advanced by
// the golden-ratio increment; each output is a bijective mix of the counter.
// uniform() and uniform_int() use integer arithmetic or exact dyadic scaling,
// so a given (seed, stream) produces the same sequence on every platform.
// normal() goes through libm and is only used for test fixtures.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer on [0, n), unbiased (Lemire's multiply-and-reject).
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller on two uniform() draws.
  double normal();

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }
  uint64_t counter() const { return state_; }

  // Derives an independent child generator; used to give each
  // (run, component) pair its own stream.
  Rng split(uint64_t child_stream) const;

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t state_;
};

// The 64-bit finalizer used by SplitMix64; exposed for seed derivation.
uint64_t mix64(uint64_t z);

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_RNG_H_
