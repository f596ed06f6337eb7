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


#ifndef ICU_SEPSIS_OPTIMIZER_H_
#define ICU_SEPSIS_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "icu_sepsis/agent_config.h"

namespace icu_sepsis {

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline OptimizerSettings optimizer_settings(const AgentConfig& cfg, double lr) {
  return {cfg.optimizer, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
}

// A flat parameter table trained by SGD or Adam.
//
// Adam here behaves like a dense framework optimizer over the whole table:
// every step() advances every entry, including entries whose gradient is
// zero, which keep drifting on their momentum. Doing that densely costs
// O(table) per step, so entries are brought up to date lazily: zero-gradient
// steps are replayed in order when the entry is next read or written. Once an
// entry has gone kSettleSteps steps without a gradient its remaining momentum
// step is below 1e-20 of the learning rate; from then on only its moments
// decay, applied in closed form at the next gradient. The result is
// independent of when entries are read.
class ParamTable {
 public:
  static constexpr int64_t kSettleSteps = 512;

  ParamTable() = default;
  ParamTable(size_t size, const OptimizerSettings& settings, double init = 0.0);

  size_t size() const { return theta_.size(); }
  int64_t steps() const { return t_; }
  const OptimizerSettings& settings() const { return settings_; }
  void set_lr(double lr) { settings_.lr = lr; }

  double get(size_t i) {
    sync(i);
    return theta_[i];
  }
  // Copies [begin, begin + out.size()) into out.
  void read(size_t begin, std::span<double> out);
  // Every entry, brought up to date.
  std::vector<double> snapshot();

  // Overwrites a value without touching optimizer state.
  void assign(size_t i, double value);

  // One optimizer step. Entries not listed get a zero gradient. Indices must
  // be distinct.
  void step(std::span<const size_t> index, std::span<const double> grad);
  // Same with a dense gradient over the whole table.
  void step_dense(std::span<const double> grad);

 private:
  void sync(size_t i);
  double bias1(int64_t t);
  double bias2(int64_t t);

  OptimizerSettings settings_;
  std::vector<double> theta_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::vector<int64_t> synced_;     // optimizer step the entry reflects
  std::vector<int64_t> last_grad_;  // step of the entry's last gradient
  std::vector<double> bias1_;
  std::vector<double> bias2_;
  int64_t t_ = 0;
};

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_OPTIMIZER_H_
