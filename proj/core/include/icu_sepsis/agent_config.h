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


#ifndef ICU_SEPSIS_AGENT_CONFIG_H_
#define ICU_SEPSIS_AGENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace icu_sepsis {

enum class Algorithm { kSarsa, kQLearning, kDqn, kSac, kPpo };
enum class OptimizerKind { kAdam, kSgd };

const char* to_string(Algorithm algorithm);
const char* to_string(OptimizerKind kind);
// Throws UsageError for an unknown name.
Algorithm parse_algorithm(const std::string& name);
OptimizerKind parse_optimizer(const std::string& name);

// Hyperparameters for every agent. Fields an algorithm does not use are
// ignored. Names of the serialized keys match the member names.
struct AgentConfig {
  Algorithm algorithm = Algorithm::kQLearning;
  double gamma = 1.0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  double learning_rate = 0.0025;

  // Value-based exploration and replay.
  int64_t buffer_size = 1;
  int batch_size = 1;
  double eps_start = 1.0;
  double eps_end = 0.001;
  double exploration_fraction = 0.1;
  // Horizon of the epsilon schedule in environment steps; 0 lets the trainer
  // fill it in from the episode budget.
  int64_t total_steps = 0;
  int64_t learning_starts = 0;
  int train_frequency = 1;
  double tau = 1.0;  // Polyak coefficient
  int target_update_frequency = 1;

  // PPO.
  int num_steps = 500;
  int num_minibatches = 1;
  double gae_lambda = 0.4;
  int update_epochs = 6;
  bool norm_adv = true;
  double clip_coef = 0.5;
  bool clip_vloss = false;
  double ent_coef = 0.005;
  double vf_coef = 0.3;
  double max_grad_norm = 0.4;
  double target_kl = 0.001;  // <= 0 disables the early stop

  // SAC.
  double policy_lr = 0.025;
  double q_lr = 0.025;
  int update_frequency = 1;
  double alpha = 0.25;
  bool autotune = false;
  double target_entropy_scale = 0.2;

  // Capped episodes bootstrap from the current estimate when true.
  bool bootstrap_truncated = true;

  // The tuned settings for each algorithm.
  static AgentConfig defaults(Algorithm algorithm);

  // Throws UsageError on out-of-range values.
  void check() const;

  // Sets one field from text. Throws UsageError on an unknown key or a
  // malformed value. Setting "algorithm" does not reset other fields.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  // "key=value" lines in a fixed order.
  std::string to_text() const;
  // Starts from defaults(algorithm=...) when that key is present, else from
  // the Q-learning defaults, then applies every other line.
  static AgentConfig from_text(const std::string& text);

  static std::vector<std::string> keys();
};

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_AGENT_CONFIG_H_
