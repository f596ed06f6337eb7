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


#include "icu_sepsis/agent_config.h"

#include <charconv>
#include <sstream>
#include <variant>

#include "icu_sepsis/errors.h"
#include "icu_sepsis/io.h"

namespace icu_sepsis {
namespace {

using Field = std::variant<double AgentConfig::*, int AgentConfig::*,
                           int64_t AgentConfig::*, bool AgentConfig::*>;

struct NamedField {
  const char* name;
  Field field;
};

const std::vector<NamedField>& fields() {
  static const std::vector<NamedField> table = {
      {"gamma", &AgentConfig::gamma},
      {"adam_beta1", &AgentConfig::adam_beta1},
      {"adam_beta2", &AgentConfig::adam_beta2},
      {"adam_eps", &AgentConfig::adam_eps},
      {"learning_rate", &AgentConfig::learning_rate},
      {"buffer_size", &AgentConfig::buffer_size},
      {"batch_size", &AgentConfig::batch_size},
      {"eps_start", &AgentConfig::eps_start},
      {"eps_end", &AgentConfig::eps_end},
      {"exploration_fraction", &AgentConfig::exploration_fraction},
      {"total_steps", &AgentConfig::total_steps},
      {"learning_starts", &AgentConfig::learning_starts},
      {"train_frequency", &AgentConfig::train_frequency},
      {"tau", &AgentConfig::tau},
      {"target_update_frequency", &AgentConfig::target_update_frequency},
      {"num_steps", &AgentConfig::num_steps},
      {"num_minibatches", &AgentConfig::num_minibatches},
      {"gae_lambda", &AgentConfig::gae_lambda},
      {"update_epochs", &AgentConfig::update_epochs},
      {"norm_adv", &AgentConfig::norm_adv},
      {"clip_coef", &AgentConfig::clip_coef},
      {"clip_vloss", &AgentConfig::clip_vloss},
      {"ent_coef", &AgentConfig::ent_coef},
      {"vf_coef", &AgentConfig::vf_coef},
      {"max_grad_norm", &AgentConfig::max_grad_norm},
      {"target_kl", &AgentConfig::target_kl},
      {"policy_lr", &AgentConfig::policy_lr},
      {"q_lr", &AgentConfig::q_lr},
      {"update_frequency", &AgentConfig::update_frequency},
      {"alpha", &AgentConfig::alpha},
      {"autotune", &AgentConfig::autotune},
      {"target_entropy_scale", &AgentConfig::target_entropy_scale},
      {"bootstrap_truncated", &AgentConfig::bootstrap_truncated},
  };
  return table;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("bad value for " + key + ": '" + text + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("bad value for " + key + ": '" + text + "'");
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSarsa: return "sarsa";
    case Algorithm::kQLearning: return "qlearning";
    case Algorithm::kDqn: return "dqn";
    case Algorithm::kSac: return "sac";
    case Algorithm::kPpo: return "ppo";
  }
  return "unknown";
}

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kSarsa, Algorithm::kQLearning, Algorithm::kDqn,
                      Algorithm::kSac, Algorithm::kPpo}) {
    if (name == to_string(a)) return a;
  }
  throw UsageError("unknown algorithm '" + name +
                   "' (expected sarsa, qlearning, dqn, sac or ppo)");
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw UsageError("unknown optimizer '" + name + "' (expected adam or sgd)");
}

AgentConfig AgentConfig::defaults(Algorithm algorithm) {
  AgentConfig c;
  c.algorithm = algorithm;
  switch (algorithm) {
    case Algorithm::kQLearning:
      break;
    case Algorithm::kSarsa:
      c.exploration_fraction = 0.25;
      break;
    case Algorithm::kDqn:
      c.learning_rate = 0.001;
      c.buffer_size = 10000;
      c.batch_size = 64;
      c.exploration_fraction = 0.25;
      c.learning_starts = 10000;
      c.train_frequency = 10;
      c.tau = 0.01;
      c.target_update_frequency = 512;
      break;
    case Algorithm::kSac:
      c.buffer_size = 10000;
      c.batch_size = 64;
      c.learning_starts = 10000;
      c.tau = 0.01;
      c.target_update_frequency = 500;
      break;
    case Algorithm::kPpo:
      c.learning_rate = 0.005;
      break;
  }
  return c;
}

void AgentConfig::check() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("invalid agent config: ") + what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(policy_lr > 0.0 && q_lr > 0.0, "policy_lr and q_lr must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(buffer_size >= 1 && batch_size >= 1, "buffer and batch sizes must be >= 1");
  require(eps_start >= 0.0 && eps_start <= 1.0, "eps_start must be in [0, 1]");
  require(eps_end >= 0.0 && eps_end <= 1.0, "eps_end must be in [0, 1]");
  require(exploration_fraction >= 0.0 && exploration_fraction <= 1.0,
          "exploration_fraction must be in [0, 1]");
  require(total_steps >= 0 && learning_starts >= 0, "step counts must be >= 0");
  require(train_frequency >= 1 && target_update_frequency >= 1 &&
              update_frequency >= 1,
          "frequencies must be >= 1");
  require(tau > 0.0 && tau <= 1.0, "tau must be in (0, 1]");
  require(num_steps >= 1 && num_minibatches >= 1 && update_epochs >= 1,
          "PPO counts must be >= 1");
  require(num_minibatches <= num_steps, "num_minibatches exceeds num_steps");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda must be in [0, 1]");
  require(clip_coef > 0.0, "clip_coef must be positive");
  require(ent_coef >= 0.0 && vf_coef >= 0.0, "loss coefficients must be >= 0");
  require(max_grad_norm > 0.0, "max_grad_norm must be positive");
  require(alpha >= 0.0, "alpha must be >= 0");
  require(target_entropy_scale >= 0.0 && target_entropy_scale <= 1.0,
          "target_entropy_scale must be in [0, 1]");
}

void AgentConfig::set(const std::string& key, const std::string& value) {
  if (key == "algorithm") {
    algorithm = parse_algorithm(value);
    return;
  }
  if (key == "optimizer") {
    optimizer = parse_optimizer(value);
    return;
  }
  for (const NamedField& f : fields()) {
    if (key != f.name) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            this->*member = parse_bool(key, value);
          } else {
            this->*member = parse_number<T>(key, value);
          }
        },
        f.field);
    return;
  }
  throw UsageError("unknown agent config key '" + key + "'");
}

std::map<std::string, std::string> AgentConfig::to_map() const {
  std::map<std::string, std::string> out;
  out["algorithm"] = to_string(algorithm);
  out["optimizer"] = to_string(optimizer);
  for (const NamedField& f : fields()) {
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            out[f.name] = this->*member ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            out[f.name] = format_double(this->*member);
          } else {
            out[f.name] = std::to_string(this->*member);
          }
        },
        f.field);
  }
  return out;
}

std::vector<std::string> AgentConfig::keys() {
  std::vector<std::string> out = {"algorithm", "optimizer"};
  for (const NamedField& f : fields()) out.emplace_back(f.name);
  return out;
}

std::string AgentConfig::to_text() const {
  const auto m = to_map();
  std::string out;
  for (const std::string& k : keys()) out += k + "=" + m.at(k) + "\n";
  return out;
}

AgentConfig AgentConfig::from_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  AgentConfig cfg;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value: '" + t + "'");
    entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  for (const auto& [k, v] : entries) {
    if (k == "algorithm") cfg = defaults(parse_algorithm(v));
  }
  for (const auto& [k, v] : entries) {
    if (k != "algorithm") cfg.set(k, v);
  }
  return cfg;
}

}  // namespace icu_sepsis
