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


#include "icu_sepsis/optimizer.h"

#include <cmath>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {

ParamTable::ParamTable(size_t size, const OptimizerSettings& settings, double init)
    : settings_(settings), theta_(size, init) {
  if (!(settings.lr > 0.0)) throw UsageError("learning rate must be positive");
  if (settings.kind == OptimizerKind::kAdam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
    synced_.assign(size, 0);
    last_grad_.assign(size, 0);
  }
}

// Bias corrections 1 - beta^t, cached until they reach 1.0 exactly.
double ParamTable::bias1(int64_t t) {
  while (static_cast<int64_t>(bias1_.size()) < t &&
         (bias1_.empty() || bias1_.back() != 1.0)) {
    bias1_.push_back(1.0 - std::pow(settings_.beta1,
                                    static_cast<double>(bias1_.size() + 1)));
  }
  return t <= static_cast<int64_t>(bias1_.size()) ? bias1_[static_cast<size_t>(t - 1)]
                                                  : 1.0;
}

double ParamTable::bias2(int64_t t) {
  while (static_cast<int64_t>(bias2_.size()) < t &&
         (bias2_.empty() || bias2_.back() != 1.0)) {
    bias2_.push_back(1.0 - std::pow(settings_.beta2,
                                    static_cast<double>(bias2_.size() + 1)));
  }
  return t <= static_cast<int64_t>(bias2_.size()) ? bias2_[static_cast<size_t>(t - 1)]
                                                  : 1.0;
}

void ParamTable::sync(size_t i) {
  if (settings_.kind != OptimizerKind::kAdam) return;
  int64_t& k = synced_[i];
  if (k >= t_) return;
  const int64_t settle = last_grad_[i] + kSettleSteps;
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  // Entries that never received a gradient have m = v = 0 and never move.
  if (last_grad_[i] == 0) {
    k = t_;
    return;
  }
  const int64_t stop = std::min(t_, settle);
  double m = m_[i];
  double v = v_[i];
  double th = theta_[i];
  for (int64_t s = k + 1; s <= stop; ++s) {
    m *= b1;
    v *= b2;
    const double denom = std::sqrt(v) / std::sqrt(bias2(s)) + settings_.eps;
    th -= settings_.lr / bias1(s) * (m / denom);
  }
  m_[i] = m;
  v_[i] = v;
  theta_[i] = th;
  k = std::max(k, stop);
  // Past the settle point the moments stay frozen at their settle values
  // until the next gradient, which applies the remaining decay in one go.
  if (t_ > settle) k = t_;
}

void ParamTable::read(size_t begin, std::span<double> out) {
  for (size_t j = 0; j < out.size(); ++j) out[j] = get(begin + j);
}

std::vector<double> ParamTable::snapshot() {
  for (size_t i = 0; i < theta_.size(); ++i) sync(i);
  return theta_;
}

void ParamTable::assign(size_t i, double value) {
  sync(i);
  theta_[i] = value;
}

void ParamTable::step(std::span<const size_t> index, std::span<const double> grad) {
  if (index.size() != grad.size()) throw UsageError("index/gradient size mismatch");
  if (settings_.kind == OptimizerKind::kSgd) {
    ++t_;
    for (size_t j = 0; j < index.size(); ++j) theta_[index[j]] -= settings_.lr * grad[j];
    return;
  }
  // Bring touched entries to step t_, then take step t_ + 1 with a gradient.
  for (size_t i : index) sync(i);
  ++t_;
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double step_size = settings_.lr / bias1(t_);
  const double root_bc2 = std::sqrt(bias2(t_));
  for (size_t j = 0; j < index.size(); ++j) {
    const size_t i = index[j];
    double m = m_[i];
    double v = v_[i];
    const int64_t settle = last_grad_[i] + kSettleSteps;
    if (last_grad_[i] > 0 && t_ - 1 > settle) {
      const auto idle = static_cast<double>(t_ - 1 - settle);
      m *= std::pow(b1, idle);
      v *= std::pow(b2, idle);
    }
    const double g = grad[j];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    theta_[i] -= step_size * (m / (std::sqrt(v) / root_bc2 + settings_.eps));
    m_[i] = m;
    v_[i] = v;
    synced_[i] = t_;
    last_grad_[i] = t_;
  }
}

void ParamTable::step_dense(std::span<const double> grad) {
  if (grad.size() != theta_.size()) throw UsageError("gradient size mismatch");
  std::vector<size_t> index;
  std::vector<double> values;
  for (size_t i = 0; i < grad.size(); ++i) {
    if (grad[i] != 0.0) {
      index.push_back(i);
      values.push_back(grad[i]);
    }
  }
  step(index, values);
}

}  // namespace icu_sepsis
