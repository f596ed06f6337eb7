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


#include "icu_sepsis/solvers.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "icu_sepsis/errors.h"

namespace icu_sepsis {
namespace {

// Nonzeros of every (s, a) row, in row order.
struct SparseRows {
  std::vector<size_t> start;
  std::vector<int> col;
  std::vector<double> val;

  explicit SparseRows(const TabularMdp& m) {
    const size_t rows = static_cast<size_t>(m.n_states) * m.n_actions;
    start.reserve(rows + 1);
    start.push_back(0);
    for (size_t r = 0; r < rows; ++r) {
      const double* p = m.transitions.data() + r * m.n_states;
      for (int j = 0; j < m.n_states; ++j) {
        if (p[j] != 0.0) {
          col.push_back(j);
          val.push_back(p[j]);
        }
      }
      start.push_back(col.size());
    }
  }

  double dot(size_t r, const std::vector<double>& w) const {
    double acc = 0.0;
    for (size_t k = start[r]; k < start[r + 1]; ++k) acc += val[k] * w[static_cast<size_t>(col[k])];
    return acc;
  }
};

void check_shapes(const TabularMdp& mdp, const Policy& pi) {
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    throw UsageError("policy shape does not match the MDP");
  }
}

// w(s') = r(s') + gamma v(s')
std::vector<double> backup_target(const TabularMdp& mdp, const std::vector<double>& v) {
  std::vector<double> w(v.size());
  for (size_t j = 0; j < v.size(); ++j) w[j] = mdp.reward_by_state[j] + mdp.gamma * v[j];
  return w;
}

// Best action at s; candidates scanned in ascending id, strict improvement
// needed to move, admissible actions first when all actions compete.
template <typename QFn>
std::pair<ActionId, double> argmax(const TabularMdp& mdp, StateId s,
                                   bool admissible_only, QFn&& q) {
  ActionId best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (ActionId a : mdp.admissible[static_cast<size_t>(s)]) {
    const double x = q(a);
    if (x > best_q) {
      best_q = x;
      best = a;
    }
  }
  if (!admissible_only || best < 0) {
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      if (mdp.is_admissible(s, a)) continue;
      const double x = q(a);
      if (x > best_q) {
        best_q = x;
        best = a;
      }
    }
  }
  return {best, best_q};
}

DenseMatrix policy_matrix(const TabularMdp& mdp, const Policy& pi) {
  DenseMatrix P(mdp.n_states, mdp.n_states);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    auto out = P.row(s);
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      const double w = pi(s, a);
      if (w == 0.0) continue;
      const auto row = mdp.row(s, a);
      for (size_t j = 0; j < row.size(); ++j) out[j] += w * row[j];
    }
  }
  return P;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  long double acc = 0.0L;
  for (size_t i = 0; i < x.size(); ++i) acc += static_cast<long double>(x[i]) * y[i];
  return static_cast<double>(acc);
}

// Solves (I - g P_LL) x = b over live states; returns x on the full index.
std::vector<double> solve_live(const TabularMdp& mdp, const DenseMatrix& P,
                               double g, const std::vector<double>& b_full,
                               double residual_tol, double* residual_out) {
  const std::vector<StateId> live = mdp.live_states();
  const auto n = static_cast<Eigen::Index>(live.size());
  std::vector<double> x(static_cast<size_t>(mdp.n_states), 0.0);
  if (n == 0) {
    if (residual_out) *residual_out = 0.0;
    return x;
  }
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const StateId s = live[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = (i == j ? 1.0 : 0.0) - g * P(s, live[static_cast<size_t>(j)]);
    }
    b(i) = b_full[static_cast<size_t>(s)];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    throw SingularSystemError(
        "evaluation system is singular (rcond " + std::to_string(rcond) +
        "): the policy may never terminate from some state; try gamma < 1 or "
        "the iterative evaluator to diagnose");
  }
  const Eigen::VectorXd sol = lu.solve(b);
  const double residual = (A * sol - b).cwiseAbs().maxCoeff();
  if (!(residual < residual_tol)) {
    throw SingularSystemError("evaluation residual " + std::to_string(residual) +
                              " exceeds tolerance; system is ill-conditioned");
  }
  for (Eigen::Index i = 0; i < n; ++i) x[static_cast<size_t>(live[static_cast<size_t>(i)])] = sol(i);
  if (residual_out) *residual_out = residual;
  return x;
}

}  // namespace

ValueIterationResult value_iteration(const TabularMdp& mdp,
                                     const ValueIterationOptions& options) {
  const SparseRows rows(mdp);
  const auto ns = static_cast<size_t>(mdp.n_states);
  std::vector<double> v(ns, 0.0);
  std::vector<double> next(ns, 0.0);
  ValueIterationResult out;
  const auto live = mdp.live_states();
  for (int it = 1; it <= options.max_iter; ++it) {
    const std::vector<double> w = backup_target(mdp, v);
    double delta = 0.0;
    for (StateId s : live) {
      const size_t base = static_cast<size_t>(s) * mdp.n_actions;
      const double q = argmax(mdp, s, options.admissible_only, [&](ActionId a) {
                         return rows.dot(base + a, w);
                       }).second;
      delta = std::max(delta, std::abs(q - v[static_cast<size_t>(s)]));
      next[static_cast<size_t>(s)] = q;
    }
    v.swap(next);
    out.iterations = it;
    out.residual = delta;
    if (delta < options.tol) break;
    if (it == options.max_iter) {
      throw ConvergenceError("value iteration did not converge in " +
                                 std::to_string(options.max_iter) +
                                 " sweeps (residual " + std::to_string(delta) + ")",
                             delta);
    }
  }
  out.v = std::move(v);
  out.greedy = greedy_actions(mdp, out.v, options.admissible_only);
  out.policy = Policy::deterministic(mdp.n_actions, out.greedy);
  out.J = dot(mdp.initial_dist, out.v);
  return out;
}

std::vector<ActionId> greedy_actions(const TabularMdp& mdp,
                                     const std::vector<double>& v,
                                     bool admissible_only) {
  const std::vector<double> w = backup_target(mdp, v);
  std::vector<ActionId> greedy(static_cast<size_t>(mdp.n_states), 0);
  for (StateId s : mdp.live_states()) {
    greedy[static_cast<size_t>(s)] =
        argmax(mdp, s, admissible_only, [&](ActionId a) {
          const auto row = mdp.row(s, a);
          double acc = 0.0;
          for (size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0) acc += row[j] * w[j];
          }
          return acc;
        }).first;
  }
  return greedy;
}

DenseMatrix action_values(const TabularMdp& mdp, const std::vector<double>& v) {
  const std::vector<double> w = backup_target(mdp, v);
  DenseMatrix q(mdp.n_states, mdp.n_actions);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    for (ActionId a = 0; a < mdp.n_actions; ++a) {
      const auto row = mdp.row(s, a);
      double acc = 0.0;
      for (size_t j = 0; j < row.size(); ++j) {
        if (row[j] != 0.0) acc += row[j] * w[j];
      }
      q(s, a) = acc;
    }
  }
  return q;
}

PolicyValue policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi_in,
                                    const EvaluationOptions& options) {
  check_shapes(mdp, pi_in);
  const Policy pi = options.project ? project_policy(mdp, pi_in) : pi_in;
  const DenseMatrix P = policy_matrix(mdp, pi);
  std::vector<double> r_pi(static_cast<size_t>(mdp.n_states), 0.0);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    const auto row = P.row(s);
    for (size_t j = 0; j < row.size(); ++j) r_pi[static_cast<size_t>(s)] += row[j] * mdp.reward_by_state[j];
  }
  PolicyValue out;
  out.v = solve_live(mdp, P, mdp.gamma, r_pi, options.residual_tol, &out.residual);
  out.J = dot(mdp.initial_dist, out.v);
  return out;
}

PolicyValue policy_evaluation_iterative(const TabularMdp& mdp, const Policy& pi_in,
                                        double tol, int max_iter) {
  check_shapes(mdp, pi_in);
  const Policy pi = project_policy(mdp, pi_in);
  const DenseMatrix P = policy_matrix(mdp, pi);
  const auto live = mdp.live_states();
  std::vector<double> v(static_cast<size_t>(mdp.n_states), 0.0);
  std::vector<double> next = v;
  PolicyValue out;
  for (int it = 1;; ++it) {
    const std::vector<double> w = backup_target(mdp, v);
    double delta = 0.0;
    for (StateId s : live) {
      const auto row = P.row(s);
      double acc = 0.0;
      for (size_t j = 0; j < row.size(); ++j) acc += row[j] * w[j];
      delta = std::max(delta, std::abs(acc - v[static_cast<size_t>(s)]));
      next[static_cast<size_t>(s)] = acc;
    }
    v.swap(next);
    out.residual = delta;
    if (delta < tol) break;
    if (it >= max_iter) {
      throw ConvergenceError("iterative evaluation did not converge", delta);
    }
  }
  out.v = std::move(v);
  out.J = dot(mdp.initial_dist, out.v);
  return out;
}

double expected_episode_length(const TabularMdp& mdp, const Policy& pi_in,
                               const EvaluationOptions& options) {
  check_shapes(mdp, pi_in);
  const Policy pi = options.project ? project_policy(mdp, pi_in) : pi_in;
  const DenseMatrix P = policy_matrix(mdp, pi);
  std::vector<double> ones(static_cast<size_t>(mdp.n_states), 1.0);
  const std::vector<double> len =
      solve_live(mdp, P, 1.0, ones, options.residual_tol * 1e3, nullptr);
  return dot(mdp.initial_dist, len);
}

BruteForceResult brute_force_optimal(const TabularMdp& mdp, int horizon,
                                     int64_t max_policies) {
  if (horizon < 1) throw UsageError("horizon must be at least 1");
  const std::vector<StateId> live = mdp.live_states();
  int64_t total = 1;
  for (StateId s : live) {
    const auto k = static_cast<int64_t>(mdp.admissible[static_cast<size_t>(s)].size());
    if (k == 0) throw DataError("state " + std::to_string(s) + " has no admissible action");
    if (total > max_policies / k) {
      throw UsageError("instance too large for enumeration (> " +
                       std::to_string(max_policies) + " policies)");
    }
    total *= k;
  }
  const auto ns = static_cast<size_t>(mdp.n_states);
  std::vector<size_t> digit(live.size(), 0);
  std::vector<ActionId> act(ns, 0);
  BruteForceResult out;
  out.J = -std::numeric_limits<double>::infinity();
  std::vector<double> v(ns), nv(ns), live_mass(ns), nm(ns);
  for (int64_t k = 0; k < total; ++k) {
    for (size_t i = 0; i < live.size(); ++i) {
      act[static_cast<size_t>(live[i])] =
          mdp.admissible[static_cast<size_t>(live[i])][digit[i]];
    }
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(live_mass.begin(), live_mass.end(), 0.0);
    for (StateId s : live) live_mass[static_cast<size_t>(s)] = 1.0;
    for (int h = 0; h < horizon; ++h) {
      nv = v;
      nm = live_mass;
      for (StateId s : live) {
        const auto row = mdp.row(s, act[static_cast<size_t>(s)]);
        double acc = 0.0;
        double mass = 0.0;
        for (size_t j = 0; j < ns; ++j) {
          if (row[j] == 0.0) continue;
          acc += row[j] * (mdp.reward_by_state[j] + mdp.gamma * v[j]);
          mass += row[j] * live_mass[j];
        }
        nv[static_cast<size_t>(s)] = acc;
        nm[static_cast<size_t>(s)] = mass;
      }
      v.swap(nv);
      live_mass.swap(nm);
    }
    const double j = dot(mdp.initial_dist, v);
    const double tail = dot(mdp.initial_dist, live_mass);
    out.max_tail_mass = std::max(out.max_tail_mass, tail);
    if (j > out.J) {
      out.J = j;
      out.best = act;
    }
    // Odometer over admissible choices.
    for (size_t i = 0; i < live.size(); ++i) {
      if (++digit[i] < mdp.admissible[static_cast<size_t>(live[i])].size()) break;
      digit[i] = 0;
    }
  }
  out.policies = total;
  return out;
}

}  // namespace icu_sepsis
