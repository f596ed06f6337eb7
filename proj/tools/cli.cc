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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "icu_sepsis/agent_config.h"
#include "icu_sepsis/builder.h"
#include "icu_sepsis/errors.h"
#include "icu_sepsis/harness.h"
#include "icu_sepsis/io.h"
#include "icu_sepsis/solvers.h"
#include "icu_sepsis/validation.h"

namespace icu_sepsis::cli {
namespace {

std::string fixed(double x, int digits = 6) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// "# key=value" lines written ahead of every output table.
class Provenance {
 public:
  explicit Provenance(const std::string& command) { add("command", command); }

  template <class T>
  Provenance& add(const std::string& key, const T& value) {
    std::ostringstream s;
    s << value;
    entries_.emplace_back(key, s.str());
    return *this;
  }
  Provenance& add(const std::string& key, double value) {
    entries_.emplace_back(key, format_double(value));
    return *this;
  }
  Provenance& add_config(const AgentConfig& cfg) {
    for (const auto& [k, v] : cfg.to_map()) entries_.emplace_back("config." + k, v);
    return *this;
  }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += "# " + k + "=" + v + "\n";
    return out;
  }

  // Prepends the header to a file already written.
  void stamp(const fs::path& path) const {
    write_text_file(path, text() + read_text_file(path));
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const std::string& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : ",") + format_double(x);
  return out;
}

TabularMdp load_bundle(const std::string& dir, bool renormalize = false) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  LoadOptions opts;
  opts.renormalize = renormalize;
  return load_mdp(MdpFileBundle::in_directory(dir), opts);
}

// random | expert | optimal | path to an n_states x n_actions CSV.
Policy resolve_policy(const std::string& name, const TabularMdp& mdp,
                      const std::string& bundle_dir) {
  if (name == "random") return Policy::uniform(mdp.n_states, mdp.n_actions);
  if (name == "optimal") return value_iteration(mdp).policy;
  if (name == "expert") {
    auto pi = load_expert_policy(MdpFileBundle::in_directory(bundle_dir), &mdp);
    if (!pi) throw DataError("bundle " + bundle_dir + " has no expert_policy table");
    return *pi;
  }
  if (!fs::exists(name)) {
    throw UsageError("policy '" + name +
                     "' is neither random, expert, optimal nor an existing file");
  }
  Policy pi = Policy::from_matrix(read_csv_table(name));
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    throw DataError("policy file " + name + " is " + std::to_string(pi.n_states()) +
                    "x" + std::to_string(pi.n_actions()) + ", model is " +
                    std::to_string(mdp.n_states) + "x" + std::to_string(mdp.n_actions));
  }
  pi.check(1e-6);
  return pi;
}

AgentConfig make_config(const std::string& agent, const std::string& config_file,
                        const std::vector<std::string>& overrides) {
  AgentConfig cfg = config_file.empty()
                        ? AgentConfig::defaults(parse_algorithm(agent))
                        : AgentConfig::from_text(read_text_file(config_file));
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.check();
  return cfg;
}

std::vector<int> admissible_histogram(const TabularMdp& mdp) {
  std::vector<int> hist(static_cast<size_t>(mdp.n_actions) + 1, 0);
  for (StateId s : mdp.live_states()) ++hist[mdp.admissible[static_cast<size_t>(s)].size()];
  return hist;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string bundle;
  bool renormalize = false;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle, a.renormalize);
  const ValidationReport report = validate_mdp(mdp);
  out << mdp.n_states << " states, " << mdp.n_actions << " actions\n";
  out << "terminal states: survival=" << mdp.survival_state
      << " death=" << mdp.death_state << " absorbing=" << mdp.absorbing_state << "\n";
  out << "admissible sets: " << mdp.provenance.admissible_source << "\n";
  if (report.ok()) {
    out << "no violations\n";
    return kOk;
  }
  out << report.to_text();
  return kValidation;
}

struct BuildArgs {
  std::string dataset;
  std::string out_dir;
  int64_t tau = 20;
  int n_actions = 25;
  int n_states = 0;
  bool compress = false;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  BuildConfig cfg = BuildConfig::flat(a.n_actions, a.tau);
  cfg.n_states_cluster = a.n_states;
  if (a.n_actions == 25) {
    cfg.d_A = 2;
    cfg.n_A = 5;
  }
  cfg.check();
  const TrajectoryDataset data = load_dataset(a.dataset);
  const BuildResult built = build_mdp(data, cfg);
  save_mdp(built.mdp, MdpFileBundle::for_writing(a.out_dir, a.compress), &built.expert);

  Provenance prov("build");
  prov.add("dataset", a.dataset).add("tau", a.tau).add("n_actions", a.n_actions)
      .add("n_states", a.n_states);
  write_text_file(fs::path(a.out_dir) / "build_report.txt",
                  prov.text() + built.report.to_text());
  const fs::path counts = fs::path(a.out_dir) / "admissible_counts.csv";
  write_text_file(counts, admissible_size_table(built.mdp));
  prov.stamp(counts);

  out << built.report.to_text();
  out << "wrote " << built.mdp.n_states << "-state bundle to " << a.out_dir << "\n";
  return kOk;
}

struct SolveArgs {
  std::string bundle;
  std::string policy_out;
  std::string values_out;
  double tol = 1e-10;
  int max_iter = 100000;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  ValueIterationOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  const ValueIterationResult vi = value_iteration(mdp, opts);
  const double length = expected_episode_length(mdp, vi.policy);

  Provenance prov("solve");
  prov.add("bundle", a.bundle).add("tol", a.tol).add("max_iter", a.max_iter)
      .add("J", vi.J).add("iterations", vi.iterations);
  out << "J* = " << fixed(vi.J) << "\n";
  out << "expected_length = " << fixed(length, 4) << "\n";
  out << "iterations = " << vi.iterations << ", residual = " << vi.residual << "\n";
  if (!a.policy_out.empty()) {
    write_csv_table(a.policy_out, vi.policy.matrix());
    prov.stamp(a.policy_out);
    out << "wrote policy to " << a.policy_out << "\n";
  }
  if (!a.values_out.empty()) {
    std::string text = "state,value,greedy_action\n";
    for (int s = 0; s < mdp.n_states; ++s) {
      text += std::to_string(s) + ',' + format_double(vi.v[static_cast<size_t>(s)]) + ',' +
              std::to_string(vi.greedy[static_cast<size_t>(s)]) + '\n';
    }
    write_text_file(a.values_out, prov.text() + text);
  }
  return kOk;
}

struct EvaluateArgs {
  std::string bundle;
  std::string policy = "random";
  bool iterative = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  const Policy pi = resolve_policy(a.policy, mdp, a.bundle);
  const double J = a.iterative ? policy_evaluation_iterative(mdp, project_policy(mdp, pi)).J
                               : policy_evaluation_exact(mdp, pi).J;
  const double length = expected_episode_length(mdp, pi);
  out << "policy = " << a.policy << "\n";
  out << "J = " << fixed(J) << "\n";
  out << "expected_length = " << fixed(length, 4) << "\n";
  return kOk;
}

struct TrainArgs {
  std::string bundle;
  std::string agent = "qlearning";
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
  int episodes = 1000;
  int seeds = 1;
  uint64_t seed = 0;
  int workers = 0;
  int max_steps = kDefaultMaxSteps;
  int smoothing = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  const AgentConfig cfg = make_config(a.agent, a.config_file, a.overrides);
  const Simulator sim(mdp);
  std::vector<uint64_t> seeds;
  for (int i = 0; i < a.seeds; ++i) seeds.push_back(a.seed + static_cast<uint64_t>(i));
  const std::vector<LearningCurve> curves =
      train_seeds(sim, cfg, a.episodes, seeds, a.workers, a.max_steps);

  const std::string name = to_string(cfg.algorithm);
  const ConvergenceRow row = convergence_row(name, curves);
  for (const LearningCurve& c : curves) {
    const ConvergenceResult conv = detect_convergence(c);
    int64_t cut = 0;
    for (uint8_t t : c.truncated) cut += t;
    out << "seed " << c.seed << ": final-10% return " << fixed(final_fraction_mean(c, 0.1), 4)
        << ", converged at "
        << (conv.episode ? std::to_string(*conv.episode) : std::string("never"));
    if (cut > 0) out << ", truncated episodes " << cut;
    out << "\n";
  }
  out << name << ": converged " << row.converged_runs << "/" << row.total_runs;
  if (row.converged_runs > 0) {
    out << ", episodes " << fixed(row.episodes_k, 2) << "K, steps " << fixed(row.steps_m, 3)
        << "M, average return " << fixed(row.average_return, 4);
  }
  out << "\n";

  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    Provenance prov("train");
    prov.add("bundle", a.bundle).add("episodes", a.episodes).add("seeds", a.seeds)
        .add("seed", a.seed).add("max_steps", a.max_steps)
        .add("smoothing", a.smoothing).add_config(cfg);
    write_curves_csv(curves, dir / "curves.csv");
    prov.stamp(dir / "curves.csv");
    write_summary_csv(aggregate(curves, a.smoothing), dir / "summary.csv");
    prov.stamp(dir / "summary.csv");
    write_convergence_csv({row}, dir / "convergence.csv");
    prov.stamp(dir / "convergence.csv");
    write_text_file(dir / "config.txt", cfg.to_text());
    out << "wrote curves, summary and convergence table to " << a.out_dir << "\n";
  }
  return kOk;
}

struct PerturbArgs {
  std::string bundle;
  std::vector<double> sigmas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> policies{"random", "expert", "optimal"};
  std::string out_dir;
  int reps = 32;
  uint64_t seed = 0;
  int workers = 0;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  std::vector<NamedPolicy> named;
  for (const std::string& p : a.policies) named.push_back({p, resolve_policy(p, mdp, a.bundle)});
  const std::vector<PerturbRecord> records =
      run_perturbation(mdp, named, a.sigmas, a.reps, a.seed, a.workers);
  const std::vector<PerturbSummary> summary = summarize_perturbation(records);

  out << "sigma   policy      return (stderr)        length (stderr)\n";
  for (const PerturbSummary& s : summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-7s %-10s  %.4f (%.4f)  %9s (%s)\n",
                  format_double(s.sigma).c_str(), s.policy.c_str(), s.mean_return,
                  s.stderr_return, fixed(s.mean_length, 3).c_str(),
                  fixed(s.stderr_length, 3).c_str());
    out << line;
  }
  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    Provenance prov("perturb");
    prov.add("bundle", a.bundle).add("sigmas", join(a.sigmas))
        .add("policies", join(a.policies)).add("reps", a.reps).add("seed", a.seed);
    write_perturbation_csv(records, dir / "perturbation.csv");
    prov.stamp(dir / "perturbation.csv");
    write_perturbation_summary_csv(summary, dir / "perturbation_summary.csv");
    prov.stamp(dir / "perturbation_summary.csv");
    out << "wrote perturbation tables to " << a.out_dir << "\n";
  }
  return kOk;
}

struct SearchArgs {
  std::string bundle;
  std::string space_file;
  std::string agent = "qlearning";
  std::vector<std::string> overrides;
  std::string out;
  SearchOptions options;
};

int cmd_search(const SearchArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  const AgentConfig base = make_config(a.agent, "", a.overrides);
  const SearchSpace space = parse_search_space(read_text_file(a.space_file));
  const Simulator sim(mdp);
  const std::vector<SearchResult> results = random_search(sim, base, space, a.options);
  const size_t shown = std::min<size_t>(results.size(), 10);
  for (size_t i = 0; i < shown; ++i) {
    const SearchResult& r = results[i];
    out << "#" << i + 1 << " score " << fixed(r.score, 4) << " (config " << r.index << "):";
    for (const auto& [k, v] : r.sampled) out << " " << k << "=" << v;
    out << "\n";
  }
  if (!a.out.empty()) {
    write_search_csv(results, a.out);
    Provenance prov("search");
    prov.add("bundle", a.bundle).add("space", a.space_file).add("budget", a.options.budget)
        .add("seeds_per_config", a.options.seeds_per_config)
        .add("episodes", a.options.episodes).add("seed", a.options.master_seed)
        .add("max_steps", a.options.max_steps).add_config(base);
    prov.stamp(a.out);
    out << "wrote " << results.size() << " ranked configs to " << a.out << "\n";
  }
  return kOk;
}

struct SynthArgs {
  std::string bundle;
  std::string policy = "expert";
  std::string out;
  int episodes = 1000;
  uint64_t seed = 0;
  int max_steps = kDefaultMaxSteps;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  const Policy pi = resolve_policy(a.policy, mdp, a.bundle);
  int truncated = 0;
  const TrajectoryDataset data =
      synthesize_dataset(mdp, pi, a.episodes, a.seed, a.max_steps, &truncated);
  save_dataset(data, a.out);
  Provenance prov("synth");
  prov.add("bundle", a.bundle).add("policy", a.policy).add("episodes", a.episodes)
      .add("seed", a.seed).add("max_steps", a.max_steps).add("truncated", truncated);
  prov.stamp(a.out);
  out << "wrote " << data.episodes.size() << " episodes (" << data.total_steps()
      << " steps) to " << a.out << "\n";
  if (truncated > 0) out << "omitted " << truncated << " truncated episodes\n";
  return kOk;
}

struct ReportArgs {
  std::string bundle;
  std::string out;
  std::string per_state_out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const TabularMdp mdp = load_bundle(a.bundle);
  const std::vector<int> hist = admissible_histogram(mdp);
  std::string table = "admissible_actions,states\n";
  for (size_t k = 1; k < hist.size(); ++k) {
    table += std::to_string(k) + ',' + std::to_string(hist[k]) + '\n';
  }
  out << table;
  Provenance prov("report");
  prov.add("bundle", a.bundle).add("live_states", mdp.live_states().size());
  if (!a.out.empty()) write_text_file(a.out, prov.text() + table);
  if (!a.per_state_out.empty()) {
    write_text_file(a.per_state_out, prov.text() + admissible_size_table(mdp));
  }
  return kOk;
}

template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kValidation;
  } catch (const ConvergenceError& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const SingularSystemError& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ICU-Sepsis MDP engine"};
  app.name("icu-sepsis");
  app.require_subcommand(1, 1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a bundle's structural invariants");
  validate->add_option("bundle", va.bundle, "Bundle directory")->required();
  validate->add_flag("--renormalize", va.renormalize, "Renormalize rows on load");

  BuildArgs ba;
  auto* build = app.add_subcommand("build", "Estimate an MDP from a trajectory dataset");
  build->add_option("dataset", ba.dataset, "Dataset CSV")->required();
  build->add_option("--out", ba.out_dir, "Output bundle directory")->required();
  build->add_option("--tau", ba.tau, "Admissibility threshold")->capture_default_str();
  build->add_option("--n-actions", ba.n_actions, "Action-space size")->capture_default_str();
  build->add_option("--n-states", ba.n_states, "State-id space (0: infer)")
      ->capture_default_str();
  build->add_flag("--compress", ba.compress, "Write gzip-compressed tables");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Value iteration");
  solve->add_option("bundle", sa.bundle, "Bundle directory")->required();
  solve->add_option("--policy-out", sa.policy_out, "Write the optimal policy CSV");
  solve->add_option("--values-out", sa.values_out, "Write state values CSV");
  solve->add_option("--tol", sa.tol)->capture_default_str();
  solve->add_option("--max-iter", sa.max_iter)->capture_default_str();

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Exact return and episode length of a policy");
  evaluate->add_option("bundle", ea.bundle, "Bundle directory")->required();
  evaluate->add_option("--policy", ea.policy, "random | expert | optimal | CSV path")
      ->capture_default_str();
  evaluate->add_flag("--iterative", ea.iterative, "Use iterative evaluation");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train an agent over several seeds");
  train_cmd->add_option("bundle", ta.bundle, "Bundle directory")->required();
  train_cmd->add_option("--agent", ta.agent, "sarsa | qlearning | dqn | sac | ppo")
      ->capture_default_str();
  train_cmd->add_option("--config", ta.config_file, "key=value config file");
  train_cmd->add_option("--set", ta.overrides, "Override one hyperparameter (key=value)");
  train_cmd->add_option("--episodes", ta.episodes)->capture_default_str();
  train_cmd->add_option("--seeds", ta.seeds, "Number of seeds")->capture_default_str();
  train_cmd->add_option("--seed", ta.seed, "First seed")->capture_default_str();
  train_cmd->add_option("--workers", ta.workers, "Threads (0: all cores)")
      ->capture_default_str();
  train_cmd->add_option("--max-steps", ta.max_steps)->capture_default_str();
  train_cmd->add_option("--smoothing", ta.smoothing, "Moving-average window for summary.csv")
      ->capture_default_str();
  train_cmd->add_option("--out", ta.out_dir, "Output directory");

  PerturbArgs pa;
  auto* perturb = app.add_subcommand("perturb", "Action-removal robustness sweep");
  perturb->add_option("bundle", pa.bundle, "Bundle directory")->required();
  perturb->add_option("--sigma", pa.sigmas, "Removal probabilities")
      ->delimiter(',')
      ->capture_default_str();
  perturb->add_option("--policies", pa.policies, "Policies to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  perturb->add_option("--reps", pa.reps)->capture_default_str();
  perturb->add_option("--seed", pa.seed)->capture_default_str();
  perturb->add_option("--workers", pa.workers)->capture_default_str();
  perturb->add_option("--out", pa.out_dir, "Output directory");

  SearchArgs ra;
  auto* search = app.add_subcommand("search", "Random hyperparameter search");
  search->add_option("bundle", ra.bundle, "Bundle directory")->required();
  search->add_option("--space", ra.space_file, "Search-space file")->required();
  search->add_option("--budget", ra.options.budget)->capture_default_str();
  search->add_option("--agent", ra.agent, "Base algorithm")->capture_default_str();
  search->add_option("--set", ra.overrides, "Override a base hyperparameter");
  search->add_option("--episodes", ra.options.episodes)->capture_default_str();
  search->add_option("--seeds-per-config", ra.options.seeds_per_config)
      ->capture_default_str();
  search->add_option("--seed", ra.options.master_seed)->capture_default_str();
  search->add_option("--workers", ra.options.workers)->capture_default_str();
  search->add_option("--max-steps", ra.options.max_steps)->capture_default_str();
  search->add_option("--out", ra.out, "Ranked results CSV");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Roll out a policy into a trajectory dataset");
  synth->add_option("bundle", ya.bundle, "Bundle directory")->required();
  synth->add_option("--policy", ya.policy)->capture_default_str();
  synth->add_option("--episodes", ya.episodes)->capture_default_str();
  synth->add_option("--seed", ya.seed)->capture_default_str();
  synth->add_option("--max-steps", ya.max_steps)->capture_default_str();
  synth->add_option("--out", ya.out, "Dataset CSV")->required();

  ReportArgs pr;
  auto* report = app.add_subcommand("report", "Admissible-action histogram");
  report->add_option("bundle", pr.bundle, "Bundle directory")->required();
  report->add_option("--out", pr.out, "Histogram CSV");
  report->add_option("--per-state-out", pr.per_state_out, "Per-state count CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  return guarded(
      [&]() -> int {
        if (validate->parsed()) return cmd_validate(va, out);
        if (build->parsed()) return cmd_build(ba, out);
        if (solve->parsed()) return cmd_solve(sa, out);
        if (evaluate->parsed()) return cmd_evaluate(ea, out);
        if (train_cmd->parsed()) return cmd_train(ta, out);
        if (perturb->parsed()) return cmd_perturb(pa, out);
        if (search->parsed()) return cmd_search(ra, out);
        if (synth->parsed()) return cmd_synth(ya, out);
        if (report->parsed()) return cmd_report(pr, out);
        return kUsage;
      },
      err);
}

}  // namespace icu_sepsis::cli
