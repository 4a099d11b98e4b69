#pragma once

// Seeded multi-trial experiment runner.
//
// Seeding scheme (fixed; part of the output contract):
//   trial seed   = derive_seed(master_seed, {trial_index})
//   testbed draw = Rng(derive_seed(trial seed, {kTestbedStream}))
//   agent draws  = Rng(derive_seed(trial seed, {kAgentStream}))
//   reward       = derive_seed(trial seed, {kRewardStream, episode, arm})
// The agent stream does not depend on which agent runs, and rewards depend
// only on (trial, episode, arm), so agents in one experiment are paired.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "slb/agents.hpp"
#include "slb/bandit_env.hpp"
#include "slb/random.hpp"

namespace slb {

struct StandardTestbedEnv {
  std::size_t k = 10;
};
struct ScenarioEnv {
  int id = 1;
};
using EnvironmentSpec = std::variant<StandardTestbedEnv, ScenarioEnv>;

struct ExperimentConfig {
  std::uint64_t episodes = 1000;
  std::uint64_t trials = 500;
  EnvironmentSpec environment = StandardTestbedEnv{};
  std::vector<AgentSpec> agents;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (agents.empty()) throw std::invalid_argument("agent list must be non-empty");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        if (agents[i].name == agents[j].name) {
          throw std::invalid_argument("duplicate agent name: " + agents[i].name);
        }
      }
    }
    if (const auto* tb = std::get_if<StandardTestbedEnv>(&environment); tb && tb->k < 2) {
      throw std::invalid_argument("testbed k must be >= 2");
    }
    if (const auto* sc = std::get_if<ScenarioEnv>(&environment); sc && (sc->id < 1 || sc->id > 4)) {
      throw std::invalid_argument("scenario id must be in 1..4");
    }
    // Agent constructors check their own hyper-parameters.
    for (const AgentSpec& spec : agents) {
      try {
        Agent probe(arm_count(), spec);
      } catch (const std::exception& e) {
        throw std::invalid_argument("agent " + spec.name + ": " + e.what());
      }
    }
  }

  std::size_t arm_count() const {
    if (const auto* tb = std::get_if<StandardTestbedEnv>(&environment)) return tb->k;
    return scenario(std::get<ScenarioEnv>(environment).id).size();
  }
};

/// One episode of one trial. `episode` is 0-based.
struct EpisodeMetrics {
  std::uint64_t episode = 0;
  std::size_t action = 0;
  bool optimal_taken = false;
  double reward = 0.0;
  std::optional<double> epistemic_u;
  std::optional<double> entropy_bits;
};

/// Per-episode means over trials. SLB-only vectors are empty for baselines.
struct AggregateCurve {
  std::vector<double> pct_optimal;
  std::vector<double> mean_reward;
  std::vector<double> mean_epistemic_u;
  std::vector<double> mean_entropy_bits;
  std::uint64_t trials = 0;

  std::size_t episodes() const { return pct_optimal.size(); }
  bool has_uncertainty() const { return !mean_epistemic_u.empty(); }

  /// Mean of pct_optimal over the 1-based inclusive episode range [first, last].
  double mean_pct_optimal(std::size_t first, std::size_t last) const {
    if (first < 1 || last > episodes() || first > last) {
      throw std::out_of_range("episode range outside the curve");
    }
    double s = 0.0;
    for (std::size_t t = first; t <= last; ++t) s += pct_optimal[t - 1];
    return s / static_cast<double>(last - first + 1);
  }
};

struct NamedCurve {
  std::string agent;
  AggregateCurve curve;
};

/// Curves in agent-config order.
using ExperimentResult = std::vector<NamedCurve>;

inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return derive_seed(master_seed, {trial_index});
}

inline BanditProblem make_problem(const EnvironmentSpec& env, std::uint64_t trial_seed_value) {
  if (const auto* tb = std::get_if<StandardTestbedEnv>(&env)) {
    return standard_testbed(tb->k, derive_seed(trial_seed_value, {kTestbedStream}));
  }
  return scenario(std::get<ScenarioEnv>(env).id);
}

/// Runs one agent for the full horizon on an already-constructed problem.
inline std::vector<EpisodeMetrics> run_agent(const BanditProblem& problem, const AgentSpec& spec,
                                             std::uint64_t episodes, std::uint64_t trial_seed_value) {
  Agent agent(problem.size(), spec);
  Rng agent_rng(derive_seed(trial_seed_value, {kAgentStream}));
  PairedRewards rewards(problem, trial_seed_value);
  std::vector<EpisodeMetrics> out;
  out.reserve(episodes);
  for (std::uint64_t t = 0; t < episodes; ++t) {
    const std::size_t action = agent.select_action(agent_rng);
    const RewardSample sample = rewards.pull(action, t);
    agent.observe(action, sample.reward);
    EpisodeMetrics m{t, action, action == problem.optimal_arm(), sample.reward, {}, {}};
    if (const SlbAgent* s = agent.slb()) {
      m.epistemic_u = s->epistemic_uncertainty();
      m.entropy_bits = s->total_uncertainty_bits();
    }
    out.push_back(m);
  }
  return out;
}

/// Deterministic in (master_seed, trial_index, agent spec).
inline std::vector<EpisodeMetrics> run_trial(const ExperimentConfig& config, const AgentSpec& spec,
                                             std::uint64_t trial_index) {
  const std::uint64_t seed = trial_seed(config.master_seed, trial_index);
  return run_agent(make_problem(config.environment, seed), spec, config.episodes, seed);
}

/// Called once per (trial, agent) in trial-index order with the raw metrics.
using RawTrialSink = std::function<void(std::uint64_t trial, std::size_t agent_index, const BanditProblem&,
                                        std::span<const EpisodeMetrics>)>;

struct RunOptions {
  unsigned jobs = 1;
  /// Trials computed concurrently before folding into the running sums.
  std::size_t block_size = 64;
  /// Optional scheduling permutation of trial indices; results must not depend on it.
  std::vector<std::uint64_t> execution_order;
  RawTrialSink raw_sink;
};

namespace detail {

struct TrialOutput {
  std::optional<BanditProblem> problem;
  std::vector<std::vector<EpisodeMetrics>> per_agent;
};

inline void run_indices(const ExperimentConfig& config, std::span<const std::uint64_t> indices,
                        std::uint64_t block_start, std::vector<TrialOutput>& slots, unsigned jobs) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
      for (std::size_t i = next.fetch_add(1); i < indices.size(); i = next.fetch_add(1)) {
        const std::uint64_t trial = indices[i];
        const std::uint64_t seed = trial_seed(config.master_seed, trial);
        TrialOutput& slot = slots[trial - block_start];
        slot.problem = make_problem(config.environment, seed);
        slot.per_agent.clear();
        for (const AgentSpec& spec : config.agents) {
          slot.per_agent.push_back(run_agent(*slot.problem, spec, config.episodes, seed));
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(indices.size());
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(indices.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned j = 0; j < n; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Averages every agent's metrics over trials, pointwise in the episode.
///
/// Trials run in blocks; within a block any number run concurrently, and each
/// block is folded into the sums in trial-index order, so results do not
/// depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  config.validate();
  const std::size_t n_agents = config.agents.size();
  const std::size_t horizon = config.episodes;

  std::vector<std::uint64_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(config.trials);
    for (std::uint64_t i = 0; i < config.trials; ++i) order[i] = i;
  } else {
    std::vector<std::uint64_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != config.trials || sorted[i] != i) {
        throw std::invalid_argument("execution_order must be a permutation of the trial indices");
      }
    }
  }

  ExperimentResult result(n_agents);
  for (std::size_t a = 0; a < n_agents; ++a) {
    result[a].agent = config.agents[a].name;
    AggregateCurve& c = result[a].curve;
    c.trials = config.trials;
    c.pct_optimal.assign(horizon, 0.0);
    c.mean_reward.assign(horizon, 0.0);
    if (config.agents[a].is_slb()) {
      c.mean_epistemic_u.assign(horizon, 0.0);
      c.mean_entropy_bits.assign(horizon, 0.0);
    }
  }

  const std::size_t block = std::max<std::size_t>(1, options.block_size);
  std::vector<detail::TrialOutput> slots(block);
  for (std::uint64_t start = 0; start < config.trials; start += block) {
    const std::uint64_t stop = std::min<std::uint64_t>(config.trials, start + block);
    std::vector<std::uint64_t> indices;
    for (std::uint64_t idx : order) {
      if (idx >= start && idx < stop) indices.push_back(idx);
    }
    detail::run_indices(config, indices, start, slots, options.jobs);

    for (std::uint64_t trial = start; trial < stop; ++trial) {
      const detail::TrialOutput& slot = slots[trial - start];
      for (std::size_t a = 0; a < n_agents; ++a) {
        const auto& metrics = slot.per_agent[a];
        AggregateCurve& c = result[a].curve;
        for (std::size_t t = 0; t < horizon; ++t) {
          const EpisodeMetrics& m = metrics[t];
          c.pct_optimal[t] += m.optimal_taken ? 1.0 : 0.0;
          c.mean_reward[t] += m.reward;
          if (c.has_uncertainty()) {
            c.mean_epistemic_u[t] += *m.epistemic_u;
            c.mean_entropy_bits[t] += *m.entropy_bits;
          }
        }
        if (options.raw_sink) options.raw_sink(trial, a, *slot.problem, metrics);
      }
    }
  }

  const double n = static_cast<double>(config.trials);
  for (NamedCurve& nc : result) {
    for (auto* v : {&nc.curve.pct_optimal, &nc.curve.mean_reward, &nc.curve.mean_epistemic_u,
                    &nc.curve.mean_entropy_bits}) {
      for (double& x : *v) x /= n;
    }
  }
  return result;
}

inline const AggregateCurve& find_curve(const ExperimentResult& result, const std::string& agent) {
  for (const NamedCurve& nc : result) {
    if (nc.agent == agent) return nc.curve;
  }
  throw std::out_of_range("no curve for agent " + agent);
}

/// Sets hyper-parameter `param` on an agent spec. Returns false when the agent
/// has no such parameter. "eta", "zeta" and "step" all address the single SLB
/// step parameter.
inline bool apply_parameter(AgentSpec& spec, const std::string& param, double value) {
  if (auto* s = std::get_if<SlbConfig>(&spec.kind)) {
    if (param == "eta" || param == "zeta" || param == "step") {
      s->step = value;
      return true;
    }
    return false;
  }
  auto& v = std::get<BaselineVariant>(spec.kind);
  if (auto* e = std::get_if<EpsilonGreedy>(&v); e && param == "epsilon") {
    e->epsilon = value;
    return true;
  }
  if (auto* u = std::get_if<Ucb>(&v); u && param == "c") {
    u->c = value;
    return true;
  }
  if (auto* g = std::get_if<Gradient>(&v); g && param == "alpha") {
    g->alpha = value;
    return true;
  }
  return false;
}

struct SweepPoint {
  double value = 0.0;
  ExperimentConfig config;
  ExperimentResult result;
};

/// One run_experiment per value with the master seed shared across values, so
/// comparisons between values are paired.
inline std::vector<SweepPoint> hyperparameter_sweep(const ExperimentConfig& base, const std::string& param,
                                                    std::span<const double> values,
                                                    const RunOptions& options = {}) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    ExperimentConfig cfg = base;
    bool applied = false;
    for (AgentSpec& spec : cfg.agents) applied = apply_parameter(spec, param, v) || applied;
    if (!applied) throw std::invalid_argument("no agent has parameter '" + param + "'");
    out.push_back(SweepPoint{v, cfg, run_experiment(cfg, options)});
  }
  return out;
}

}  // namespace slb
