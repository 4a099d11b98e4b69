#pragma once

// Bandit agents: the subjective-logic bandit (SLB) with its four update rules,
// and the classical baselines (epsilon-greedy, epsilon-decay, UCB, gradient,
// plus a uniform-random null agent).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "slb/opinion.hpp"
#include "slb/random.hpp"

namespace slb {

/// Index of the maximum element; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

/// Inverse-CDF draw from a probability vector.
template <std::uniform_random_bit_generator G>
std::size_t sample_categorical(std::span<const double> p, G& gen) {
  const double u = uniform01(gen);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cumulative += p[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap between the cumulative sum and 1.
  return last_positive;
}

/// Incremental per-arm sample means. Unpulled arms read as mean 0, count 0.
class RewardEstimates {
 public:
  explicit RewardEstimates(std::size_t k) : means_(k, 0.0), counts_(k, 0) {}
  RewardEstimates(std::vector<double> means, std::vector<std::uint64_t> counts)
      : means_(std::move(means)), counts_(std::move(counts)) {
    if (means_.size() != counts_.size()) throw std::invalid_argument("estimates: length mismatch");
    for (std::size_t i = 0; i < means_.size(); ++i) {
      if (counts_[i] == 0 && means_[i] != 0.0) {
        throw std::invalid_argument("estimates: unpulled arm must have mean 0");
      }
    }
  }

  void record(std::size_t arm, double reward) {
    if (arm >= means_.size()) throw std::out_of_range("estimates: arm index out of range");
    ++counts_[arm];
    means_[arm] += (reward - means_[arm]) / static_cast<double>(counts_[arm]);
  }

  std::size_t size() const { return means_.size(); }
  std::span<const double> means() const { return means_; }
  std::span<const std::uint64_t> counts() const { return counts_; }

 private:
  std::vector<double> means_;
  std::vector<std::uint64_t> counts_;
};

// ---------------------------------------------------------------------------
// SLB

enum class UpdateRule { Average, Max, MaxScaled, Max2Scaled };

/// Whether update conditions compare against the estimates as they were
/// before the current reward was folded in, or after.
enum class ConditionSnapshot { BeforeUpdate, AfterUpdate };

inline bool is_scaled(UpdateRule rule) {
  return rule == UpdateRule::MaxScaled || rule == UpdateRule::Max2Scaled;
}

inline const char* rule_name(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::Average: return "avg";
    case UpdateRule::Max: return "max";
    case UpdateRule::MaxScaled: return "maxs";
    case UpdateRule::Max2Scaled: return "maxs2";
  }
  return "?";
}

struct SlbConfig {
  UpdateRule rule = UpdateRule::Max2Scaled;
  /// Static step eta for Average/Max, dynamic scale zeta for the scaled rules.
  double step = 0.5;
  PriorWeight weight{};
  ConditionSnapshot snapshot = ConditionSnapshot::BeforeUpdate;
  /// Uniform when absent.
  std::optional<std::vector<double>> base_rate;
};

/// Outcome of one SLB observation, mostly for tracing and tests.
struct SlbUpdate {
  bool condition = false;
  double increment = 0.0;
};

/// Evaluates a rule's update condition and evidence increment for `action`
/// against a fixed vector of per-arm mean estimates.
inline SlbUpdate evaluate_rule(UpdateRule rule, double step, std::span<const double> means,
                               std::size_t action, double reward) {
  bool cdt = false;
  switch (rule) {
    case UpdateRule::Average: {
      double avg = 0.0;
      for (double m : means) avg += m;
      avg /= static_cast<double>(means.size());
      cdt = reward > avg;
      break;
    }
    case UpdateRule::Max:
    case UpdateRule::MaxScaled:
      cdt = reward > *std::max_element(means.begin(), means.end());
      break;
    case UpdateRule::Max2Scaled: {
      const std::size_t best = argmax(means);
      if (action == best) {
        std::size_t second = best == 0 ? 1 : 0;
        for (std::size_t i = 0; i < means.size(); ++i) {
          if (i != best && means[i] > means[second]) second = i;
        }
        cdt = reward > means[second];
      } else {
        cdt = reward > means[best];
      }
      break;
    }
  }
  if (!cdt) return {false, 0.0};
  if (!is_scaled(rule)) return {true, step};
  // Negative increments can occur for the best arm under Max2Scaled.
  return {true, std::max(0.0, step * (reward - means[action]))};
}

class SlbAgent {
 public:
  SlbAgent(std::size_t k, SlbConfig config)
      : SlbAgent(config, RewardEstimates(k), EvidenceVector(std::vector<double>(k, 0.0))) {}

  /// Resumes an agent from explicit estimates and evidence.
  SlbAgent(SlbConfig config, RewardEstimates estimates, EvidenceVector evidence)
      : config_(std::move(config)),
        estimates_(std::move(estimates)),
        evidence_(std::move(evidence)),
        base_rate_(config_.base_rate ? *config_.base_rate : uniform_base_rate(evidence_.size())),
        opinion_(evidence_to_opinion(evidence_, base_rate_, config_.weight)) {
    if (!(config_.step > 0.0) || !std::isfinite(config_.step)) {
      throw std::invalid_argument("slb agent: step must be positive and finite");
    }
    if (estimates_.size() != evidence_.size()) {
      throw std::invalid_argument("slb agent: estimates and evidence lengths differ");
    }
  }

  /// Samples from the projected probabilities; never greedy.
  template <std::uniform_random_bit_generator G>
  std::size_t select_action(G& gen) const {
    return sample_categorical(std::span<const double>(project_probabilities(opinion_)), gen);
  }

  SlbUpdate observe(std::size_t action, double reward) {
    if (action >= size()) throw std::out_of_range("slb agent: action out of range");
    SlbUpdate update;
    if (config_.snapshot == ConditionSnapshot::BeforeUpdate) {
      update = evaluate_rule(config_.rule, config_.step, estimates_.means(), action, reward);
      estimates_.record(action, reward);
    } else {
      estimates_.record(action, reward);
      update = evaluate_rule(config_.rule, config_.step, estimates_.means(), action, reward);
    }
    if (update.condition && update.increment > 0.0) {
      evidence_.add(action, update.increment);
      opinion_ = evidence_to_opinion(evidence_, base_rate_, config_.weight);
    }
    return update;
  }

  std::size_t size() const { return evidence_.size(); }
  const SlbConfig& config() const { return config_; }
  const Opinion& opinion() const { return opinion_; }
  const EvidenceVector& evidence() const { return evidence_; }
  const RewardEstimates& estimates() const { return estimates_; }

  double epistemic_uncertainty() const { return opinion_.uncertainty(); }
  double total_uncertainty_bits() const { return entropy_bits(project_probabilities(opinion_)); }

 private:
  SlbConfig config_;
  RewardEstimates estimates_;
  EvidenceVector evidence_;
  std::vector<double> base_rate_;
  Opinion opinion_;
};

// ---------------------------------------------------------------------------
// Baselines

struct EpsilonGreedy {
  double epsilon = 0.1;
};
/// epsilon_t = min(1, 1/t^3), t starting at 1.
struct EpsilonDecay {};
/// UCB1 index mean_i + c sqrt(ln t / n_i) after one forced pull per arm.
struct Ucb {
  double c = 2.0;
};
/// Softmax preferences with a running-mean reward baseline.
struct Gradient {
  double alpha = 0.1;
};
/// Null agent: uniform over arms.
struct UniformRandom {};

using BaselineVariant = std::variant<EpsilonGreedy, EpsilonDecay, Ucb, Gradient, UniformRandom>;

/// Numerically stable softmax (max-subtracted).
inline std::vector<double> softmax(std::span<const double> h) {
  const double top = *std::max_element(h.begin(), h.end());
  std::vector<double> p(h.size());
  double total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    p[i] = std::exp(h[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

class BaselineAgent {
 public:
  BaselineAgent(std::size_t k, BaselineVariant variant)
      : variant_(variant), estimates_(k), preferences_(k, 0.0) {
    if (k < 2) throw std::invalid_argument("baseline agent: k must be >= 2");
    std::visit(
        [](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, EpsilonGreedy>) {
            if (!(v.epsilon >= 0.0 && v.epsilon <= 1.0)) {
              throw std::invalid_argument("epsilon must be in [0, 1]");
            }
          } else if constexpr (std::is_same_v<T, Ucb>) {
            if (!(v.c >= 0.0) || !std::isfinite(v.c)) throw std::invalid_argument("ucb c must be >= 0");
          } else if constexpr (std::is_same_v<T, Gradient>) {
            if (!(v.alpha > 0.0) || !std::isfinite(v.alpha)) {
              throw std::invalid_argument("gradient alpha must be > 0");
            }
          }
        },
        variant_);
  }

  /// Episode index of the next selection, starting at 1.
  std::uint64_t next_episode() const { return step_ + 1; }

  template <std::uniform_random_bit_generator G>
  std::size_t select_action(G& gen) const {
    const std::size_t k = size();
    auto uniform_arm = [&] {
      return std::min(static_cast<std::size_t>(uniform01(gen) * static_cast<double>(k)), k - 1);
    };
    auto epsilon_greedy = [&](double eps) {
      if (eps > 0.0 && uniform01(gen) < eps) return uniform_arm();
      return argmax(estimates_.means());
    };
    return std::visit(
        [&](const auto& v) -> std::size_t {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, EpsilonGreedy>) {
            return epsilon_greedy(v.epsilon);
          } else if constexpr (std::is_same_v<T, EpsilonDecay>) {
            return epsilon_greedy(decayed_epsilon(next_episode()));
          } else if constexpr (std::is_same_v<T, Ucb>) {
            return ucb_action(v.c);
          } else if constexpr (std::is_same_v<T, Gradient>) {
            return sample_categorical(std::span<const double>(policy()), gen);
          } else {
            return uniform_arm();
          }
        },
        variant_);
  }

  void observe(std::size_t action, double reward) {
    if (action >= size()) throw std::out_of_range("baseline agent: action out of range");
    ++step_;
    estimates_.record(action, reward);
    if (const auto* g = std::get_if<Gradient>(&variant_)) {
      // Advantage is taken against the baseline of the rewards before this one.
      const std::vector<double> pi = policy();
      const double advantage = reward - baseline_reward_;
      for (std::size_t i = 0; i < size(); ++i) {
        if (i == action) {
          preferences_[i] += g->alpha * advantage * (1.0 - pi[i]);
        } else {
          preferences_[i] -= g->alpha * advantage * pi[i];
        }
      }
      baseline_reward_ += (reward - baseline_reward_) / static_cast<double>(step_);
    }
  }

  static double decayed_epsilon(std::uint64_t t) {
    const double td = static_cast<double>(std::max<std::uint64_t>(t, 1));
    return std::min(1.0, 1.0 / (td * td * td));
  }

  /// Softmax over preferences (gradient variant; uniform for the others).
  std::vector<double> policy() const { return softmax(preferences_); }

  std::size_t size() const { return estimates_.size(); }
  const BaselineVariant& variant() const { return variant_; }
  const RewardEstimates& estimates() const { return estimates_; }
  std::span<const double> preferences() const { return preferences_; }
  double baseline_reward() const { return baseline_reward_; }
  std::uint64_t step() const { return step_; }

 private:
  std::size_t ucb_action(double c) const {
    auto counts = estimates_.counts();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) return i;
    }
    const double log_t = std::log(static_cast<double>(next_episode()));
    std::vector<double> index(size());
    for (std::size_t i = 0; i < index.size(); ++i) {
      index[i] = estimates_.means()[i] + c * std::sqrt(log_t / static_cast<double>(counts[i]));
    }
    return argmax(index);
  }

  BaselineVariant variant_;
  RewardEstimates estimates_;
  std::vector<double> preferences_;
  double baseline_reward_ = 0.0;
  std::uint64_t step_ = 0;
};

// ---------------------------------------------------------------------------
// Named agent configurations

struct AgentSpec {
  std::string name;
  std::variant<SlbConfig, BaselineVariant> kind;

  bool is_slb() const { return std::holds_alternative<SlbConfig>(kind); }
};

inline std::string default_agent_name(const std::variant<SlbConfig, BaselineVariant>& kind) {
  if (const auto* s = std::get_if<SlbConfig>(&kind)) {
    return std::string("SL(") + rule_name(s->rule) + ")";
  }
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EpsilonGreedy>) return "egreedy";
        else if constexpr (std::is_same_v<T, EpsilonDecay>) return "edecay";
        else if constexpr (std::is_same_v<T, Ucb>) return "ucb";
        else if constexpr (std::is_same_v<T, Gradient>) return "gradient";
        else return "random";
      },
      std::get<BaselineVariant>(kind));
}

/// Either agent kind behind one select/observe interface.
class Agent {
 public:
  Agent(std::size_t k, const AgentSpec& spec)
      : impl_(std::holds_alternative<SlbConfig>(spec.kind)
                  ? Impl(SlbAgent(k, std::get<SlbConfig>(spec.kind)))
                  : Impl(BaselineAgent(k, std::get<BaselineVariant>(spec.kind)))) {}

  template <std::uniform_random_bit_generator G>
  std::size_t select_action(G& gen) const {
    return std::visit([&](const auto& a) { return a.select_action(gen); }, impl_);
  }

  void observe(std::size_t action, double reward) {
    std::visit([&](auto& a) { a.observe(action, reward); }, impl_);
  }

  const SlbAgent* slb() const { return std::get_if<SlbAgent>(&impl_); }
  const BaselineAgent* baseline() const { return std::get_if<BaselineAgent>(&impl_); }

 private:
  using Impl = std::variant<SlbAgent, BaselineAgent>;
  Impl impl_;
};

}  // namespace slb
