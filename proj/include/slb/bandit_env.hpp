#pragma once

// Stationary Gaussian k-armed bandits: the standard 10-armed testbed and the
// four fixed uncertainty scenarios.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slb/random.hpp"

namespace slb {

struct Arm {
  double mean = 0.0;
  double std_dev = 1.0;

  friend bool operator==(const Arm&, const Arm&) = default;
};

/// Immutable k-armed Gaussian bandit. Arms are 0-indexed.
class BanditProblem {
 public:
  explicit BanditProblem(std::vector<Arm> arms, std::optional<std::uint64_t> seed = std::nullopt)
      : arms_(std::move(arms)), seed_(seed) {
    if (arms_.size() < 2) throw std::invalid_argument("bandit problem: k must be >= 2");
    for (const Arm& a : arms_) {
      if (!(a.std_dev > 0.0)) throw std::invalid_argument("bandit problem: std_dev must be > 0");
    }
    // Strict comparison keeps the lowest index on ties.
    for (std::size_t i = 1; i < arms_.size(); ++i) {
      if (arms_[i].mean > arms_[optimal_arm_].mean) optimal_arm_ = i;
    }
  }

  std::size_t size() const { return arms_.size(); }
  std::span<const Arm> arms() const { return arms_; }
  const Arm& arm(std::size_t i) const { return arms_.at(i); }
  std::size_t optimal_arm() const { return optimal_arm_; }
  /// Seed the arm means were drawn from, if any.
  std::optional<std::uint64_t> seed() const { return seed_; }

  friend bool operator==(const BanditProblem&, const BanditProblem&) = default;

 private:
  std::vector<Arm> arms_;
  std::optional<std::uint64_t> seed_;
  std::size_t optimal_arm_ = 0;
};

struct RewardSample {
  std::size_t arm = 0;
  double reward = 0.0;
  std::uint64_t episode = 0;
};

/// Means i.i.d. N(0, 1), unit standard deviations.
template <std::uniform_random_bit_generator G>
BanditProblem standard_testbed(std::size_t k, G& gen) {
  if (k < 2) throw std::invalid_argument("standard_testbed: k must be >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Arm> arms(k);
  for (Arm& a : arms) a = Arm{normal(gen), 1.0};
  return BanditProblem(std::move(arms));
}

/// Seeded form; the seed is recorded in the problem descriptor.
inline BanditProblem standard_testbed(std::size_t k, std::uint64_t seed) {
  Rng gen(seed);
  BanditProblem drawn = standard_testbed(k, gen);
  return BanditProblem(std::vector<Arm>(drawn.arms().begin(), drawn.arms().end()), seed);
}

/// The four fixed uncertainty scenarios, ids 1..4. Arm 0 is always optimal.
inline BanditProblem scenario(int id) {
  auto build = [](std::size_t k, double best_mean, double others_mean, double std_dev) {
    std::vector<Arm> arms(k, Arm{others_mean, std_dev});
    arms[0].mean = best_mean;
    return BanditProblem(std::move(arms));
  };
  switch (id) {
    case 1: return build(10, 0.2, 0.0, 1.0);
    case 2: return build(2, 0.2, 0.0, 1.0);
    case 3: return build(10, 10.0, 0.0, 1.0);
    case 4: return build(10, 2.0, 0.0, 5.0);
    default: throw std::invalid_argument("scenario id must be in 1..4");
  }
}

template <std::uniform_random_bit_generator G>
RewardSample pull(const BanditProblem& problem, std::size_t arm, G& gen, std::uint64_t episode = 0) {
  if (arm >= problem.size()) throw std::out_of_range("pull: arm index out of range");
  const Arm& a = problem.arm(arm);
  std::normal_distribution<double> normal(a.mean, a.std_dev);
  return RewardSample{arm, normal(gen), episode};
}

/// Reward source keyed by (trial seed, episode, arm) so that every agent in
/// a trial sees the same reward for the same pull.
class PairedRewards {
 public:
  PairedRewards(const BanditProblem& problem, std::uint64_t trial_seed)
      : problem_(&problem), trial_seed_(trial_seed) {}

  RewardSample pull(std::size_t arm, std::uint64_t episode) const {
    SplitMix64 gen(derive_seed(trial_seed_, {kRewardStream, episode, arm}));
    return slb::pull(*problem_, arm, gen, episode);
  }

 private:
  const BanditProblem* problem_;
  std::uint64_t trial_seed_;
};

// Descriptor: {k, arms: [{mean, std}], optimal_arm, seed}. seed is null for scenarios.
inline void to_json(nlohmann::json& j, const BanditProblem& p) {
  nlohmann::json arms = nlohmann::json::array();
  for (const Arm& a : p.arms()) arms.push_back({{"mean", a.mean}, {"std", a.std_dev}});
  j = nlohmann::json{{"k", p.size()}, {"arms", std::move(arms)}, {"optimal_arm", p.optimal_arm()}};
  j["seed"] = p.seed() ? nlohmann::json(*p.seed()) : nlohmann::json(nullptr);
}

}  // namespace slb
