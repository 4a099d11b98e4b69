#pragma once

// Straight-line reference for the SLB update rules, used only by tests.
//
// Nothing here is shared with the library: per-arm means are recomputed from
// the raw history at every step, best/second-best come from a stable sort, and
// the opinion is derived from scratch from the accumulated evidence.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

enum class Rule { Average, Max, MaxScaled, Max2Scaled };

struct Step {
  std::size_t action;
  double reward;
};

struct SlbState {
  std::vector<double> means;
  std::vector<double> evidence;
  std::vector<double> belief;
  double uncertainty = 1.0;
};

inline std::vector<double> means_of(const std::vector<Step>& history, std::size_t upto, std::size_t k) {
  std::vector<double> sum(k, 0.0);
  std::vector<double> n(k, 0.0);
  for (std::size_t j = 0; j < upto; ++j) {
    sum[history[j].action] += history[j].reward;
    n[history[j].action] += 1.0;
  }
  std::vector<double> m(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) m[i] = n[i] > 0 ? sum[i] / n[i] : 0.0;
  return m;
}

inline SlbState replay(Rule rule, double step, double weight, std::size_t k, const std::vector<Step>& history,
                       bool after_update = false) {
  std::vector<double> evidence(k, 0.0);
  for (std::size_t j = 0; j < history.size(); ++j) {
    const auto [a, r] = history[j];
    const std::vector<double> m = means_of(history, after_update ? j + 1 : j, k);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return m[x] > m[y]; });

    bool update = false;
    if (rule == Rule::Average) {
      double total = 0.0;
      for (double x : m) total += x;
      update = r > total / static_cast<double>(k);
    } else if (rule == Rule::Max || rule == Rule::MaxScaled) {
      update = r > m[order[0]];
    } else {
      update = a == order[0] ? r > m[order[1]] : r > m[order[0]];
    }
    if (!update) continue;
    double amount = step;
    if (rule == Rule::MaxScaled || rule == Rule::Max2Scaled) {
      amount = step * (r - m[a]);
      if (amount < 0.0) amount = 0.0;
    }
    evidence[a] += amount;
  }

  SlbState s;
  s.means = means_of(history, history.size(), k);
  s.evidence = evidence;
  double total = 0.0;
  for (double e : evidence) total += e;
  s.belief.resize(k);
  for (std::size_t i = 0; i < k; ++i) s.belief[i] = evidence[i] / (weight + total);
  s.uncertainty = weight / (weight + total);
  return s;
}

}  // namespace oracle
