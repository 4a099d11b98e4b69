#pragma once

// Multinomial subjective opinions and the exact mappings between opinions,
// evidential Dirichlet parameters and Dirichlet concentration parameters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace slb {

/// Absolute tolerance for simplex membership and round-trip checks.
inline constexpr double kTolerance = 1e-9;

/// Non-informative prior weight W. Defaults to 2.
class PriorWeight {
 public:
  constexpr PriorWeight() = default;
  explicit PriorWeight(double w) : value_(w) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("prior weight must be positive and finite");
    }
  }
  constexpr double value() const { return value_; }

 private:
  double value_ = 2.0;
};

namespace detail {

inline double kahan_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline void require_probability_vector(std::span<const double> p, const char* what) {
  if (p.size() < 2) {
    throw std::invalid_argument(std::string(what) + ": need at least 2 components");
  }
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": components must be finite and >= 0");
    }
  }
  if (std::abs(kahan_sum(p) - 1.0) > kTolerance) {
    throw std::invalid_argument(std::string(what) + ": components must sum to 1");
  }
}

}  // namespace detail

/// A multinomial opinion (b, u, c) over k >= 2 actions.
///
/// Construction validates u + sum(b) = 1 and sum(c) = 1 within kTolerance,
/// so every live Opinion satisfies its invariants.
class Opinion {
 public:
  Opinion(std::vector<double> belief, double uncertainty, std::vector<double> base_rate)
      : belief_(std::move(belief)), uncertainty_(uncertainty), base_rate_(std::move(base_rate)) {
    if (belief_.size() < 2) {
      throw std::invalid_argument("opinion: k must be >= 2");
    }
    if (belief_.size() != base_rate_.size()) {
      throw std::invalid_argument("opinion: belief and base rate lengths differ");
    }
    for (double b : belief_) {
      if (!(b >= 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("opinion: belief masses must be finite and >= 0");
      }
    }
    if (!(uncertainty_ >= 0.0) || !std::isfinite(uncertainty_)) {
      throw std::invalid_argument("opinion: uncertainty must be finite and >= 0");
    }
    if (std::abs(detail::kahan_sum(belief_) + uncertainty_ - 1.0) > kTolerance) {
      throw std::invalid_argument("opinion: uncertainty + sum(belief) must equal 1");
    }
    detail::require_probability_vector(base_rate_, "opinion base rate");
  }

  std::size_t size() const { return belief_.size(); }
  std::span<const double> belief() const { return belief_; }
  double uncertainty() const { return uncertainty_; }
  std::span<const double> base_rate() const { return base_rate_; }

  friend bool operator==(const Opinion&, const Opinion&) = default;

 private:
  std::vector<double> belief_;
  double uncertainty_;
  std::vector<double> base_rate_;
};

/// Nonnegative, finite evidence counts per action.
class EvidenceVector {
 public:
  explicit EvidenceVector(std::vector<double> evidence) : evidence_(std::move(evidence)) {
    if (evidence_.size() < 2) {
      throw std::invalid_argument("evidence: k must be >= 2");
    }
    for (double e : evidence_) check(e);
  }

  std::size_t size() const { return evidence_.size(); }
  std::span<const double> values() const { return evidence_; }
  double operator[](std::size_t i) const { return evidence_[i]; }

  /// Adds `amount` (>= 0) of evidence to action `i`.
  void add(std::size_t i, double amount) {
    if (i >= evidence_.size()) throw std::out_of_range("evidence: action index out of range");
    if (!(amount >= 0.0)) throw std::invalid_argument("evidence: increments must be >= 0");
    double next = evidence_[i] + amount;
    check(next);
    evidence_[i] = next;
  }

  // Plain left-to-right sum: monotone in every component, so uncertainty
  // derived from it never increases when evidence is added.
  double total() const { return std::accumulate(evidence_.begin(), evidence_.end(), 0.0); }

  friend bool operator==(const EvidenceVector&, const EvidenceVector&) = default;

 private:
  static void check(double e) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("evidence: components must be finite and >= 0");
    }
  }

  std::vector<double> evidence_;
};

/// Dirichlet concentration parameters, all strictly positive.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.size() < 2) {
      throw std::invalid_argument("dirichlet: k must be >= 2");
    }
    for (double a : alpha_) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("dirichlet: concentrations must be finite and > 0");
      }
    }
  }

  std::size_t size() const { return alpha_.size(); }
  std::span<const double> values() const { return alpha_; }
  double operator[](std::size_t i) const { return alpha_[i]; }

 private:
  std::vector<double> alpha_;
};

inline std::vector<double> uniform_base_rate(std::size_t k) {
  if (k < 2) throw std::invalid_argument("base rate: k must be >= 2");
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

/// Complete ignorance: zero belief, unit uncertainty. Base rate defaults to uniform.
inline Opinion vacuous_opinion(std::size_t k, std::optional<std::vector<double>> base_rate = std::nullopt) {
  if (k < 2) throw std::invalid_argument("vacuous_opinion: k must be >= 2");
  std::vector<double> c = base_rate ? std::move(*base_rate) : uniform_base_rate(k);
  if (c.size() != k) throw std::invalid_argument("vacuous_opinion: base rate has wrong length");
  return Opinion(std::vector<double>(k, 0.0), 1.0, std::move(c));
}

/// P(a_i | w) = b_i + u c_i.
inline std::vector<double> project_probabilities(const Opinion& op) {
  auto b = op.belief();
  auto c = op.base_rate();
  std::vector<double> p(op.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = b[i] + op.uncertainty() * c[i];
  return p;
}

/// e_i = W b_i / u. Throws std::domain_error for dogmatic opinions (u = 0).
inline EvidenceVector opinion_to_evidence(const Opinion& op, PriorWeight w = {}) {
  if (op.uncertainty() == 0.0) {
    throw std::domain_error("opinion_to_evidence: dogmatic opinion maps to infinite evidence");
  }
  std::vector<double> e(op.size());
  auto b = op.belief();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = w.value() * b[i] / op.uncertainty();
  return EvidenceVector(std::move(e));
}

/// b_i = e_i / (W + sum e), u = W / (W + sum e).
inline Opinion evidence_to_opinion(const EvidenceVector& e, std::vector<double> base_rate, PriorWeight w = {}) {
  if (base_rate.size() != e.size()) {
    throw std::invalid_argument("evidence_to_opinion: base rate has wrong length");
  }
  const double denom = w.value() + e.total();
  std::vector<double> b(e.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = e[i] / denom;
  return Opinion(std::move(b), w.value() / denom, std::move(base_rate));
}

/// alpha_i = W (b_i / u + c_i). Throws std::domain_error for u = 0.
inline DirichletParams opinion_to_dirichlet(const Opinion& op, PriorWeight w = {}) {
  if (op.uncertainty() == 0.0) {
    throw std::domain_error("opinion_to_dirichlet: dogmatic opinion maps to infinite concentration");
  }
  std::vector<double> alpha(op.size());
  auto b = op.belief();
  auto c = op.base_rate();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    alpha[i] = w.value() * (b[i] / op.uncertainty() + c[i]);
  }
  return DirichletParams(std::move(alpha));
}

/// Inverse of opinion_to_dirichlet for a chosen base rate.
///
/// Requires alpha_i / W >= c_i; shortfalls beyond kTolerance are rejected
/// with std::invalid_argument, smaller ones are rounding noise and read as 0.
inline Opinion dirichlet_to_opinion(const DirichletParams& alpha, std::vector<double> base_rate, PriorWeight w = {}) {
  if (base_rate.size() != alpha.size()) {
    throw std::invalid_argument("dirichlet_to_opinion: base rate has wrong length");
  }
  detail::require_probability_vector(base_rate, "dirichlet_to_opinion base rate");
  std::vector<double> excess(alpha.size());
  for (std::size_t i = 0; i < excess.size(); ++i) {
    double x = alpha[i] / w.value() - base_rate[i];
    if (x < -kTolerance) {
      throw std::invalid_argument("dirichlet_to_opinion: alpha_i / W < c_i gives negative belief");
    }
    excess[i] = std::max(x, 0.0);
  }
  const double denom = 1.0 + detail::kahan_sum(excess);
  std::vector<double> b(excess.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = excess[i] / denom;
  return Opinion(std::move(b), 1.0 / denom, std::move(base_rate));
}

/// Shannon entropy in bits. Zero-probability terms contribute 0.
inline double entropy_bits(std::span<const double> p) {
  detail::require_probability_vector(p, "entropy_bits");
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return std::clamp(h, 0.0, std::log2(static_cast<double>(p.size())));
}

// Structured-text records: {"belief": [...], "uncertainty": u, "base_rate": [...]}
// and {"evidence": [...]}.

inline void to_json(nlohmann::json& j, const Opinion& op) {
  j = nlohmann::json{{"belief", std::vector<double>(op.belief().begin(), op.belief().end())},
                     {"uncertainty", op.uncertainty()},
                     {"base_rate", std::vector<double>(op.base_rate().begin(), op.base_rate().end())}};
}

inline void to_json(nlohmann::json& j, const EvidenceVector& e) {
  j = nlohmann::json{{"evidence", std::vector<double>(e.values().begin(), e.values().end())}};
}

inline Opinion opinion_from_json(const nlohmann::json& j) {
  return Opinion(j.at("belief").get<std::vector<double>>(), j.at("uncertainty").get<double>(),
                 j.at("base_rate").get<std::vector<double>>());
}

inline EvidenceVector evidence_from_json(const nlohmann::json& j) {
  return EvidenceVector(j.at("evidence").get<std::vector<double>>());
}

}  // namespace slb
