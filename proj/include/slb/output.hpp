#pragma once

// CSV rendering of aggregate curves and raw trials.
//
// Long format, one row per (agent, episode):
//   agent,episode,pct_optimal,mean_reward,epistemic_u,entropy_bits
// Episodes are 1-based, floats use 9 significant digits, and metrics an agent
// does not produce are left empty.

#include <cctype>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "slb/bandit_env.hpp"
#include "slb/experiment.hpp"

namespace slb {

inline constexpr const char* kCurveHeader = "agent,episode,pct_optimal,mean_reward,epistemic_u,entropy_bits";
inline constexpr const char* kRawHeader = "trial,episode,action,optimal_taken,reward,epistemic_u,entropy_bits";

inline std::string format_float(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// Lowercase alphanumerics, everything else folded to single underscores.
/// "SL(maxs2)" -> "sl_maxs2".
inline std::string agent_slug(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '.' || ch == '-') {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "agent" : out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

inline void write_curve_rows(std::ostream& os, const NamedCurve& nc) {
  const AggregateCurve& c = nc.curve;
  const std::string agent = detail::csv_field(nc.agent);
  for (std::size_t t = 0; t < c.episodes(); ++t) {
    os << agent << ',' << (t + 1) << ',' << format_float(c.pct_optimal[t]) << ','
       << format_float(c.mean_reward[t]) << ',';
    if (c.has_uncertainty()) {
      os << format_float(c.mean_epistemic_u[t]) << ',' << format_float(c.mean_entropy_bits[t]);
    } else {
      os << ',';
    }
    os << '\n';
  }
}

inline void write_curves_csv(std::ostream& os, std::span<const NamedCurve> curves) {
  os << kCurveHeader << '\n';
  for (const NamedCurve& nc : curves) write_curve_rows(os, nc);
}

inline void write_raw_rows(std::ostream& os, std::uint64_t trial, std::span<const EpisodeMetrics> metrics) {
  for (const EpisodeMetrics& m : metrics) {
    os << trial << ',' << (m.episode + 1) << ',' << m.action << ',' << (m.optimal_taken ? 1 : 0) << ','
       << format_float(m.reward) << ',';
    if (m.epistemic_u) os << format_float(*m.epistemic_u);
    os << ',';
    if (m.entropy_bits) os << format_float(*m.entropy_bits);
    os << '\n';
  }
}

}  // namespace slb
