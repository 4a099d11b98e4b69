#pragma once

// Experiment configuration documents.
//
// Configs are YAML (JSON is accepted too, being a YAML subset):
//
//   schema_version: 1
//   master_seed: 2020
//   episodes: 1000
//   trials: 500
//   environment: {type: testbed, k: 10}      # or {type: scenario, id: 3}
//   raw_trials: false
//   agents:
//     - {type: slb, rule: maxs2, zeta: 0.5}
//     - {type: egreedy, epsilon: 0.1}
//
// Validation errors carry the 1-based line of the offending node.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "slb/agents.hpp"
#include "slb/experiment.hpp"

namespace slb {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  /// 1-based; 0 when no position is known.
  int line() const { return line_; }

 private:
  int line_;
};

/// Document plus options that are not part of the experiment proper.
struct RunConfig {
  ExperimentConfig experiment;
  bool raw_trials = false;
};

namespace detail {

inline int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

class MappingReader {
 public:
  MappingReader(const YAML::Node& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.IsMap()) throw ConfigError(line_of(node_), where_ + " must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node required(const std::string& key) {
    if (!has(key)) {
      throw ConfigError(line_of(node_), "missing required field '" + key + "' in " + where_);
    }
    return node_[key];
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(required(key), key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? convert<T>(node_[key], key) : fallback;
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) {
        throw ConfigError(line_of(kv.first), "unknown field '" + key + "' in " + where_);
      }
    }
  }

  int line() const { return line_of(node_); }

 private:
  template <typename T>
  T convert(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(line_of(n), "field '" + key + "' in " + where_ + " has the wrong type");
    }
  }

  const YAML::Node node_;
  std::string where_;
  std::set<std::string> seen_;
};

inline UpdateRule parse_rule(const std::string& name, int line) {
  if (name == "avg" || name == "average") return UpdateRule::Average;
  if (name == "max") return UpdateRule::Max;
  if (name == "maxs") return UpdateRule::MaxScaled;
  if (name == "maxs2" || name == "max2") return UpdateRule::Max2Scaled;
  throw ConfigError(line, "unknown slb rule '" + name + "' (expected avg, max, maxs, maxs2)");
}

inline AgentSpec parse_agent(const YAML::Node& node, std::size_t index) {
  MappingReader r(node, "agents[" + std::to_string(index) + "]");
  const auto type = r.get<std::string>("type");
  AgentSpec spec;
  if (type == "slb") {
    SlbConfig c;
    c.rule = parse_rule(r.get<std::string>("rule"), r.line());
    const bool has_eta = r.has("eta");
    const bool has_zeta = r.has("zeta");
    if (has_eta == has_zeta) {
      throw ConfigError(r.line(), "slb agent needs exactly one of 'eta' (static rules) or 'zeta' (scaled rules)");
    }
    if (has_eta && is_scaled(c.rule)) {
      throw ConfigError(r.line(), std::string("rule '") + rule_name(c.rule) + "' is scaled and takes 'zeta'");
    }
    if (has_zeta && !is_scaled(c.rule)) {
      throw ConfigError(r.line(), std::string("rule '") + rule_name(c.rule) + "' is static and takes 'eta'");
    }
    c.step = r.get<double>(has_eta ? "eta" : "zeta");
    c.weight = PriorWeight(r.get_or<double>("prior_weight", 2.0));
    const auto snap = r.get_or<std::string>("condition_snapshot", "before");
    if (snap == "before") {
      c.snapshot = ConditionSnapshot::BeforeUpdate;
    } else if (snap == "after") {
      c.snapshot = ConditionSnapshot::AfterUpdate;
    } else {
      throw ConfigError(r.line(), "condition_snapshot must be 'before' or 'after'");
    }
    if (r.has("base_rate")) c.base_rate = r.get<std::vector<double>>("base_rate");
    spec.kind = c;
  } else if (type == "egreedy") {
    spec.kind = BaselineVariant(EpsilonGreedy{r.get_or<double>("epsilon", 0.1)});
  } else if (type == "edecay") {
    spec.kind = BaselineVariant(EpsilonDecay{});
  } else if (type == "ucb") {
    spec.kind = BaselineVariant(Ucb{r.get_or<double>("c", 2.0)});
  } else if (type == "gradient") {
    spec.kind = BaselineVariant(Gradient{r.get_or<double>("alpha", 0.1)});
  } else if (type == "random") {
    spec.kind = BaselineVariant(UniformRandom{});
  } else {
    throw ConfigError(r.line(), "unknown agent type '" + type + "'");
  }
  spec.name = r.get_or<std::string>("name", default_agent_name(spec.kind));
  r.finish();
  return spec;
}

inline EnvironmentSpec parse_environment(const YAML::Node& node) {
  MappingReader r(node, "environment");
  const auto type = r.get<std::string>("type");
  EnvironmentSpec env;
  if (type == "testbed") {
    env = StandardTestbedEnv{r.get_or<std::size_t>("k", 10)};
  } else if (type == "scenario") {
    env = ScenarioEnv{r.get<int>("id")};
  } else {
    throw ConfigError(r.line(), "environment type must be 'testbed' or 'scenario'");
  }
  r.finish();
  return env;
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root) {
  detail::MappingReader r(root, "config");
  const int version = r.get<int>("schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError(r.line(), "unsupported schema_version " + std::to_string(version));
  }
  RunConfig out;
  ExperimentConfig& e = out.experiment;
  e.master_seed = r.get<std::uint64_t>("master_seed");
  e.episodes = r.get_or<std::uint64_t>("episodes", 1000);
  e.trials = r.get_or<std::uint64_t>("trials", 500);
  e.environment = detail::parse_environment(r.required("environment"));
  out.raw_trials = r.get_or<bool>("raw_trials", false);

  const YAML::Node agents = r.required("agents");
  if (!agents.IsSequence() || agents.size() == 0) {
    throw ConfigError(detail::line_of(agents), "'agents' must be a non-empty list");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    try {
      e.agents.push_back(detail::parse_agent(agents[i], i));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(detail::line_of(agents[i]), ex.what());
    }
  }
  r.finish();

  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(r.line(), ex.what());
  }
  return out;
}

inline RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(ex.mark.is_null() ? 0 : ex.mark.line + 1, ex.msg);
  }
  return parse_config(root);
}

/// Throws ConfigError on parse/validation failure and std::runtime_error when unreadable.
inline RunConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw std::runtime_error("cannot read config file " + path.string());
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(ex.mark.is_null() ? 0 : ex.mark.line + 1, ex.msg);
  }
  return parse_config(root);
}

// ---------------------------------------------------------------------------
// Resolved form, written into run manifests. Feeding it back to parse_config
// reproduces the same experiment.

inline nlohmann::json agent_to_json(const AgentSpec& spec) {
  nlohmann::json j;
  if (const auto* s = std::get_if<SlbConfig>(&spec.kind)) {
    j["type"] = "slb";
    j["rule"] = rule_name(s->rule);
    j[is_scaled(s->rule) ? "zeta" : "eta"] = s->step;
    j["prior_weight"] = s->weight.value();
    j["condition_snapshot"] = s->snapshot == ConditionSnapshot::BeforeUpdate ? "before" : "after";
    if (s->base_rate) j["base_rate"] = *s->base_rate;
  } else {
    std::visit(
        [&j](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, EpsilonGreedy>) {
            j["type"] = "egreedy";
            j["epsilon"] = v.epsilon;
          } else if constexpr (std::is_same_v<T, EpsilonDecay>) {
            j["type"] = "edecay";
          } else if constexpr (std::is_same_v<T, Ucb>) {
            j["type"] = "ucb";
            j["c"] = v.c;
          } else if constexpr (std::is_same_v<T, Gradient>) {
            j["type"] = "gradient";
            j["alpha"] = v.alpha;
          } else {
            j["type"] = "random";
          }
        },
        std::get<BaselineVariant>(spec.kind));
  }
  j["name"] = spec.name;
  return j;
}

inline nlohmann::json config_to_json(const RunConfig& config) {
  const ExperimentConfig& e = config.experiment;
  nlohmann::json env;
  if (const auto* tb = std::get_if<StandardTestbedEnv>(&e.environment)) {
    env = {{"type", "testbed"}, {"k", tb->k}};
  } else {
    env = {{"type", "scenario"}, {"id", std::get<ScenarioEnv>(e.environment).id}};
  }
  nlohmann::json agents = nlohmann::json::array();
  for (const AgentSpec& a : e.agents) agents.push_back(agent_to_json(a));
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"master_seed", e.master_seed},
                        {"episodes", e.episodes},
                        {"trials", e.trials},
                        {"environment", env},
                        {"raw_trials", config.raw_trials},
                        {"agents", agents}};
}

}  // namespace slb
