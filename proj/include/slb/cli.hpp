#pragma once

// Command implementations behind the slb-bench executable. Each command
// returns a process exit code and reports diagnostics on the given stream.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slb/config.hpp"
#include "slb/experiment.hpp"
#include "slb/output.hpp"

namespace slb::cli {

inline constexpr const char* kToolName = "slb-bench";
inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

struct ScenarioOptions {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  /// Replaces the built-in defaults (agent, horizon, trials, seed).
  std::optional<std::filesystem::path> config_path;
  /// SLB rule override, e.g. "maxs".
  std::optional<std::string> rule;
};

/// --jobs falls back to $SLB_JOBS, then 1.
inline unsigned resolve_jobs(std::optional<unsigned> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("SLB_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Built-in scenario settings; configs/fig4_scenarios.yaml mirrors them.
inline RunConfig default_scenarios_config() {
  RunConfig rc;
  rc.experiment.master_seed = 2020;
  rc.experiment.episodes = 1000;
  rc.experiment.trials = 500;
  rc.experiment.environment = ScenarioEnv{1};
  SlbConfig slb;
  slb.rule = UpdateRule::Max2Scaled;
  slb.step = 0.5;
  rc.experiment.agents.push_back(AgentSpec{"SL(maxs2)", slb});
  return rc;
}

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << content;
  os.close();
  if (!os) throw IoError("cannot write " + path.string());
}

inline std::string render_curves(std::span<const NamedCurve> curves) {
  std::ostringstream os;
  write_curves_csv(os, curves);
  return os.str();
}

/// Writes the combined CSV plus one CSV per agent; returns the file names.
inline std::vector<std::string> write_result(const std::filesystem::path& dir, const ExperimentResult& result,
                                             const std::string& combined_name, const std::string& suffix) {
  std::vector<std::string> files;
  write_file(dir / combined_name, render_curves(result));
  files.push_back(combined_name);
  for (const NamedCurve& nc : result) {
    const std::string name = agent_slug(nc.agent) + suffix + ".csv";
    write_file(dir / name, render_curves(std::span<const NamedCurve>(&nc, 1)));
    files.push_back(name);
  }
  return files;
}

/// Streams raw per-trial metrics and trial problems under <dir>/raw/.
class RawWriter {
 public:
  RawWriter(const std::filesystem::path& dir, const ExperimentConfig& config, const std::string& suffix) {
    ensure_dir(dir / "raw");
    problems_.open(dir / "raw" / ("problems" + suffix + ".jsonl"), std::ios::binary | std::ios::trunc);
    files_.push_back("raw/problems" + suffix + ".jsonl");
    for (const AgentSpec& a : config.agents) {
      const std::string name = "raw/" + agent_slug(a.name) + suffix + ".csv";
      streams_.emplace_back(dir / name, std::ios::binary | std::ios::trunc);
      streams_.back() << kRawHeader << '\n';
      files_.push_back(name);
    }
    if (!problems_) throw IoError("cannot write raw trial files in " + dir.string());
    for (auto& s : streams_) {
      if (!s) throw IoError("cannot write raw trial files in " + dir.string());
    }
  }

  RawTrialSink sink() {
    return [this](std::uint64_t trial, std::size_t agent, const BanditProblem& problem,
                  std::span<const EpisodeMetrics> metrics) {
      if (agent == 0) {
        nlohmann::json j = problem;
        j["trial"] = trial;
        problems_ << j.dump() << '\n';
      }
      write_raw_rows(streams_[agent], trial, metrics);
    };
  }

  std::vector<std::string> close() {
    problems_.close();
    bool ok = static_cast<bool>(problems_);
    for (auto& s : streams_) {
      s.close();
      ok = ok && static_cast<bool>(s);
    }
    if (!ok) throw IoError("failed writing raw trial files");
    return files_;
  }

 private:
  std::ofstream problems_;
  std::vector<std::ofstream> streams_;
  std::vector<std::string> files_;
};

inline nlohmann::json manifest_base(const std::string& command, const RunConfig& config, unsigned jobs) {
  return nlohmann::json{
      {"tool", kToolName},
      {"version", kVersion},
      {"command", command},
      {"config", config_to_json(config)},
      {"jobs", jobs},
      {"seeding",
       "splitmix64 fold: trial=derive(master,{trial}); testbed=derive(trial,{testbed}); "
       "agent=derive(trial,{agent}); reward=derive(trial,{reward,episode,arm})"}};
}

inline void finish_manifest(const std::filesystem::path& dir, nlohmann::json manifest,
                            std::vector<std::string> artifacts, std::chrono::steady_clock::time_point start) {
  artifacts.push_back("manifest.json");
  manifest["artifacts"] = artifacts;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

template <typename Body>
int guarded(const std::string& source, std::ostream& err, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << source << ":" << e.line() << ": error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

inline RunConfig load_or_io_error(const std::filesystem::path& path) {
  try {
    return load_config(path);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

}  // namespace detail

/// run <config> --out <dir>: one CSV per agent, curves.csv, config.resolved.json, manifest.json.
inline int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                   const CommonOptions& opts, std::ostream& err) {
  return detail::guarded(config_path.string(), err, [&] {
    const auto start = std::chrono::steady_clock::now();
    RunConfig rc = detail::load_or_io_error(config_path);
    if (opts.seed) rc.experiment.master_seed = *opts.seed;
    detail::ensure_dir(out_dir);

    RunOptions run_opts;
    run_opts.jobs = opts.jobs;
    std::optional<detail::RawWriter> raw;
    if (rc.raw_trials) {
      raw.emplace(out_dir, rc.experiment, "");
      run_opts.raw_sink = raw->sink();
    }
    const ExperimentResult result = run_experiment(rc.experiment, run_opts);

    std::vector<std::string> files = detail::write_result(out_dir, result, "curves.csv", "");
    if (raw) {
      for (auto& f : raw->close()) files.push_back(f);
    }
    detail::write_file(out_dir / "config.resolved.json", config_to_json(rc).dump(2) + "\n");
    files.push_back("config.resolved.json");
    detail::finish_manifest(out_dir, detail::manifest_base("run", rc, opts.jobs), files, start);
  });
}

/// Filename tag for a swept value, e.g. ("zeta", 0.5) -> "_zeta-0.5".
inline std::string sweep_suffix(const std::string& param, double value) {
  return "_" + param + "-" + format_float(value);
}

/// sweep <config> --param p --values v1,...: one output set per value.
inline int cmd_sweep(const std::filesystem::path& config_path, const std::string& param,
                     std::span<const double> values, const std::filesystem::path& out_dir,
                     const CommonOptions& opts, std::ostream& err) {
  if (values.empty()) {
    err << "error: sweep needs at least one value in --values\n";
    return kExitConfig;
  }
  return detail::guarded(config_path.string(), err, [&] {
    const auto start = std::chrono::steady_clock::now();
    RunConfig rc = detail::load_or_io_error(config_path);
    if (opts.seed) rc.experiment.master_seed = *opts.seed;
    detail::ensure_dir(out_dir);

    std::vector<std::string> files;
    for (double v : values) {
      RunConfig point = rc;
      bool applied = false;
      for (AgentSpec& spec : point.experiment.agents) applied = apply_parameter(spec, param, v) || applied;
      if (!applied) throw ConfigError(0, "no agent in the config has parameter '" + param + "'");
      try {
        point.experiment.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(0, param + "=" + format_float(v) + ": " + e.what());
      }
      const std::string suffix = sweep_suffix(param, v);
      RunOptions run_opts;
      run_opts.jobs = opts.jobs;
      std::optional<detail::RawWriter> raw;
      if (point.raw_trials) {
        raw.emplace(out_dir, point.experiment, suffix);
        run_opts.raw_sink = raw->sink();
      }
      const ExperimentResult result = run_experiment(point.experiment, run_opts);
      for (auto& f : detail::write_result(out_dir, result, "curves" + suffix + ".csv", suffix)) {
        files.push_back(f);
      }
      if (raw) {
        for (auto& f : raw->close()) files.push_back(f);
      }
    }
    nlohmann::json manifest = detail::manifest_base("sweep", rc, opts.jobs);
    manifest["sweep"] = {{"param", param}, {"values", std::vector<double>(values.begin(), values.end())}};
    detail::finish_manifest(out_dir, manifest, files, start);
  });
}

/// scenarios --out <dir>: runs the SLB agent on scenarios 1-4, one CSV each.
inline int cmd_scenarios(const std::filesystem::path& out_dir, const ScenarioOptions& opts, std::ostream& err) {
  const std::string source = opts.config_path ? opts.config_path->string() : std::string("<built-in>");
  return detail::guarded(source, err, [&] {
    const auto start = std::chrono::steady_clock::now();
    RunConfig rc = opts.config_path ? detail::load_or_io_error(*opts.config_path) : default_scenarios_config();
    if (opts.seed) rc.experiment.master_seed = *opts.seed;
    if (opts.rule) {
      const UpdateRule rule = slb::detail::parse_rule(*opts.rule, 0);
      bool found = false;
      for (AgentSpec& spec : rc.experiment.agents) {
        if (auto* s = std::get_if<SlbConfig>(&spec.kind)) {
          if (spec.name == default_agent_name(spec.kind)) spec.name = std::string("SL(") + rule_name(rule) + ")";
          s->rule = rule;
          found = true;
        }
      }
      if (!found) throw ConfigError(0, "--agent override needs an slb agent in the config");
    }
    detail::ensure_dir(out_dir);

    std::vector<std::string> files;
    for (int id = 1; id <= 4; ++id) {
      RunConfig point = rc;
      point.experiment.environment = ScenarioEnv{id};
      RunOptions run_opts;
      run_opts.jobs = opts.jobs;
      const std::string tag = "scenario" + std::to_string(id);
      std::optional<detail::RawWriter> raw;
      if (point.raw_trials) {
        raw.emplace(out_dir, point.experiment, "_" + tag);
        run_opts.raw_sink = raw->sink();
      }
      const ExperimentResult result = run_experiment(point.experiment, run_opts);
      detail::write_file(out_dir / (tag + ".csv"), detail::render_curves(result));
      files.push_back(tag + ".csv");
      if (raw) {
        for (auto& f : raw->close()) files.push_back(f);
      }
    }
    detail::finish_manifest(out_dir, detail::manifest_base("scenarios", rc, opts.jobs), files, start);
  });
}

}  // namespace slb::cli
