#pragma once

// Experiment configuration, dispatch and table output for the isr-lab CLI.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace isr::harness {

struct ExperimentConfig {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();  // filled with defaults by normalize()
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out;       // empty: CSV to stdout
  std::size_t jobs = 1;  // does not affect results

  // Reads {"experiment": kind, "trials", "seed", "out", "jobs", "params": {...}}.
  // "seed" may be a number or a decimal / 0x-hex string. Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Known experiment kinds, canonical names first.
std::vector<std::string> experiment_kinds();
// Maps aliases (correlation, gapip-gaussian, gapip-sparse) to a canonical
// kind and its implied parameters. Throws ConfigError for unknown names.
std::string canonical_kind(const std::string& name, nlohmann::json* implied = nullptr);

enum class ParamType { Number, Integer, String, Boolean, NumberList };

struct ParamSpec {
  std::string name;
  ParamType type;
  nlohmann::json fallback;  // null: derived from other parameters
  std::string help;
};

const std::vector<ParamSpec>& param_specs(const std::string& kind);
// Every parameter name used by any kind.
std::vector<std::string> all_param_names();

// Parses a command-line value per the parameter's type. Throws ConfigError.
nlohmann::json parse_param(const ParamSpec& spec, const std::string& text);

// Canonical kind, defaults filled in, types and unknown keys checked. Throws ConfigError.
ExperimentConfig normalize(ExperimentConfig config);

// FNV-1a 64 of the canonical JSON of (kind, params, trials, seed), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  nlohmann::json summary = nlohmann::json::object();
};

struct RunResult {
  ExperimentConfig config;
  std::string hash;
  ResultTable table;
  double wall_time = 0.0;  // seconds
};

// Normalizes and runs. Throws ConfigError or InfeasibleParameters.
RunResult run(const ExperimentConfig& config);

// Fixed column order plus a trailing config_hash column.
std::string to_csv(const RunResult& result);
// Same values, plus the config, summary, timestamp and wall time.
nlohmann::json to_json(const RunResult& result, const std::string& timestamp);

}  // namespace isr::harness
