// isr-lab: run a protocol experiment and emit CSV (plus a JSON mirror with --out).
//
//   isr-lab <experiment> [--param value ...] [--seed S] [--trials N] [--out file.csv] [--jobs J]
//   isr-lab --config file.json [overrides ...]
//
// Exit codes: 0 ran, 2 configuration error, 3 infeasible parameters.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "isr/errors.hpp"
#include "isr/harness.hpp"
#include "isr/randsource.hpp"

namespace {

using isr::harness::ExperimentConfig;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string json_path_for(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  }
  return csv_path + ".json";
}

std::string flag_names(const std::string& name) {
  std::string dashed = name;
  for (char& ch : dashed) {
    if (ch == '_') ch = '-';
  }
  return dashed == name ? "--" + name : "--" + name + ",--" + dashed;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for protocols with imperfectly shared randomness"};
  std::string experiment;
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  bool list = false;
  app.add_option("experiment", experiment,
                 "source | compress | agree | gapip | gapip-gaussian | gapip-sparse | "
                 "strategy-check | influence | equality");
  app.add_option("--config", config_path, "JSON config; flags override its fields");
  app.add_option("--seed", seed, "master seed, decimal or 0x-hex");
  app.add_option("--trials", trials, "trials (samples for source, pairs for strategy-check)");
  app.add_option("--out", out, "CSV output path; the JSON mirror goes next to it");
  app.add_option("--jobs", jobs, "worker threads; results do not depend on it");
  app.add_flag("--list", list, "list experiments and their parameters");

  std::map<std::string, std::string> flag_values;
  for (const auto& name : isr::harness::all_param_names()) {
    app.add_option(flag_names(name), flag_values[name], "experiment parameter (see --list)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& kind : isr::harness::experiment_kinds()) {
      std::cout << kind << '\n';
      for (const auto& spec : isr::harness::param_specs(kind)) {
        std::cout << "  --" << spec.name << " (default " << spec.fallback.dump() << "): " << spec.help << '\n';
      }
    }
    return 0;
  }

  ExperimentConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw isr::ConfigError("cannot open config file: " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw isr::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    config = ExperimentConfig::from_json(j);
  }
  if (!experiment.empty()) config.kind = experiment;
  if (config.kind.empty()) throw isr::ConfigError("no experiment given (positional name or --config)");

  const std::string kind = isr::harness::canonical_kind(config.kind);
  const auto& specs = isr::harness::param_specs(kind);
  for (const auto& [name, value] : flag_values) {
    if (app.count("--" + name) == 0) continue;
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.name == name; });
    if (it == specs.end()) throw isr::ConfigError("--" + name + " does not apply to " + kind);
    config.params[name] = isr::harness::parse_param(*it, value);
  }
  if (seed) {
    try {
      config.seed = isr::rand::parse_seed(*seed);
    } catch (const std::invalid_argument& e) {
      throw isr::ConfigError(e.what());
    }
  }
  if (trials) config.trials = *trials;
  if (out) config.out = *out;
  if (jobs) config.jobs = *jobs;

  const auto result = isr::harness::run(config);
  const std::string csv = isr::harness::to_csv(result);
  if (config.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream csv_out(config.out);
    if (!csv_out) throw isr::ConfigError("cannot write " + config.out);
    csv_out << csv;
    std::ofstream json_out(json_path_for(config.out));
    if (!json_out) throw isr::ConfigError("cannot write " + json_path_for(config.out));
    json_out << isr::harness::to_json(result, utc_timestamp()).dump(2) << '\n';
  }
  if (!result.table.summary.empty()) std::cerr << result.table.summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const isr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const isr::InfeasibleParameters& e) {
    std::cerr << "infeasible parameters: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "infeasible parameters: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
