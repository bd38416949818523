// Command-line front end: single runs, paired policy comparisons and
// parameter sweeps producing plot-ready CSV.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dorasim/config_io.hpp"
#include "dorasim/policies.hpp"
#include "dorasim/simulation.hpp"

namespace {

using namespace dorasim;

constexpr int kExitChecksFailed = 1;
constexpr int kExitBadInput = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string checks = "on";
  std::string timing = "off";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Scenario (or sweep) JSON file")->required();
  cmd->add_option("--out", f.out, "Output path prefix")->required();
  cmd->add_option("--seed", f.seed, "Override the master seed");
  cmd->add_option("--checks", f.checks, "Runtime lemma/bound checks")
      ->check(CLI::IsMember({"on", "off"}));
}

void add_timing(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--timing", f.timing,
                  "Record policy wall-clock time in the outputs (makes them non-reproducible)")
      ->check(CLI::IsMember({"on", "off"}));
}

// "runs/a.csv" and "runs/a" both name the prefix "runs/a"
std::string output_prefix(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".csv" || p.extension() == ".json") p.replace_extension();
  return p.string();
}

void open_or_throw(std::ofstream& f, const std::string& path) {
  f.open(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
}

void write_outputs(const std::string& out, const ScenarioConfig& config,
                   const std::vector<RunResult>& results, bool timing) {
  const std::string prefix = output_prefix(out);
  std::ofstream csv, js;
  open_or_throw(csv, prefix + ".csv");
  open_or_throw(js, prefix + ".json");
  write_run_csv(csv, results, timing);
  write_run_json(js, config, results, timing);
}

int report(const std::vector<RunResult>& results) {
  int status = 0;
  for (const RunResult& r : results) {
    std::cerr << r.algorithm << ": final regret " << format_number(r.summary.final_regret)
              << ", tail-average regret " << format_number(r.summary.tail_average_regret)
              << '\n';
    if (!r.checks.passed()) {
      status = kExitChecksFailed;
      std::cerr << r.algorithm << ": runtime checks FAILED\n";
      for (const std::string& m : r.checks.messages) std::cerr << "  " << m << '\n';
    }
  }
  return status;
}

ScenarioConfig load_scenario(const CommonFlags& f, std::vector<std::string>* policies) {
  ConfigFile file = load_config(f.config);
  if (f.seed) file.scenario.seed = *f.seed;
  file.scenario.checks = f.checks == "on";
  if (policies) *policies = file.policies;
  return file.scenario;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::string item;
  for (char c : list) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

void require_known(const std::vector<std::string>& policies) {
  if (policies.empty()) throw ConfigError("no policies given");
  for (const std::string& p : policies) {
    if (!is_policy_name(p)) {
      std::string valid;
      for (std::string_view n : policy_names()) valid += std::string(valid.empty() ? "" : ", ") + std::string(n);
      throw ConfigError("unknown policy '" + p + "' (valid: " + valid + ")");
    }
  }
}

int cmd_run(const CommonFlags& f) {
  const ScenarioConfig config = load_scenario(f, nullptr);
  const std::vector<RunResult> results{run(config)};
  write_outputs(f.out, config, results, f.timing == "on");
  return report(results);
}

int cmd_compare(const CommonFlags& f, const std::string& policy_list) {
  std::vector<std::string> policies;
  const ScenarioConfig config = load_scenario(f, &policies);
  if (!policy_list.empty()) policies = split_list(policy_list);
  require_known(policies);
  const std::vector<RunResult> results = run_compare(config, policies);
  write_outputs(f.out, config, results, f.timing == "on");
  return report(results);
}

int cmd_sweep(const CommonFlags& f, const std::string& policy_list, std::size_t jobs) {
  SweepSpec spec = load_sweep(f.config);
  if (!policy_list.empty()) {
    spec.policies = split_list(policy_list);
    require_known(spec.policies);
  }
  if (f.seed) spec.base["seed"] = *f.seed;
  spec.base["checks"] = f.checks == "on";
  const std::vector<SweepRow> rows = run_sweep(spec, jobs);
  std::ofstream csv;
  std::filesystem::path out(f.out);
  if (out.extension() != ".csv") out += ".csv";
  open_or_throw(csv, out.string());
  write_sweep_csv(csv, rows);
  int status = 0;
  for (const SweepRow& r : rows) {
    if (!r.checks_passed) {
      status = kExitChecksFailed;
      std::cerr << "checks failed: " << to_string(r.parameter) << '=' << format_number(r.value)
                << ' ' << r.algorithm << " seed " << r.seed << '\n';
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online min-max resource allocation simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, compare_flags, sweep_flags;
  std::string compare_policies, sweep_policies;
  std::size_t jobs = 1;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the configured algorithm once");
  add_common(run_cmd, run_flags);
  add_timing(run_cmd, run_flags);

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Run several policies on one shared cost stream");
  add_common(compare_cmd, compare_flags);
  add_timing(compare_cmd, compare_flags);
  compare_cmd->add_option("--policies", compare_policies, "Comma-separated policy names");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one scenario parameter");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--policies", sweep_policies, "Comma-separated policy names");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent sweep cells")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*compare_cmd) return cmd_compare(compare_flags, compare_policies);
    return cmd_sweep(sweep_flags, sweep_policies, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
}
