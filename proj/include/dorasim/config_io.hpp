#pragma once

// Scenario and sweep files (JSON with a schema version, unknown keys
// rejected) and the run/sweep output writers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dorasim/scenario.hpp"
#include "dorasim/simulation.hpp"

#include "json.hpp"

namespace dorasim {

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed or invalid configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigFile {
  ScenarioConfig scenario;
  std::vector<std::string> policies;  // optional default list for compare
};

/// Throws ConfigError on unknown keys, wrong types, a missing or unsupported
/// schema_version, or values rejected by ScenarioConfig::validate.
ConfigFile parse_config(const nlohmann::json& doc);
ConfigFile load_config(const std::string& path);

nlohmann::json to_json(const ScenarioConfig& config);

enum class SweepParameter { kBandwidthTotal, kVelocityNominal, kNumAgents };

std::string_view to_string(SweepParameter p);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kVelocityNominal;
  std::vector<double> values;
  /// Partial scenario objects merged into the base for the matching value.
  std::vector<nlohmann::json> overrides;
  std::size_t repetitions = 1;
  std::vector<std::string> policies;
  nlohmann::json base;  // scenario object without schema_version

  /// Scenario for one sweep cell; repetition r uses seed base.seed + r.
  ScenarioConfig cell_config(std::size_t value_index, std::size_t repetition) const;
};

SweepSpec parse_sweep(const nlohmann::json& doc);
SweepSpec load_sweep(const std::string& path);

struct SweepRow {
  SweepParameter parameter;
  double value;
  std::string algorithm;
  std::uint64_t seed;
  double avg_regret;
  double total_policy_time_s;
  bool checks_passed;
};

/// Runs every cell (value x repetition) with all policies on a shared stream.
/// Cells run on up to `jobs` threads; rows come back in cell order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs);

/// Shortest round-trip decimal, independent of the global locale.
std::string format_number(double v);

void write_run_csv(std::ostream& out, std::span<const RunResult> results, bool include_timing);
void write_run_json(std::ostream& out, const ScenarioConfig& config,
                    std::span<const RunResult> results, bool include_timing);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace dorasim
