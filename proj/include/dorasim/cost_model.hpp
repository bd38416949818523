#pragma once

// Edge-learning round latency: Shannon-rate upload over an orthogonal share
// of the band, path-loss channel driven by random-waypoint mobility, plus a
// processing delay taken from a trace or a stochastic model.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "dorasim/core.hpp"

namespace dorasim {

/// 0.35 MB with MB = 1e6 bytes.
inline constexpr double kDefaultPayloadBits = 2.8e6;
inline constexpr double kMinMobilityStepSeconds = 0.1;

struct RadioParams {
  double bandwidth_hz = 20e6;
  double tx_power_w = 1.0;
  double noise_density_dbm_hz = -174.0;
  double pathloss_const_db = -40.0;
  double ref_distance_m = 1.0;
  double pathloss_exp = 4.0;

  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);

struct ArenaConfig {
  double side_m = 500.0;

  void validate() const;
  Position server() const { return {0.5 * side_m, 0.5 * side_m}; }
  bool contains(Position p) const;
};

/// Processing delays recorded per (round, agent), rounds counted from 0.
class ProcessingTrace {
 public:
  /// CSV with header `round,agent,delay_s`. Every (round, agent) cell from 0
  /// up to the largest indices present must appear exactly once.
  static ProcessingTrace parse_csv(std::istream& in);
  static ProcessingTrace load_csv(const std::string& path);

  ProcessingTrace(std::vector<std::vector<double>> delays_by_round);

  std::size_t num_rounds() const { return delays_.size(); }
  std::size_t num_agents() const { return delays_.empty() ? 0 : delays_.front().size(); }
  double at(std::size_t round, std::size_t agent) const;

 private:
  std::vector<std::vector<double>> delays_;
};

/// base + |N(0, jitter^2)| seconds.
struct StochasticDelay {
  double base_s = 0.1;
  double jitter_s = 0.0;
};

struct TraceDelay {
  std::shared_ptr<const ProcessingTrace> trace;
  std::size_t column = 0;
};

using ProcessingSource = std::variant<StochasticDelay, TraceDelay>;

struct AgentProfile {
  double data_size_bits = kDefaultPayloadBits;
  Position position;
  double velocity_nominal = 0.0;  // m/s
  ProcessingSource processing = StochasticDelay{};

  void validate(const ArenaConfig& arena) const;
};

/// h0 (D0 / D)^n as a linear power gain.
double channel_gain(const RadioParams& radio, double distance_m);

/// Noise power over the full band, in watts.
double noise_power(const RadioParams& radio);

/// Upload time in seconds for `data_bits` over `share` of the band.
double comm_delay(double data_bits, double share, const RadioParams& radio, double gain);

/// Seconds of upload time at the full band; comm_delay = coefficient / share.
double comm_coefficient(double data_bits, const RadioParams& radio, double gain);

/// Per-agent latency functions share -> comm_delay + processing delay. Each
/// declares its Lipschitz constant on [domain_floor, 1].
std::vector<CostFunction> make_round_costs(const std::vector<AgentProfile>& profiles,
                                           const std::vector<Position>& positions,
                                           const RadioParams& radio, const ArenaConfig& arena,
                                           const std::vector<double>& processing_delays,
                                           double domain_floor = kDefaultDomainFloor);

/// Random-waypoint walker with zero pause time; a fresh speed in
/// [0.8 v, 1.2 v] is drawn for every leg.
class WaypointWalker {
 public:
  WaypointWalker(Position start, double velocity_nominal, const ArenaConfig& arena,
                 std::mt19937_64 rng);

  Position position() const { return position_; }
  Position waypoint() const { return waypoint_; }
  double speed() const { return speed_; }

  /// Advances by dt seconds and returns the new position.
  Position step(double dt);

 private:
  void new_leg();

  Position position_;
  Position waypoint_;
  double velocity_nominal_;
  double speed_ = 0.0;
  ArenaConfig arena_;
  std::mt19937_64 rng_;
};

/// Single-step form over an explicit walker.
Position waypoint_step(WaypointWalker& walker, double dt);

/// Processing delay for `round` (counted from 0). Throws when a trace is
/// exhausted.
double processing_delay(const AgentProfile& profile, std::size_t round, std::mt19937_64& rng);

/// Independent stream for (seed, purpose, index); streams never overlap in
/// practice and do not depend on generation order.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

enum class StreamPurpose : std::uint64_t {
  kPlacement = 1,
  kMobility = 2,
  kProcessing = 3,
  kPolicy = 4,
};

}  // namespace dorasim
