#include "dorasim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dorasim {

void RadioParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
  if (!(tx_power_w > 0.0)) throw DomainError("transmit power must be positive");
  if (!(ref_distance_m > 0.0)) throw DomainError("reference distance must be positive");
  if (!(pathloss_exp >= 2.0)) throw DomainError("path-loss exponent must be at least 2");
  if (!std::isfinite(noise_density_dbm_hz) || !std::isfinite(pathloss_const_db)) {
    throw DomainError("radio levels must be finite");
  }
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ArenaConfig::validate() const {
  if (!(side_m > 0.0)) throw DomainError("arena side must be positive");
}

bool ArenaConfig::contains(Position p) const {
  return p.x >= 0.0 && p.x <= side_m && p.y >= 0.0 && p.y <= side_m;
}

ProcessingTrace::ProcessingTrace(std::vector<std::vector<double>> delays_by_round)
    : delays_(std::move(delays_by_round)) {
  for (const auto& row : delays_) {
    if (row.size() != num_agents()) throw DomainError("trace rows have unequal agent counts");
    for (double d : row) {
      if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("trace holds a negative delay");
    }
  }
}

ProcessingTrace ProcessingTrace::parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty processing trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "round,agent,delay_s") {
    throw DomainError("processing trace header must be 'round,agent,delay_s'");
  }
  struct Row {
    long round;
    long agent;
    double delay;
  };
  std::vector<Row> rows;
  long max_round = -1;
  long max_agent = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    Row r{};
    char c1 = 0, c2 = 0;
    if (!(fields >> r.round >> c1 >> r.agent >> c2 >> r.delay) || c1 != ',' || c2 != ',') {
      throw DomainError("malformed trace line " + std::to_string(line_no));
    }
    if (r.round < 0 || r.agent < 0) {
      throw DomainError("negative index on trace line " + std::to_string(line_no));
    }
    if (!(r.delay >= 0.0)) {
      throw DomainError("negative delay on trace line " + std::to_string(line_no));
    }
    max_round = std::max(max_round, r.round);
    max_agent = std::max(max_agent, r.agent);
    rows.push_back(r);
  }
  if (rows.empty()) throw DomainError("processing trace has no rows");
  const auto n_rounds = static_cast<std::size_t>(max_round + 1);
  const auto n_agents = static_cast<std::size_t>(max_agent + 1);
  std::vector<std::vector<double>> delays(n_rounds, std::vector<double>(n_agents, -1.0));
  for (const Row& r : rows) {
    double& cell = delays[static_cast<std::size_t>(r.round)][static_cast<std::size_t>(r.agent)];
    if (cell >= 0.0) throw DomainError("duplicate trace entry for round " + std::to_string(r.round));
    cell = r.delay;
  }
  for (std::size_t t = 0; t < n_rounds; ++t) {
    for (std::size_t a = 0; a < n_agents; ++a) {
      if (delays[t][a] < 0.0) {
        throw DomainError("trace misses round " + std::to_string(t) + " agent " +
                          std::to_string(a));
      }
    }
  }
  return ProcessingTrace(std::move(delays));
}

ProcessingTrace ProcessingTrace::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open processing trace '" + path + "'");
  return parse_csv(in);
}

double ProcessingTrace::at(std::size_t round, std::size_t agent) const {
  if (round >= delays_.size()) {
    throw DomainError("processing trace is shorter than the horizon (round " +
                      std::to_string(round) + ")");
  }
  if (agent >= num_agents()) throw DomainError("trace has no column for this agent");
  return delays_[round][agent];
}

void AgentProfile::validate(const ArenaConfig& arena) const {
  if (!(data_size_bits > 0.0)) throw DomainError("data size must be positive");
  if (!arena.contains(position)) throw DomainError("agent starts outside the arena");
  if (!(velocity_nominal >= 0.0)) throw DomainError("velocity must be non-negative");
  if (const auto* s = std::get_if<StochasticDelay>(&processing)) {
    if (!(s->base_s >= 0.0) || !(s->jitter_s >= 0.0)) {
      throw DomainError("processing delay parameters must be non-negative");
    }
  } else if (!std::get<TraceDelay>(processing).trace) {
    throw DomainError("trace processing source without a trace");
  }
}

double channel_gain(const RadioParams& radio, double distance_m) {
  if (!(distance_m >= radio.ref_distance_m)) {
    throw DomainError("distance below the path-loss reference distance");
  }
  return std::pow(10.0, radio.pathloss_const_db / 10.0) *
         std::pow(radio.ref_distance_m / distance_m, radio.pathloss_exp);
}

double noise_power(const RadioParams& radio) {
  return std::pow(10.0,
                  (radio.noise_density_dbm_hz + 10.0 * std::log10(radio.bandwidth_hz) - 30.0) /
                      10.0);
}

double comm_coefficient(double data_bits, const RadioParams& radio, double gain) {
  const double snr = gain * radio.tx_power_w / noise_power(radio);
  return data_bits / (radio.bandwidth_hz * std::log2(1.0 + snr));
}

double comm_delay(double data_bits, double share, const RadioParams& radio, double gain) {
  if (!(share > 0.0)) throw DomainError("bandwidth share must be positive");
  return comm_coefficient(data_bits, radio, gain) / share;
}

std::vector<CostFunction> make_round_costs(const std::vector<AgentProfile>& profiles,
                                           const std::vector<Position>& positions,
                                           const RadioParams& radio, const ArenaConfig& arena,
                                           const std::vector<double>& processing_delays,
                                           double domain_floor) {
  if (profiles.size() != positions.size() || profiles.size() != processing_delays.size()) {
    throw DomainError("per-agent inputs have mismatched lengths");
  }
  if (!(domain_floor > 0.0 && domain_floor <= 1.0)) {
    throw DomainError("domain floor must lie in (0, 1]");
  }
  std::vector<CostFunction> costs;
  costs.reserve(profiles.size());
  const Position server = arena.server();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    // the path-loss law is only valid beyond the reference distance
    const double d = std::max(distance(positions[i], server), radio.ref_distance_m);
    const double coefficient =
        comm_coefficient(profiles[i].data_size_bits, radio, channel_gain(radio, d));
    const double processing = processing_delays[i];
    const double lipschitz = coefficient / (domain_floor * domain_floor);
    costs.emplace_back([coefficient, processing](double x) { return coefficient / x + processing; },
                       domain_floor, lipschitz);
  }
  return costs;
}

WaypointWalker::WaypointWalker(Position start, double velocity_nominal, const ArenaConfig& arena,
                               std::mt19937_64 rng)
    : position_(start),
      waypoint_(start),
      velocity_nominal_(velocity_nominal),
      arena_(arena),
      rng_(std::move(rng)) {
  if (!(velocity_nominal >= 0.0)) throw DomainError("velocity must be non-negative");
  if (velocity_nominal_ > 0.0) new_leg();
}

void WaypointWalker::new_leg() {
  std::uniform_real_distribution<double> coord(0.0, arena_.side_m);
  std::uniform_real_distribution<double> speed(0.8 * velocity_nominal_, 1.2 * velocity_nominal_);
  waypoint_ = {coord(rng_), coord(rng_)};
  speed_ = speed(rng_);
}

Position WaypointWalker::step(double dt) {
  if (!(dt >= 0.0)) throw DomainError("time step must be non-negative");
  if (velocity_nominal_ == 0.0) return position_;
  double remaining = speed_ * dt;
  // bounded so a degenerate stream cannot spin forever
  for (int legs = 0; remaining > 0.0 && legs < 1000; ++legs) {
    const double to_go = distance(position_, waypoint_);
    if (to_go <= remaining) {
      position_ = waypoint_;
      // the rest of the step is travelled at the new leg's speed
      const double leftover_time = speed_ > 0.0 ? (remaining - to_go) / speed_ : 0.0;
      new_leg();
      remaining = leftover_time * speed_;
    } else {
      const double f = remaining / to_go;
      position_.x += f * (waypoint_.x - position_.x);
      position_.y += f * (waypoint_.y - position_.y);
      remaining = 0.0;
    }
  }
  position_.x = std::clamp(position_.x, 0.0, arena_.side_m);
  position_.y = std::clamp(position_.y, 0.0, arena_.side_m);
  return position_;
}

Position waypoint_step(WaypointWalker& walker, double dt) { return walker.step(dt); }

double processing_delay(const AgentProfile& profile, std::size_t round, std::mt19937_64& rng) {
  if (const auto* s = std::get_if<StochasticDelay>(&profile.processing)) {
    if (s->jitter_s == 0.0) return s->base_s;
    std::normal_distribution<double> normal(0.0, s->jitter_s);
    return s->base_s + std::abs(normal(rng));
  }
  const auto& t = std::get<TraceDelay>(profile.processing);
  return t.trace->at(round, t.column);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace dorasim
