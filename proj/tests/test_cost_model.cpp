#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dorasim/cost_model.hpp"

using namespace dorasim;

TEST_CASE("channel gain") {
  RadioParams r;
  CHECK(channel_gain(r, 1.0) == doctest::Approx(1e-4));
  CHECK(channel_gain(r, 10.0) == doctest::Approx(1e-8));
  CHECK_THROWS_AS(channel_gain(r, 0.5), DomainError);
  double prev = channel_gain(r, 1.0);
  for (double d = 1.5; d < 800.0; d += 0.5) {
    const double g = channel_gain(r, d);
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("noise power") {
  RadioParams r;
  CHECK(noise_power(r) == doctest::Approx(7.96e-14).epsilon(1e-3));
  r.bandwidth_hz = 1.0;
  CHECK(noise_power(r) == doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  RadioParams a;
  RadioParams b;
  b.bandwidth_hz = 2.0 * a.bandwidth_hz;
  CHECK(noise_power(b) == doctest::Approx(2.0 * noise_power(a)).epsilon(1e-12));
}

TEST_CASE("communication delay") {
  RadioParams r;
  // gain for which log2(1 + snr) = 10
  const double gain = 1023.0 * noise_power(r) / r.tx_power_w;
  CHECK(comm_delay(2.8e6, 0.2, r, gain) == doctest::Approx(0.07).epsilon(1e-9));
  CHECK(comm_delay(2.8e6, 0.4, r, gain) ==
        doctest::Approx(0.5 * comm_delay(2.8e6, 0.2, r, gain)).epsilon(1e-12));
  CHECK_THROWS_AS(comm_delay(2.8e6, 0.0, r, gain), DomainError);
  CHECK_THROWS_AS(comm_delay(2.8e6, -0.1, r, gain), DomainError);
  CHECK(kDefaultPayloadBits == 0.35e6 * 8);
}

TEST_CASE("communication delay identity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RadioParams r;
  for (int k = 0; k < 500; ++k) {
    const double d = 1e5 + 1e7 * u(rng);
    const double share = 1e-3 + u(rng);
    const double gain = channel_gain(r, 1.0 + 400.0 * u(rng));
    const double snr = gain * r.tx_power_w / noise_power(r);
    const double back = comm_delay(d, share, r, gain) * share * r.bandwidth_hz * std::log2(1 + snr);
    CHECK(back == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("radio validation") {
  RadioParams r;
  CHECK_NOTHROW(r.validate());
  r.pathloss_exp = 1.5;
  CHECK_THROWS_AS(r.validate(), DomainError);
  r = RadioParams{};
  r.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(r.validate(), DomainError);
  r = RadioParams{};
  r.ref_distance_m = 0.0;
  CHECK_THROWS_AS(r.validate(), DomainError);
}

TEST_CASE("round costs") {
  RadioParams r;
  ArenaConfig arena;
  std::vector<AgentProfile> profiles(3);
  std::vector<Position> pos = {{100.0, 250.0}, {250.0, 250.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < 3; ++i) profiles[i].position = pos[i];
  const std::vector<double> processing = {0.0, 0.1, 0.3};
  const auto costs = make_round_costs(profiles, pos, r, arena, processing);
  REQUIRE(costs.size() == 3);

  // zero processing: pure communication delay
  const double g0 = channel_gain(r, 150.0);
  CHECK(costs[0](0.3) == doctest::Approx(comm_delay(kDefaultPayloadBits, 0.3, r, g0)));
  // endpoint at the full band
  const double g2 = channel_gain(r, std::hypot(250.0, 250.0));
  CHECK(costs[2](1.0) == doctest::Approx(comm_delay(kDefaultPayloadBits, 1.0, r, g2) + 0.3));
  // agent on top of the server is evaluated at the reference distance
  const double g1 = channel_gain(r, 1.0);
  CHECK(costs[1](1.0) == doctest::Approx(comm_delay(kDefaultPayloadBits, 1.0, r, g1) + 0.1));

  CHECK_THROWS_AS(make_round_costs(profiles, pos, r, arena, {0.0}), DomainError);
  CHECK_THROWS_AS(make_round_costs(profiles, pos, r, arena, processing, 0.0), DomainError);
}

TEST_CASE("round costs are monotone and respect their Lipschitz bound") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RadioParams r;
  ArenaConfig arena;
  for (int k = 0; k < 50; ++k) {
    AgentProfile p;
    p.position = {500.0 * u(rng), 500.0 * u(rng)};
    p.data_size_bits = 1e5 + 5e6 * u(rng);
    const double floor = 1e-3;
    const auto costs = make_round_costs({p}, {p.position}, r, arena, {u(rng)}, floor);
    const CostFunction& f = costs[0];
    REQUIRE(f.lipschitz_bound());
    const double l = *f.lipschitz_bound();
    double prev = f(floor);
    double prev_x = floor;
    for (int i = 1; i <= 1000; ++i) {
      const double x = floor + (1.0 - floor) * i / 1000.0;
      const double y = f(x);
      CHECK(y <= prev);
      CHECK(std::abs(prev - y) <= l * (x - prev_x) * (1.0 + 1e-12));
      prev = y;
      prev_x = x;
    }
  }
}

TEST_CASE("static walker never moves") {
  ArenaConfig arena;
  WaypointWalker w({10.0, 20.0}, 0.0, arena, make_stream(1, 2, 0));
  for (int t = 0; t < 100; ++t) CHECK(waypoint_step(w, 1.0) == Position{10.0, 20.0});
}

TEST_CASE("walker speeds and positions") {
  ArenaConfig arena;
  const double v = 5.0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    WaypointWalker w({250.0, 250.0}, v, arena, make_stream(9, 2, k));
    CHECK(w.speed() >= 0.8 * v);
    CHECK(w.speed() <= 1.2 * v);
  }
  WaypointWalker w({0.0, 500.0}, 10.0, arena, make_stream(9, 2, 0));
  for (int t = 0; t < 5000; ++t) {
    const Position p = w.step(3.7);
    CHECK(arena.contains(p));
    CHECK(w.speed() >= 8.0);
    CHECK(w.speed() <= 12.0);
  }
  CHECK_THROWS_AS(w.step(-1.0), DomainError);
}

TEST_CASE("walker travels speed times dt within a leg") {
  ArenaConfig arena;
  WaypointWalker w({250.0, 250.0}, 5.0, arena, make_stream(4, 2, 0));
  const Position start = w.position();
  const double to_go = distance(start, w.waypoint());
  const double dt = 0.5 * to_go / w.speed();
  const Position p = w.step(dt);
  CHECK(distance(start, p) == doctest::Approx(w.speed() * dt).epsilon(1e-9));
}

TEST_CASE("processing delay from a stochastic model") {
  AgentProfile p;
  p.processing = StochasticDelay{0.15, 0.0};
  std::mt19937_64 rng(1);
  for (std::size_t t = 0; t < 10; ++t) CHECK(processing_delay(p, t, rng) == 0.15);

  p.processing = StochasticDelay{0.1, 0.05};
  double mean = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const double d = processing_delay(p, t, rng);
    CHECK(d >= 0.1);
    mean += d / n;
  }
  const double expected = 0.1 + 0.05 * std::sqrt(2.0 / std::numbers::pi);
  CHECK(mean == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("processing trace lookup") {
  std::istringstream in("round,agent,delay_s\n0,0,0.1\n1,0,0.2\n");
  auto trace = std::make_shared<const ProcessingTrace>(ProcessingTrace::parse_csv(in));
  CHECK(trace->num_rounds() == 2);
  CHECK(trace->num_agents() == 1);
  AgentProfile p;
  p.processing = TraceDelay{trace, 0};
  std::mt19937_64 rng(1);
  CHECK(processing_delay(p, 1, rng) == 0.2);
  CHECK(processing_delay(p, 0, rng) == 0.1);
  CHECK_THROWS_AS(processing_delay(p, 2, rng), DomainError);
}

TEST_CASE("processing trace errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ProcessingTrace::parse_csv(in);
  };
  CHECK_THROWS_AS(parse(""), DomainError);
  CHECK_THROWS_AS(parse("t,a,d\n0,0,0.1\n"), DomainError);
  CHECK_THROWS_AS(parse("round,agent,delay_s\n"), DomainError);
  CHECK_THROWS_AS(parse("round,agent,delay_s\n0,0,-0.1\n"), DomainError);
  CHECK_THROWS_AS(parse("round,agent,delay_s\n0,0,0.1\n0,0,0.2\n"), DomainError);
  CHECK_THROWS_AS(parse("round,agent,delay_s\n0,0,0.1\n1,1,0.2\n"), DomainError);
  CHECK_THROWS_AS(parse("round,agent,delay_s\n0;0;0.1\n"), DomainError);
  CHECK_NOTHROW(parse("round,agent,delay_s\r\n1,0,0.2\r\n0,0,0.1\r\n"));
  CHECK_THROWS_AS(ProcessingTrace::load_csv("/nonexistent/trace.csv"), DomainError);
}

TEST_CASE("agent profile validation") {
  ArenaConfig arena;
  AgentProfile p;
  p.position = {10.0, 10.0};
  CHECK_NOTHROW(p.validate(arena));
  p.position = {600.0, 10.0};
  CHECK_THROWS_AS(p.validate(arena), DomainError);
  p.position = {10.0, 10.0};
  p.data_size_bits = 0.0;
  CHECK_THROWS_AS(p.validate(arena), DomainError);
  p.data_size_bits = 1.0;
  p.processing = TraceDelay{};
  CHECK_THROWS_AS(p.validate(arena), DomainError);
}

TEST_CASE("seeded streams are reproducible and distinct") {
  auto a = make_stream(7, 1, 0);
  auto b = make_stream(7, 1, 0);
  auto c = make_stream(7, 1, 1);
  auto d = make_stream(7, 2, 0);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}
