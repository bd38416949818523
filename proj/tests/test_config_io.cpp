#include <clocale>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dorasim/config_io.hpp"

using namespace dorasim;
using nlohmann::json;

namespace {

json minimal() { return json{{"schema_version", 1}, {"num_agents", 3}, {"horizon", 20}}; }

json sweep_doc() {
  return json{{"schema_version", 1},
              {"parameter", "velocity_nominal"},
              {"values", {0.0, 5.0}},
              {"repetitions", 2},
              {"policies", {"dora", "equal"}},
              {"base", {{"num_agents", 3}, {"horizon", 15}, {"seed", 10}}}};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("minimal config") {
  const ConfigFile f = parse_config(minimal());
  CHECK(f.scenario.num_agents == 3);
  CHECK(f.scenario.horizon == 20);
  CHECK(f.scenario.algorithm == "dora");
  CHECK(f.policies.empty());
}

TEST_CASE("schema version") {
  json doc = minimal();
  doc.erase("schema_version");
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc["schema_version"] = "1";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  json doc = minimal();
  doc["horizn"] = 5;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["radio"] = {{"bandwith_hz", 1e6}};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["agents"] = json::array({{{"x", 1.0}, {"y", 1.0}, {"speed", 2.0}}});
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("wrong types and invalid values") {
  json doc = minimal();
  doc["horizon"] = "twenty";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["horizon"] = 0;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["step_size"] = 1.5;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["algorithm"] = "sgd";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["omd_divergence_weight"] = 0.0;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = minimal();
  doc["initial_allocation"] = {0.5, 0.6, 0.1};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("explicit agents set the count") {
  json doc = minimal();
  doc.erase("num_agents");
  doc["agents"] = json::array({{{"x", 10.0}, {"y", 20.0}}, {{"x", 30.0}, {"y", 40.0}}});
  const ConfigFile f = parse_config(doc);
  CHECK(f.scenario.num_agents == 2);
  REQUIRE(f.scenario.agents.size() == 2);
  CHECK(f.scenario.agents[1].position.x == 30.0);

  doc["num_agents"] = 3;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("to_json round trip") {
  json doc = minimal();
  doc["step_size"] = 0.1;
  doc["seed"] = 42;
  doc["omd_divergence_weight"] = 0.3;
  doc["radio"] = {{"bandwidth_hz", 2e6}};
  doc["agents"] = json::array(
      {{{"x", 1.0}, {"y", 2.0}, {"processing_base_s", 0.1}, {"processing_jitter_s", 0.01}},
       {{"x", 3.0}, {"y", 4.0}},
       {{"x", 5.0}, {"y", 6.0}, {"velocity_mps", 2.0}}});
  doc["initial_allocation"] = {0.2, 0.3, 0.5};
  const ScenarioConfig a = parse_config(doc).scenario;
  const json out = to_json(a);
  const ScenarioConfig b = parse_config(out).scenario;
  CHECK(to_json(b) == out);
  CHECK(b.seed == 42);
  CHECK(b.radio.bandwidth_hz == 2e6);
  CHECK(*b.omd_divergence_weight == 0.3);
  CHECK(*b.initial_allocation == std::vector<double>{0.2, 0.3, 0.5});
}

TEST_CASE("sweep parsing") {
  const SweepSpec s = parse_sweep(sweep_doc());
  CHECK(s.parameter == SweepParameter::kVelocityNominal);
  CHECK(s.values.size() == 2);
  CHECK(s.repetitions == 2);

  json d = sweep_doc();
  d["parameter"] = "height";
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["values"] = json::array();
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["overrides"] = json::array({json::object()});
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["policies"] = {"dora", "adam"};
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["repetitions"] = 0;
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["base"]["horizn"] = 3;
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
  d = sweep_doc();
  d["parameter"] = "num_agents";
  d["values"] = {2.0, 2.5};
  CHECK_THROWS_AS(parse_sweep(d), ConfigError);
}

TEST_CASE("sweep cells") {
  json d = sweep_doc();
  d["overrides"] = json::array({json{{"step_size", 0.1}}, nullptr});
  const SweepSpec s = parse_sweep(d);
  const ScenarioConfig c0 = s.cell_config(0, 0);
  const ScenarioConfig c1 = s.cell_config(1, 1);
  CHECK(c0.seed == 10);
  CHECK(c1.seed == 11);
  CHECK(c0.step_size == 0.1);
  CHECK(c1.step_size == 0.02);
  CHECK(c0.agent_defaults.velocity_nominal == 0.0);
  CHECK(c1.agent_defaults.velocity_nominal == 5.0);

  json n = sweep_doc();
  n["parameter"] = "num_agents";
  n["values"] = {2.0, 7.0};
  const SweepSpec sn = parse_sweep(n);
  CHECK(sn.cell_config(1, 0).num_agents == 7);

  json b = sweep_doc();
  b["parameter"] = "bandwidth_total";
  b["values"] = {5e6};
  const SweepSpec sb = parse_sweep(b);
  CHECK(sb.cell_config(0, 0).radio.bandwidth_hz == 5e6);
}

TEST_CASE("run_sweep rows come back in cell order") {
  const SweepSpec s = parse_sweep(sweep_doc());
  const std::vector<SweepRow> serial = run_sweep(s, 1);
  const std::vector<SweepRow> parallel = run_sweep(s, 4);
  REQUIRE(serial.size() == 2 * 2 * 2);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parallel[i].value == serial[i].value);
    CHECK(parallel[i].algorithm == serial[i].algorithm);
    CHECK(parallel[i].seed == serial[i].seed);
    CHECK(parallel[i].avg_regret == serial[i].avg_regret);
  }
  CHECK(serial[0].value == 0.0);
  CHECK(serial[0].algorithm == "dora");
  CHECK(serial[1].algorithm == "equal");
  CHECK(serial[2].seed == 11);
  CHECK(serial[7].value == 5.0);

  std::ostringstream out;
  write_sweep_csv(out, serial);
  CHECK(out.str().rfind("param,value,algorithm,seed,avg_regret,total_policy_time_s\n", 0) == 0);
  CHECK(count_lines(out.str()) == serial.size() + 1);
}

TEST_CASE("format_number") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1e-20) == "1e-20");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_number(v)) == v);
  // a comma-decimal locale must not leak into the output
  if (std::setlocale(LC_ALL, "de_DE.UTF-8") != nullptr) {
    CHECK(format_number(1.5) == "1.5");
    std::setlocale(LC_ALL, "C");
  }
}

TEST_CASE("run csv layout") {
  json doc = minimal();
  doc["horizon"] = 12;
  const ScenarioConfig c = parse_config(doc).scenario;
  const std::vector<std::string> policies = {"dora", "equal"};
  const std::vector<RunResult> results = run_compare(c, policies);
  std::ostringstream out;
  write_run_csv(out, results, false);
  const std::string text = out.str();
  CHECK(text.rfind("t,algorithm,global_cost,oracle_cost,regret_cum,path_length_cum,straggler,"
                   "policy_time_s,x_0,x_1,x_2\n",
                   0) == 0);
  CHECK(count_lines(text) == 1 + 2 * 12);

  std::ostringstream again;
  write_run_csv(again, run_compare(c, policies), false);
  CHECK(again.str() == text);

  std::ostringstream js;
  write_run_json(js, c, results, false);
  const json parsed = json::parse(js.str());
  CHECK(parsed["runs"].size() == 2);
  CHECK(parsed["runs"][0]["records"].size() == 12);
  CHECK(parsed["config"]["num_agents"] == 3);
}
