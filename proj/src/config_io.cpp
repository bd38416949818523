#include "dorasim/config_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace dorasim {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <typename T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + item.key() + "' in " + where_);
      }
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

void read_count(ObjectReader& r, const char* key, std::size_t& out) {
  double v = static_cast<double>(out);
  r.optional(key, v);
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw ConfigError(std::string(key) + " must be a non-negative integer");
  }
  out = static_cast<std::size_t>(v);
}

void read_scenario_fields(ObjectReader& r, ScenarioConfig& c, std::vector<std::string>& policies) {
  read_count(r, "num_agents", c.num_agents);
  read_count(r, "horizon", c.horizon);
  r.optional("step_size", c.step_size);
  r.optional("algorithm", c.algorithm);
  r.optional("policies", policies);
  r.optional("seed", c.seed);
  r.optional("bisection_tol", c.bisection_tol);
  r.optional("domain_floor", c.domain_floor);
  r.optional("fkm_delta", c.fkm_delta);
  r.optional("checks", c.checks);
  if (r.child("omd_divergence_weight")) {
    double w = 0.0;
    r.optional("omd_divergence_weight", w);
    c.omd_divergence_weight = w;
  }

  if (const json* radio = r.child("radio")) {
    ObjectReader rr(*radio, "radio");
    rr.optional("bandwidth_hz", c.radio.bandwidth_hz);
    rr.optional("tx_power_w", c.radio.tx_power_w);
    rr.optional("noise_density_dbm_hz", c.radio.noise_density_dbm_hz);
    rr.optional("pathloss_const_db", c.radio.pathloss_const_db);
    rr.optional("ref_distance_m", c.radio.ref_distance_m);
    rr.optional("pathloss_exp", c.radio.pathloss_exp);
    rr.finish();
  }
  if (const json* arena = r.child("arena")) {
    ObjectReader ar(*arena, "arena");
    ar.optional("side_m", c.arena.side_m);
    ar.finish();
  }
  if (const json* defaults = r.child("agent_defaults")) {
    ObjectReader dr(*defaults, "agent_defaults");
    AgentDefaults& d = c.agent_defaults;
    dr.optional("data_size_bits", d.data_size_bits);
    dr.optional("velocity_mps", d.velocity_nominal);
    dr.optional("processing_base_min_s", d.processing_base_min_s);
    dr.optional("processing_base_max_s", d.processing_base_max_s);
    dr.optional("processing_jitter_s", d.processing_jitter_s);
    dr.finish();
  }
  if (const json* agents = r.child("agents")) {
    if (!agents->is_array()) throw ConfigError("agents must be an array");
    c.agents.clear();
    for (std::size_t i = 0; i < agents->size(); ++i) {
      ObjectReader ar((*agents)[i], "agents[" + std::to_string(i) + "]");
      AgentProfile a;
      StochasticDelay delay{0.1, 0.0};
      ar.optional("x", a.position.x);
      ar.optional("y", a.position.y);
      ar.optional("data_size_bits", a.data_size_bits);
      ar.optional("velocity_mps", a.velocity_nominal);
      ar.optional("processing_base_s", delay.base_s);
      ar.optional("processing_jitter_s", delay.jitter_s);
      ar.finish();
      a.processing = delay;
      c.agents.push_back(a);
    }
    if (!r.has("num_agents")) c.num_agents = c.agents.size();
  }
  std::string trace;
  r.optional("processing_trace", trace);
  if (!trace.empty()) c.trace_path = trace;
  if (r.child("initial_allocation")) {
    std::vector<double> init;
    r.optional("initial_allocation", init);
    c.initial_allocation = init;
  }
}

ConfigFile parse_scenario_object(const json& obj, const std::string& where) {
  ConfigFile out;
  ObjectReader r(obj, where);
  read_scenario_fields(r, out.scenario, out.policies);
  r.finish();
  for (const std::string& p : out.policies) {
    if (!is_policy_name(p)) throw ConfigError("unknown policy '" + p + "' in " + where);
  }
  if (!is_policy_name(out.scenario.algorithm)) {
    throw ConfigError("unknown algorithm '" + out.scenario.algorithm + "'");
  }
  try {
    out.scenario.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return out;
}

void check_schema(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  const auto it = doc.find("schema_version");
  if (it == doc.end()) throw ConfigError("missing schema_version");
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) +
                      ")");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

json without_schema(json doc) {
  doc.erase("schema_version");
  return doc;
}

}  // namespace

ConfigFile parse_config(const json& doc) {
  check_schema(doc);
  return parse_scenario_object(without_schema(doc), "config");
}

ConfigFile load_config(const std::string& path) {
  ConfigFile file = parse_config(read_json_file(path));
  // relative trace paths are read next to the config file
  if (file.scenario.trace_path) {
    const std::filesystem::path trace(*file.scenario.trace_path);
    if (trace.is_relative()) {
      file.scenario.trace_path = (std::filesystem::path(path).parent_path() / trace).string();
    }
  }
  return file;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["num_agents"] = c.num_agents;
  j["horizon"] = c.horizon;
  j["step_size"] = c.step_size;
  j["algorithm"] = c.algorithm;
  j["seed"] = c.seed;
  j["bisection_tol"] = c.bisection_tol;
  j["domain_floor"] = c.domain_floor;
  j["fkm_delta"] = c.fkm_delta;
  j["checks"] = c.checks;
  if (c.omd_divergence_weight) j["omd_divergence_weight"] = *c.omd_divergence_weight;
  j["radio"] = {{"bandwidth_hz", c.radio.bandwidth_hz},
                {"tx_power_w", c.radio.tx_power_w},
                {"noise_density_dbm_hz", c.radio.noise_density_dbm_hz},
                {"pathloss_const_db", c.radio.pathloss_const_db},
                {"ref_distance_m", c.radio.ref_distance_m},
                {"pathloss_exp", c.radio.pathloss_exp}};
  j["arena"] = {{"side_m", c.arena.side_m}};
  const AgentDefaults& d = c.agent_defaults;
  j["agent_defaults"] = {{"data_size_bits", d.data_size_bits},
                         {"velocity_mps", d.velocity_nominal},
                         {"processing_base_min_s", d.processing_base_min_s},
                         {"processing_base_max_s", d.processing_base_max_s},
                         {"processing_jitter_s", d.processing_jitter_s}};
  if (!c.agents.empty()) {
    json agents = json::array();
    for (const AgentProfile& a : c.agents) {
      json aj = {{"x", a.position.x},
                 {"y", a.position.y},
                 {"data_size_bits", a.data_size_bits},
                 {"velocity_mps", a.velocity_nominal}};
      if (const auto* s = std::get_if<StochasticDelay>(&a.processing)) {
        aj["processing_base_s"] = s->base_s;
        aj["processing_jitter_s"] = s->jitter_s;
      }
      agents.push_back(aj);
    }
    j["agents"] = agents;
  }
  if (c.trace_path) j["processing_trace"] = *c.trace_path;
  if (c.initial_allocation) j["initial_allocation"] = *c.initial_allocation;
  return j;
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kBandwidthTotal:
      return "bandwidth_total";
    case SweepParameter::kVelocityNominal:
      return "velocity_nominal";
    case SweepParameter::kNumAgents:
      return "num_agents";
  }
  return "unknown";
}

ScenarioConfig SweepSpec::cell_config(std::size_t value_index, std::size_t repetition) const {
  json merged = base;
  if (value_index < overrides.size() && !overrides[value_index].is_null()) {
    merged.merge_patch(overrides[value_index]);
  }
  ConfigFile parsed = parse_scenario_object(merged, "sweep cell");
  ScenarioConfig c = parsed.scenario;
  const double v = values.at(value_index);
  switch (parameter) {
    case SweepParameter::kBandwidthTotal:
      c.radio.bandwidth_hz = v;
      break;
    case SweepParameter::kVelocityNominal:
      c.agent_defaults.velocity_nominal = v;
      for (AgentProfile& a : c.agents) a.velocity_nominal = v;
      break;
    case SweepParameter::kNumAgents:
      if (!c.agents.empty()) throw ConfigError("num_agents sweeps need generated agents");
      c.num_agents = static_cast<std::size_t>(v);
      c.initial_allocation.reset();
      break;
  }
  c.seed = c.seed + repetition;
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid sweep cell: ") + e.what());
  }
  return c;
}

SweepSpec parse_sweep(const json& doc) {
  check_schema(doc);
  const json body = without_schema(doc);
  ObjectReader r(body, "sweep");
  SweepSpec spec;
  std::string param;
  r.optional("parameter", param);
  if (param == "bandwidth_total") {
    spec.parameter = SweepParameter::kBandwidthTotal;
  } else if (param == "velocity_nominal") {
    spec.parameter = SweepParameter::kVelocityNominal;
  } else if (param == "num_agents") {
    spec.parameter = SweepParameter::kNumAgents;
  } else {
    throw ConfigError("sweep parameter must be bandwidth_total, velocity_nominal or num_agents");
  }
  r.optional("values", spec.values);
  if (spec.values.empty()) throw ConfigError("sweep needs a non-empty value list");
  if (spec.parameter == SweepParameter::kNumAgents) {
    for (double v : spec.values) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("agent counts must be integers >= 1");
    }
  }
  read_count(r, "repetitions", spec.repetitions);
  if (spec.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  r.optional("policies", spec.policies);
  if (spec.policies.empty()) throw ConfigError("sweep needs at least one policy");
  for (const std::string& p : spec.policies) {
    if (!is_policy_name(p)) throw ConfigError("unknown policy '" + p + "' in sweep");
  }
  if (const json* overrides = r.child("overrides")) {
    if (!overrides->is_array() || overrides->size() != spec.values.size()) {
      throw ConfigError("overrides must be an array with one entry per value");
    }
    for (const json& o : *overrides) {
      if (!o.is_object() && !o.is_null()) throw ConfigError("each override must be an object");
      spec.overrides.push_back(o);
    }
  }
  const json* base = r.child("base");
  spec.base = base ? *base : json::object();
  r.finish();
  if (spec.base.contains("schema_version")) spec.base.erase("schema_version");
  // surface bad base keys now rather than inside a worker thread
  for (std::size_t i = 0; i < spec.values.size(); ++i) spec.cell_config(i, 0);
  return spec;
}

SweepSpec load_sweep(const std::string& path) { return parse_sweep(read_json_file(path)); }

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs) {
  const std::size_t cells = spec.values.size() * spec.repetitions;
  std::vector<std::vector<SweepRow>> per_cell(cells);
  std::vector<std::exception_ptr> errors(cells);

  auto run_cell = [&](std::size_t cell) {
    try {
      const std::size_t vi = cell / spec.repetitions;
      const std::size_t rep = cell % spec.repetitions;
      const ScenarioConfig config = spec.cell_config(vi, rep);
      for (const RunResult& r : run_compare(config, spec.policies)) {
        per_cell[cell].push_back(SweepRow{spec.parameter, spec.values[vi], r.algorithm,
                                          config.seed, r.summary.tail_average_regret,
                                          r.summary.total_policy_time_s, r.checks.passed()});
      }
    } catch (...) {
      errors[cell] = std::current_exception();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, cells));
  if (jobs == 1) {
    for (std::size_t c = 0; c < cells; ++c) run_cell(c);
  } else {
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::thread> workers;
    for (std::size_t j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t cell;
          {
            std::lock_guard lock(m);
            if (next >= cells) return;
            cell = next++;
          }
          run_cell(cell);
        }
      });
    }
    for (std::thread& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SweepRow> rows;
  for (auto& cell_rows : per_cell) {
    for (auto& row : cell_rows) rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_run_csv(std::ostream& out, std::span<const RunResult> results, bool include_timing) {
  std::size_t n = 0;
  for (const RunResult& r : results) {
    if (!r.records.empty()) n = std::max(n, r.records.front().allocation.size());
  }
  out << "t,algorithm,global_cost,oracle_cost,regret_cum,path_length_cum,straggler,policy_time_s";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  for (const RunResult& r : results) {
    for (const RoundRecord& rec : r.records) {
      out << rec.round << ',' << r.algorithm << ',' << format_number(rec.global_cost) << ','
          << format_number(rec.oracle_cost) << ',' << format_number(rec.cumulative_regret) << ','
          << format_number(rec.cumulative_path_length) << ',' << rec.straggler << ','
          << format_number(include_timing ? rec.policy_time_s : 0.0);
      for (double x : rec.allocation.shares()) out << ',' << format_number(x);
      out << '\n';
    }
  }
}

void write_run_json(std::ostream& out, const ScenarioConfig& config,
                    std::span<const RunResult> results, bool include_timing) {
  json doc;
  doc["config"] = to_json(config);
  json runs = json::array();
  for (const RunResult& r : results) {
    json run;
    run["algorithm"] = r.algorithm;
    const RunSummary& s = r.summary;
    run["summary"] = {{"final_regret", s.final_regret},
                      {"tail_average_regret", s.tail_average_regret},
                      {"tail_window", s.tail_window},
                      {"total_policy_time_s", include_timing ? s.total_policy_time_s : 0.0},
                      {"path_length", s.path_length},
                      {"lipschitz", s.lipschitz},
                      {"regret_bound", s.regret_bound},
                      {"effective_lipschitz", s.effective_lipschitz},
                      {"regret_bound_effective", s.regret_bound_effective}};
    const CheckReport& c = r.checks;
    run["checks"] = {{"enabled", c.enabled},
                     {"passed", c.passed()},
                     {"feasibility_violations", c.feasibility_violations},
                     {"budget_equality_violations", c.budget_equality_violations},
                     {"lemma2_violations", c.lemma2_violations},
                     {"lemma3_violations", c.lemma3_violations},
                     {"theorem_holds", c.theorem_holds},
                     {"messages", c.messages}};
    json records = json::array();
    for (const RoundRecord& rec : r.records) {
      records.push_back({{"t", rec.round},
                         {"allocation", rec.allocation.vector()},
                         {"costs", rec.costs},
                         {"global_cost", rec.global_cost},
                         {"straggler", rec.straggler},
                         {"oracle_allocation", rec.oracle_allocation.vector()},
                         {"oracle_cost", rec.oracle_cost},
                         {"regret", rec.instantaneous_regret},
                         {"regret_cum", rec.cumulative_regret},
                         {"path_length_increment", rec.path_length_increment},
                         {"policy_time_s", include_timing ? rec.policy_time_s : 0.0}});
    }
    run["records"] = std::move(records);
    runs.push_back(std::move(run));
  }
  doc["runs"] = std::move(runs);
  out << doc.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "param,value,algorithm,seed,avg_regret,total_policy_time_s\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.parameter) << ',' << format_number(r.value) << ',' << r.algorithm << ','
        << r.seed << ',' << format_number(r.avg_regret) << ','
        << format_number(r.total_policy_time_s) << '\n';
  }
}

}  // namespace dorasim
