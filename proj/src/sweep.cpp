#include "netrawalm/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <tuple>

#include <json.hpp>

#include "netrawalm/sim_engine.hpp"

namespace netrawalm {

namespace {

ComparisonRow run_one(const Scenario& s, Protocol protocol) {
  Scenario copy = s;
  copy.params.protocol = protocol;
  auto result = run_simulation(copy);
  return ComparisonRow{s.name, s.topology.hosts().size(), s.params.seed, protocol, std::move(result.metrics)};
}

void sort_rows(std::vector<ComparisonRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::tie(a.node_count, a.seed, a.scenario, a.protocol) <
           std::tie(b.node_count, b.seed, b.scenario, b.protocol);
  });
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json metrics_json(const MetricsReport& m) {
  nlohmann::json j;
  j["max_stress"] = m.max_stress;
  j["average_stretch"] = m.degenerate ? nlohmann::json(nullptr) : nlohmann::json(m.average_stretch);
  j["delivered_fraction"] = m.delivered_fraction;
  j["degenerate"] = m.degenerate;
  auto& stretch = j["stretch_per_member"] = nlohmann::json::object();
  for (const auto& [n, v] : m.stretch_per_member) stretch[to_string(n)] = v;
  auto& stress = j["stress_per_link"] = nlohmann::json::object();
  for (const auto& [l, c] : m.stress_per_link) stress[std::to_string(l)] = c;
  return j;
}

}  // namespace

std::vector<ComparisonRow> compare_protocols(std::span<const Scenario> scenarios, std::span<const Protocol> protocols,
                                             Execution exec) {
  const std::size_t total = scenarios.size() * protocols.size();
  std::vector<ComparisonRow> rows(total);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < total; ++i) rows[i] = run_one(scenarios[i / protocols.size()], protocols[i % protocols.size()]);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < total; ++i) {
      try {
        rows[i] = run_one(scenarios[i / protocols.size()], protocols[i % protocols.size()]);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  sort_rows(rows);
  return rows;
}

std::vector<ComparisonRow> run_sweep(const Scenario& base, const SweepConfig& config, Execution exec) {
  std::vector<Scenario> scenarios;
  for (auto count : config.counts) {
    for (std::size_t k = 0; k < config.seeds; ++k) {
      auto gen = config.generator;
      gen.node_count = count;
      scenarios.push_back(generate_scenario(base, gen, config.first_seed + k));
    }
  }
  const Protocol both[] = {Protocol::netrawalm, Protocol::nice};
  return compare_protocols(scenarios, both, exec);
}

std::string rows_to_csv(std::span<const ComparisonRow> rows) {
  std::string out = "scenario,node_count,protocol,avg_stretch,max_stress,delivered_fraction\n";
  for (const auto& r : rows) {
    out += r.scenario + ',' + std::to_string(r.node_count) + ',' + std::string(to_string(r.protocol)) + ',' +
           (r.metrics.degenerate ? std::string("NA") : fixed(r.metrics.average_stretch, 6)) + ',' +
           std::to_string(r.metrics.max_stress) + ',' + fixed(r.metrics.delivered_fraction, 6) + '\n';
  }
  return out;
}

std::string rows_to_json(std::span<const ComparisonRow> rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = metrics_json(r.metrics);
    j["scenario"] = r.scenario;
    j["node_count"] = r.node_count;
    j["seed"] = r.seed;
    j["protocol"] = to_string(r.protocol);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string metrics_to_json(const std::string& scenario, std::size_t node_count, Protocol protocol,
                            const MetricsReport& m) {
  auto j = metrics_json(m);
  j["scenario"] = scenario;
  j["node_count"] = node_count;
  j["protocol"] = to_string(protocol);
  return j.dump(2) + "\n";
}

}  // namespace netrawalm
