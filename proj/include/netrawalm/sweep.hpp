#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/metrics.hpp"
#include "netrawalm/scenario.hpp"
#include "netrawalm/scenario_gen.hpp"

namespace netrawalm {

struct ComparisonRow {
  std::string scenario;
  std::size_t node_count = 0;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::netrawalm;
  MetricsReport metrics;

  bool operator==(const ComparisonRow&) const = default;
};

/// Runs every scenario under every protocol. Rows are sorted by
/// (node_count, seed, scenario, protocol) whatever the execution mode.
std::vector<ComparisonRow> compare_protocols(std::span<const Scenario> scenarios, std::span<const Protocol> protocols,
                                             Execution exec = Execution::parallel);

struct SweepConfig {
  std::vector<std::size_t> counts;
  std::size_t seeds = 10;
  std::uint64_t first_seed = 1;
  GeneratorConfig generator;
};

/// One generated scenario per (count, seed), each compared across both protocols.
std::vector<ComparisonRow> run_sweep(const Scenario& base, const SweepConfig& config,
                                     Execution exec = Execution::parallel);

/// `scenario,node_count,protocol,avg_stretch,max_stress,delivered_fraction`;
/// degenerate rows carry NA for stretch.
std::string rows_to_csv(std::span<const ComparisonRow> rows);
std::string rows_to_json(std::span<const ComparisonRow> rows);
std::string metrics_to_json(const std::string& scenario, std::size_t node_count, Protocol protocol,
                            const MetricsReport& m);

}  // namespace netrawalm
