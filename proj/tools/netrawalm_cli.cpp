// Command-line front end: run, sweep and validate scenarios.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netrawalm/sim_engine.hpp"
#include "netrawalm/sweep.hpp"

namespace fs = std::filesystem;
using namespace netrawalm;

namespace {

constexpr int kOk = 0;
constexpr int kScenarioError = 1;
constexpr int kRuntimeError = 2;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void report(const ScenarioError& e) {
  for (const auto& d : e.diagnostics()) std::cerr << "error: line " << d.line << ": " << d.message << '\n';
}

int cmd_run(const std::string& name, const std::optional<std::string>& protocol, const std::optional<std::uint64_t>& seed,
            const fs::path& out_dir) {
  Scenario s = load_scenario(resolve_scenario_path(name));
  if (protocol) s.params.protocol = parse_protocol(*protocol);
  if (seed) s.params.seed = *seed;

  const auto result = run_simulation(s);
  fs::create_directories(out_dir);
  write_file(out_dir / "events.log", join_lines(result.event_log));
  write_file(out_dir / "control.log", join_lines(result.control_log));
  write_file(out_dir / "tree.txt", dump_tree(result.overlay));
  write_file(out_dir / "hierarchy.txt", dump_hierarchy(result.hierarchy));
  const ComparisonRow row{s.name, s.topology.hosts().size(), s.params.seed, s.params.protocol, result.metrics};
  write_file(out_dir / "metrics.csv", rows_to_csv(std::span(&row, 1)));
  write_file(out_dir / "metrics.json", metrics_to_json(s.name, row.node_count, row.protocol, result.metrics));

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << rows_to_csv(std::span(&row, 1));
  return kOk;
}

int cmd_sweep(const std::string& name, const std::vector<std::size_t>& counts, std::size_t seeds,
              const std::optional<fs::path>& out_file) {
  const Scenario base = load_scenario(resolve_scenario_path(name));
  SweepConfig config;
  config.counts = counts;
  config.seeds = seeds;
  const auto rows = run_sweep(base, config, Execution::parallel);
  const auto csv = rows_to_csv(rows);
  if (out_file) {
    write_file(*out_file, csv);
  } else {
    std::cout << csv;
  }
  return kOk;
}

int cmd_validate(const std::string& name) {
  const auto s = load_scenario(resolve_scenario_path(name));
  std::cout << s.name << ": ok (" << s.topology.hosts().size() << " hosts, " << s.script.size() << " actions)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource-aware application-layer multicast simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::optional<std::string> protocol;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run->add_option("scenario", scenario, "Scenario file or bundled name")->required();
  run->add_option("--protocol", protocol, "netrawalm or nice")->check(CLI::IsMember({"netrawalm", "nice"}));
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory");

  std::vector<std::size_t> counts;
  std::size_t seeds = 10;
  std::optional<std::string> sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Compare both protocols over generated scenarios");
  sweep->add_option("template", scenario, "Template scenario file or bundled name")->required();
  sweep->add_option("--counts", counts, "Node counts")->delimiter(',')->required();
  sweep->add_option("--seeds", seeds, "Seeds per node count")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "CSV output file (default stdout)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", scenario, "Scenario file or bundled name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kScenarioError;
  }

  try {
    if (run->parsed()) return cmd_run(scenario, protocol, seed, out_dir);
    if (sweep->parsed()) {
      std::optional<fs::path> out;
      if (sweep_out) out = *sweep_out;
      return cmd_sweep(scenario, counts, seeds, out);
    }
    return cmd_validate(scenario);
  } catch (const ScenarioError& e) {
    report(e);
    return kScenarioError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
