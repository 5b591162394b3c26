#include <doctest.h>

#include <omp.h>

#include "netrawalm/sweep.hpp"

using namespace netrawalm;

namespace {

Scenario base() {
  Scenario s;
  s.name = "t";
  s.bandwidth = {10'000'000, 512'000, 250'000};
  return s;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("one row per scenario and protocol") {
    SweepConfig c;
    c.counts = {4, 6, 8};
    c.seeds = 10;
    const auto rows = run_sweep(base(), c);
    CHECK(rows.size() == 60);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      CHECK(rows[i].protocol == Protocol::netrawalm);
      CHECK(rows[i + 1].protocol == Protocol::nice);
      CHECK(rows[i].scenario == rows[i + 1].scenario);
    }

    c.counts = {5};
    c.seeds = 1;
    CHECK(run_sweep(base(), c).size() == 2);
  }

  TEST_CASE("parallel sweep equals the serial one") {
    SweepConfig c;
    c.counts = {4, 10, 16};
    c.seeds = 3;
    const auto serial = run_sweep(base(), c, Execution::serial);
    omp_set_num_threads(4);
    CHECK(run_sweep(base(), c, Execution::parallel) == serial);
    CHECK(rows_to_csv(run_sweep(base(), c, Execution::parallel)) == rows_to_csv(serial));
  }

  TEST_CASE("csv format") {
    ComparisonRow r{"x", 3, 1, Protocol::nice, {}};
    r.metrics.degenerate = true;
    r.metrics.max_stress = 0;
    const std::vector<ComparisonRow> one{r};
    CHECK(rows_to_csv(one) ==
          "scenario,node_count,protocol,avg_stretch,max_stress,delivered_fraction\nx,3,nice,NA,0,0.000000\n");
    r.metrics.degenerate = false;
    r.metrics.average_stretch = 7.0 / 6.0;
    r.metrics.max_stress = 2;
    r.metrics.delivered_fraction = 1;
    const std::vector<ComparisonRow> two{r};
    CHECK(rows_to_csv(two).ends_with("x,3,nice,1.166667,2,1.000000\n"));
    CHECK(rows_to_json(two).find("\"average_stretch\"") != std::string::npos);
  }

  TEST_CASE("failures in workers surface to the caller") {
    Scenario bad = base();
    bad.params.event_budget = 1;
    GeneratorConfig g;
    g.node_count = 6;
    const std::vector<Scenario> scenarios{generate_scenario(bad, g, 1), generate_scenario(bad, g, 2)};
    const Protocol both[] = {Protocol::netrawalm, Protocol::nice};
    CHECK_THROWS(compare_protocols(scenarios, both, Execution::parallel));
  }
}
