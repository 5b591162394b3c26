#include <doctest.h>

#include <random>

#include "netrawalm/baseline_nice.hpp"
#include "netrawalm/scenario_gen.hpp"
#include "netrawalm/sim_engine.hpp"
#include "support.hpp"

using namespace netrawalm;

TEST_SUITE("baseline_nice") {
  TEST_CASE("four members form one bottom cluster under a single head") {
    std::mt19937_64 rng(1);
    auto net = testing_support::random_net(rng, 4, 2);
    const auto d = compute_delay_matrix(net.topology);
    const std::vector<NodeId> members{NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}};
    const auto o = build_baseline_overlay(members, NodeId{1}, d);
    REQUIRE(o.hierarchy.layer_count() == 2);
    CHECK(o.hierarchy.layer(0).size() == 1);
    CHECK(o.hierarchy.layer(0)[0].members.size() == 4);
    CHECK(o.hierarchy.tree_head() == o.hierarchy.layer(0)[0].leader);
    CHECK(o.control_tree.root == o.hierarchy.tree_head());
    CHECK(o.control_tree.height == 2);
  }

  TEST_CASE("resources do not influence the baseline run") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      Scenario base;
      base.bandwidth = {10'000'000, 512'000, 250'000};
      base.params.protocol = Protocol::nice;
      GeneratorConfig g;
      g.node_count = 12;
      auto s = generate_scenario(base, g, seed);
      const auto a = run_simulation(s);
      // Reverse the CPU ranking while keeping the stream source fixed.
      const auto source = a.stream_source.value();
      for (auto& p : s.profiles) {
        if (p.node != source) p.cpu_hz = 100'000'000 + p.node.value;
      }
      const auto b = run_simulation(s);
      CHECK(a.overlay == b.overlay);
      CHECK(a.metrics == b.metrics);
    }
  }

  TEST_CASE("chain is a sequential path covering every member") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      auto net = testing_support::random_net(rng, 2 + rng() % 20, 3);
      const auto d = compute_delay_matrix(net.topology);
      const auto members = net.topology.hosts();
      const NodeId source = members[rng() % members.size()];
      const auto o = build_baseline_overlay(members, source, d);
      CHECK(o.chain.root == source);
      CHECK(o.chain.size() == members.size());
      CHECK(o.chain.height == members.size());
      for (const auto& [n, kids] : o.chain.children_of) CHECK(kids.size() <= 1);
      CHECK(check_tree_structure(o.chain).empty());
      CHECK(check_tree_structure(o.control_tree).empty());
      CHECK(o.hierarchy.check_invariants().empty());
    }
  }

  TEST_CASE("leader tree hangs members under their cluster leaders") {
    std::mt19937_64 rng(4);
    auto net = testing_support::random_net(rng, 25, 4);
    const auto d = compute_delay_matrix(net.topology);
    const auto o = build_baseline_overlay(net.topology.hosts(), NodeId{1}, d);
    for (const auto& [child, parent] : o.control_tree.parent_of) {
      const auto top = o.hierarchy.top_layer_of(child);
      bool found = false;
      for (const auto& c : o.hierarchy.layer(top)) found = found || (c.contains(child) && c.leader == parent);
      CHECK(found);
    }
  }

  TEST_CASE("with room for one copy both protocols deliver along a chain") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto s = generate_symmetric_scenario(8, 250'000, 250'000, seed);
      s.params.protocol = Protocol::netrawalm;
      const auto a = run_simulation(s);
      s.params.protocol = Protocol::nice;
      const auto b = run_simulation(s);
      CHECK(a.metrics.average_stretch == doctest::Approx(b.metrics.average_stretch));
      CHECK(a.metrics.max_stress == b.metrics.max_stress);
    }
  }
}
