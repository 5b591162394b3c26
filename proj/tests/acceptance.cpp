// Acceptance run: one PASS/FAIL line per criterion. The exit status is 0
// once every criterion has been evaluated; pass --strict to exit 1 when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/sim_engine.hpp"
#include "netrawalm/sweep.hpp"
#include "netrawalm/tree.hpp"
#include "support.hpp"

using namespace netrawalm;
namespace ts = testing_support;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const auto ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  std::printf("%s  %d %s: %s (%.0f ms)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), ms);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double elapsed_s(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string label_list(const Scenario& s, const std::vector<NodeId>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + s.labels.at(ids[i]);
  return out + "]";
}

Outcome worked_example() {
  const auto t0 = Clock::now();
  const auto s = load_scenario(resolve_scenario_path("worked_example_s5"));
  const auto threshold = compute_fanout_threshold(s.bandwidth.free_bps, s.bandwidth.application_bps);
  const bool tree = needs_tree(s.profiles.size(), threshold);
  const auto queue = build_priority_queue(s.profiles);
  const auto built = build_tree_strict(s.profiles, s.topology, threshold);
  const double secs = elapsed_s(t0);

  const std::vector<NodeId> expected{NodeId{3}, NodeId{2}, NodeId{4}, NodeId{1}};
  const bool ok = threshold.p == 2 && tree && s.labels.at(built.root) == "V3" && queue == expected && secs < 1.0;
  return {ok, "P=" + std::to_string(threshold.p) + " tree=" + (tree ? "yes" : "no") + " root=" +
                  s.labels.at(built.root) + " queue=" + label_list(s, queue)};
}

Outcome ring_example() {
  const auto t0 = Clock::now();
  const auto s = load_scenario(resolve_scenario_path("fig6_ring"));
  const auto r = run_simulation(s);
  const double secs = elapsed_s(t0);
  const auto& st = r.metrics.stretch_per_member;
  auto exact = [&](std::uint32_t n, double v) { return st.contains(NodeId{n}) && st.at(NodeId{n}) == v; };
  const bool ok = r.metrics.max_stress == 2 && st.size() == 3 && exact(2, 1.0) && exact(3, 1.5) && exact(4, 1.0) &&
                  std::abs(r.metrics.average_stretch - 7.0 / 6.0) <= 0.01 && secs < 1.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max stress=%u stretch A=%.3f B=%.3f C=%.3f avg=%.4f", r.metrics.max_stress,
                st.contains(NodeId{2}) ? st.at(NodeId{2}) : -1.0, st.contains(NodeId{3}) ? st.at(NodeId{3}) : -1.0,
                st.contains(NodeId{4}) ? st.at(NodeId{4}) : -1.0, r.metrics.average_stretch);
  return {ok, buf};
}

Outcome stretch_trend() {
  const auto t0 = Clock::now();
  const auto base = load_scenario(resolve_scenario_path("sweep_template"));
  SweepConfig config;
  config.counts = {4, 6, 8, 12, 16, 24, 32, 40, 48, 64};
  config.seeds = 10;
  const auto rows = run_sweep(base, config);
  std::size_t pairs = 0;
  std::size_t better_or_equal = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const auto& a = rows[i];
    const auto& b = rows[i + 1];
    if (a.scenario != b.scenario || a.protocol != Protocol::netrawalm) return {false, "rows not paired"};
    ++pairs;
    if (!a.metrics.degenerate && !b.metrics.degenerate &&
        a.metrics.average_stretch <= b.metrics.average_stretch + 1e-9) {
      ++better_or_equal;
    }
  }

  std::size_t symmetric_equal = 0;
  std::size_t symmetric_runs = 0;
  for (std::size_t n : {4, 8, 16}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto s = generate_symmetric_scenario(n, 250'000, 250'000, seed);
      s.params.protocol = Protocol::netrawalm;
      const auto a = run_simulation(s);
      s.params.protocol = Protocol::nice;
      const auto b = run_simulation(s);
      ++symmetric_runs;
      if (!a.metrics.degenerate && std::abs(a.metrics.average_stretch - b.metrics.average_stretch) <= 1e-9) {
        ++symmetric_equal;
      }
    }
  }
  const double secs = elapsed_s(t0);
  const double share = pairs ? static_cast<double>(better_or_equal) / static_cast<double>(pairs) : 0.0;
  const bool ok = pairs == 100 && share >= 0.90 && symmetric_equal == symmetric_runs && secs < 60.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu/%zu paired runs with stretch <= baseline (%.0f%%), p=1 equal %zu/%zu, %.1f s",
                better_or_equal, pairs, 100.0 * share, symmetric_equal, symmetric_runs, secs);
  return {ok, buf};
}

Outcome tree_invariants() {
  std::mt19937_64 rng(20240601);
  std::size_t violations = 0;
  std::size_t rejected = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t hosts = 1 + rng() % 32;
    const std::size_t lans = 1 + rng() % 4;
    auto net = ts::random_net(rng, hosts, lans);
    const auto threshold = compute_fanout_threshold(250'000 * (1 + rng() % 5) + rng() % 1000, 250'000);
    const auto built = build_tree(net.profiles, net.topology, threshold);
    rejected += built.rejected.size();
    auto v = ts::tree_violations(built.tree, net.profiles, net.topology, threshold.p, built.rejected);
    if (!v.empty()) {
      ++violations;
      if (first.empty()) first = " first: instance " + std::to_string(i) + " " + v.front();
    }
  }
  return {violations == 0, "1000 instances, " + std::to_string(violations) + " with violations, info: " +
                               std::to_string(rejected) + " members rejected for capacity" + first};
}

Outcome recovery_bound() {
  Scenario base;
  base.bandwidth = {10'000'000, 512'000, 250'000};
  GeneratorConfig g;
  g.crash_one = true;
  std::size_t violations = 0;
  std::size_t crashes = 0;
  DelayUs worst_from_detection = 0;
  DelayUs worst_from_crash = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    g.node_count = 4 + (seed * 7) % 45;
    const auto s = generate_scenario(base, g, seed);
    const auto r = run_simulation(s);
    const auto bound = 3 * s.params.heartbeat_interval_us;
    std::vector<std::string> problems;
    if (r.recoveries.size() != 1) problems.push_back("expected one crash record");
    for (const auto& rec : r.recoveries) {
      ++crashes;
      if (rec.detected < 0 || rec.reconnected < 0) {
        problems.push_back("crash of " + to_string(rec.node) + " never repaired");
        continue;
      }
      worst_from_detection = std::max(worst_from_detection, rec.reconnected - rec.detected);
      worst_from_crash = std::max(worst_from_crash, rec.reconnected - rec.crashed);
      if (rec.reconnected - rec.detected > bound) problems.push_back("slow reconnect after " + to_string(rec.node));
    }
    // Survivors are exactly the overlay members, and the overlay is a tree.
    std::set<NodeId> survivors;
    for (auto h : s.topology.hosts()) survivors.insert(h);
    for (const auto& rec : r.recoveries) survivors.erase(rec.node);
    const auto members = r.overlay.members();
    if (std::set<NodeId>(members.begin(), members.end()) != survivors) problems.push_back("survivor missing");
    if (!check_tree_structure(r.overlay).empty()) problems.push_back("overlay is not a tree");
    if (!problems.empty()) {
      ++violations;
      if (first.empty()) first = " first: " + s.name + " " + problems.front();
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%zu crashes, %zu violations, worst detection->reconnect %.0f ms (bound %d ms), "
                "info: worst crash->reconnect %.0f ms",
                crashes, violations, worst_from_detection / 1000.0, 3000, worst_from_crash / 1000.0);
  return {violations == 0 && crashes == 200, buf + first};
}

RouteDecision oracle_route(const std::vector<Route>& table, VertexId dest, TosValue tos) {
  const Route* best = nullptr;
  for (const auto& r : table) {
    if (r.destination != dest || r.tos.precedence != tos.precedence) continue;
    if (!best || r.metric < best->metric || (r.metric == best->metric && r.next_hop < best->next_hop)) best = &r;
  }
  if (!best) {
    for (const auto& r : table) {
      if (r.destination != dest || r.tos.precedence != 0) continue;
      if (!best || r.metric < best->metric || (r.metric == best->metric && r.next_hop < best->next_hop)) best = &r;
    }
  }
  if (best) return RouteDecision::forward(best->next_hop);
  for (const auto& r : table) {
    if (r.destination == dest) return RouteDecision::drop(IcmpCode::network_unreachable_for_tos);
  }
  return RouteDecision::drop(IcmpCode::host_unreachable_for_tos);
}

Outcome tos_conformance() {
  const int bytes[] = {0, 32, 64, 96, 128, 160, 192, 224};
  const char* names[] = {"Routine", "Priority", "Immediate", "Flash", "Flash Override", "CRITIC/ECP",
                         "Internetwork Control", "Network Control"};
  std::size_t mismatches = 0;
  for (int b = 0; b < 8; ++b) {
    const auto v = encode_tos(b);
    if (v.byte() != bytes[b] || v.description() != names[b]) ++mismatches;
  }

  std::vector<Route> space;
  for (VertexId dest : {1, 2}) {
    for (VertexId hop : {10, 11}) {
      for (std::uint8_t tos : {0, 1, 2}) {
        for (std::uint32_t metric : {1, 2}) space.push_back({dest, hop, TosValue{tos}, metric});
      }
    }
  }
  std::size_t checked = 0;
  for (const auto& a : space) {
    for (const auto& b : space) {
      for (const auto& c : space) {
        const std::vector<Route> table{a, b, c};
        for (VertexId dest : {1, 2, 3}) {
          for (std::uint8_t tos = 0; tos < 4; ++tos) {
            ++checked;
            if (select_route(table, dest, TosValue{tos}) != oracle_route(table, dest, TosValue{tos})) ++mismatches;
          }
        }
      }
    }
  }
  return {mismatches == 0,
          "8 encodings + " + std::to_string(checked) + " route lookups, " + std::to_string(mismatches) + " mismatches"};
}

Outcome key_coverage() {
  std::size_t events = 0;
  std::size_t violations = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto r = ts::run_random_conference_script(seed, 400);
    events += r.events;
    violations += r.violations + r.disagreements;
    if (first.empty() && !r.first_problem.empty()) first = " first: script " + std::to_string(seed) + " " + r.first_problem;
  }
  // The bundled lecture runs end to end through the simulator as well.
  const auto lecture = run_simulation(load_scenario(resolve_scenario_path("worked_example_s5")));
  const bool lecture_clean = lecture.warnings.empty();
  return {violations == 0 && lecture_clean, "60 scripts, " + std::to_string(events) + " events, " +
                                                std::to_string(violations) + " violations" + first};
}

std::string artifacts(const Scenario& s, const RunResult& r) {
  const ComparisonRow row{s.name, s.topology.hosts().size(), s.params.seed, s.params.protocol, r.metrics};
  return join_lines(r.event_log) + join_lines(r.control_log) + dump_tree(r.overlay) + dump_hierarchy(r.hierarchy) +
         rows_to_csv(std::span(&row, 1)) + metrics_to_json(s.name, row.node_count, row.protocol, r.metrics);
}

Outcome determinism() {
  std::vector<Scenario> scenarios;
  for (const char* name : {"worked_example_s5", "fig6_ring", "join_descent_s34", "leader_failover_s35"}) {
    scenarios.push_back(load_scenario(resolve_scenario_path(name)));
  }
  Scenario base;
  base.bandwidth = {10'000'000, 512'000, 250'000};
  GeneratorConfig g;
  g.crash_one = true;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    g.node_count = 8 * seed;
    scenarios.push_back(generate_scenario(base, g, seed));
  }
  std::size_t runs = 0;
  std::size_t differ = 0;
  for (auto s : scenarios) {
    for (auto p : {Protocol::netrawalm, Protocol::nice}) {
      s.params.protocol = p;
      ++runs;
      if (artifacts(s, run_simulation(s)) != artifacts(s, run_simulation(s))) ++differ;
    }
  }
  return {differ == 0, std::to_string(runs) + " runs repeated, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  criterion(1, "worked example", worked_example);
  criterion(2, "ring golden scenario", ring_example);
  criterion(3, "stretch versus baseline", stretch_trend);
  criterion(4, "tree invariants", tree_invariants);
  criterion(5, "failure recovery bound", recovery_bound);
  criterion(6, "TOS conformance", tos_conformance);
  criterion(7, "conference key coverage", key_coverage);
  criterion(8, "determinism", determinism);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return strict && failures ? 1 : 0;
}
