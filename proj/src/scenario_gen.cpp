#include "netrawalm/scenario_gen.hpp"

#include <algorithm>
#include <random>

namespace netrawalm {

namespace {

constexpr VertexId kFirstRouter = 10'000;

std::string gateway_for(std::size_t lan) {
  return "10." + std::to_string(lan / 256) + "." + std::to_string(lan % 256) + ".1";
}

std::string address_for(std::size_t lan, std::size_t slot) {
  return "10." + std::to_string(lan / 256) + "." + std::to_string(lan % 256) + "." + std::to_string(slot + 2);
}

template <typename T>
T uniform(std::mt19937_64& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

NodeProfile random_profile(std::mt19937_64& rng, NodeId node) {
  NodeProfile p;
  p.node = node;
  p.free_ram_bytes = uniform<std::uint64_t>(rng, 1, 64) * 128ULL * 1024 * 1024;
  p.cpu_hz = uniform<std::uint64_t>(rng, 50, 350) * 10'000'000ULL;
  p.processor_count = uniform<std::uint32_t>(rng, 1, 8);
  p.hop_distance = uniform<std::uint32_t>(rng, 1, 4);
  return p;
}

void add_standard_script(Scenario& s, const GeneratorConfig& config, std::mt19937_64& rng) {
  auto hosts = s.topology.hosts();
  std::shuffle(hosts.begin(), hosts.end(), rng);
  SimTime t = 0;
  for (auto h : hosts) {
    ScriptAction a;
    a.at = t;
    a.kind = ActionKind::node_join;
    a.node = h;
    s.script.push_back(a);
    t += config.join_spacing_us;
  }
  // Generous settle time so every join completes before the overlay forms.
  t += 500 * kMicrosPerMilli;
  ScriptAction start;
  start.at = t;
  start.kind = ActionKind::start_conference;
  s.script.push_back(start);

  const auto source = build_priority_queue(s.profiles).front();
  ScriptAction stream;
  stream.at = t + 100 * kMicrosPerMilli;
  stream.kind = ActionKind::send_stream;
  stream.node = source;
  stream.duration_us = config.stream_duration_us;
  s.script.push_back(stream);

  if (config.crash_one && hosts.size() > 1) {
    std::vector<NodeId> candidates;
    for (auto h : s.topology.hosts()) {
      if (h != source) candidates.push_back(h);
    }
    ScriptAction crash;
    crash.at = stream.at + config.stream_duration_us + 500 * kMicrosPerMilli;
    crash.kind = ActionKind::node_crash;
    crash.node = candidates[uniform<std::size_t>(rng, 0, candidates.size() - 1)];
    s.script.push_back(crash);
  }
}

}  // namespace

Scenario generate_scenario(const Scenario& base, const GeneratorConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.name = base.name + "_n" + std::to_string(config.node_count) + "_s" + std::to_string(seed);
  s.params = base.params;
  s.params.seed = seed;
  s.bandwidth = base.bandwidth;

  std::vector<VertexId> routers;
  if (!base.topology.routers().empty()) {
    for (auto r : base.topology.routers()) {
      s.topology.add_router(r);
      routers.push_back(r);
    }
    for (const auto& l : base.topology.links()) {
      if (base.topology.is_router(l.a) && base.topology.is_router(l.b)) {
        s.topology.add_link(l.a, l.b, l.delay_us, l.capacity_bps);
      }
    }
  } else {
    const std::size_t count =
        config.router_count > 0 ? config.router_count : std::max<std::size_t>(3, (config.node_count + 3) / 4);
    for (std::size_t i = 0; i < count; ++i) {
      routers.push_back(kFirstRouter + static_cast<VertexId>(i));
      s.topology.add_router(routers.back());
    }
    // Random spanning tree, then a few chords.
    for (std::size_t i = 1; i < count; ++i) {
      const auto j = uniform<std::size_t>(rng, 0, i - 1);
      s.topology.add_link(routers[i], routers[j], uniform(rng, config.min_link_delay_us, config.max_link_delay_us),
                          1'000'000'000);
    }
    for (std::size_t extra = count / 2; extra > 0; --extra) {
      const auto a = uniform<std::size_t>(rng, 0, count - 1);
      const auto b = uniform<std::size_t>(rng, 0, count - 1);
      if (a == b) continue;
      s.topology.add_link(routers[a], routers[b], uniform(rng, config.min_link_delay_us, config.max_link_delay_us),
                          1'000'000'000);
    }
  }

  std::vector<std::size_t> per_lan(routers.size(), 0);
  for (std::size_t i = 0; i < config.node_count; ++i) {
    const NodeId id{static_cast<std::uint32_t>(i + 1)};
    const auto lan = uniform<std::size_t>(rng, 0, routers.size() - 1);
    s.topology.add_host(id, gateway_for(lan), address_for(lan, per_lan[lan]++));
    s.topology.add_link(id.value, routers[lan],
                        uniform(rng, config.min_access_delay_us, config.max_access_delay_us), 100'000'000);
    auto p = random_profile(rng, id);
    p.gateway = gateway_for(lan);
    p.local_address = s.topology.host(id).local_address;
    s.profiles.push_back(p);
  }
  s.topology.validate();
  add_standard_script(s, config, rng);
  return s;
}

Scenario generate_symmetric_scenario(std::size_t node_count, std::uint64_t free_bps, std::uint64_t application_bps,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.name = "symmetric_n" + std::to_string(node_count) + "_s" + std::to_string(seed);
  s.params.seed = seed;
  s.bandwidth = {100'000'000, free_bps, application_bps};
  s.topology.add_router(kFirstRouter);
  for (std::size_t i = 0; i < node_count; ++i) {
    const NodeId id{static_cast<std::uint32_t>(i + 1)};
    s.topology.add_host(id, gateway_for(i), address_for(i, 0));
    s.topology.add_link(id.value, kFirstRouter, 2 * kMicrosPerMilli, 100'000'000);
    auto p = random_profile(rng, id);
    p.gateway = gateway_for(i);
    p.local_address = address_for(i, 0);
    s.profiles.push_back(p);
  }
  add_standard_script(s, GeneratorConfig{}, rng);
  return s;
}

}  // namespace netrawalm
