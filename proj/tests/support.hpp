#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "netrawalm/conference.hpp"
#include "netrawalm/resources.hpp"
#include "netrawalm/tree.hpp"
#include "netrawalm/underlay.hpp"

namespace testing_support {

using namespace netrawalm;

inline std::string gateway_of(std::size_t lan) { return "10.1." + std::to_string(lan) + ".1"; }
inline std::string address_of(std::size_t lan, std::size_t slot) {
  return "10.1." + std::to_string(lan) + "." + std::to_string(slot + 2);
}

struct RandomNet {
  UnderlayTopology topology;
  std::vector<NodeProfile> profiles;
};

/// Hosts 1..hosts spread over `lans` LANs, routers 1000+, random delays.
/// Connected by construction (spanning tree over routers, then chords).
inline RandomNet random_net(std::mt19937_64& rng, std::size_t hosts, std::size_t lans, std::size_t routers = 0,
                            std::size_t chords = 2) {
  RandomNet net;
  if (routers == 0) routers = std::max<std::size_t>(2, lans);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  for (std::size_t r = 0; r < routers; ++r) net.topology.add_router(static_cast<VertexId>(1000 + r));
  for (std::size_t r = 1; r < routers; ++r) {
    net.topology.add_link(static_cast<VertexId>(1000 + r), static_cast<VertexId>(1000 + pick(0, r - 1)),
                          static_cast<DelayUs>(pick(1, 20)) * 1000, 1'000'000'000);
  }
  for (std::size_t c = 0; c < chords; ++c) {
    const auto a = pick(0, routers - 1);
    const auto b = pick(0, routers - 1);
    if (a != b) {
      net.topology.add_link(static_cast<VertexId>(1000 + a), static_cast<VertexId>(1000 + b),
                            static_cast<DelayUs>(pick(1, 20)) * 1000, 1'000'000'000);
    }
  }
  std::vector<std::size_t> per_lan(lans, 0);
  for (std::size_t i = 0; i < hosts; ++i) {
    const NodeId id{static_cast<std::uint32_t>(i + 1)};
    const auto lan = pick(0, lans - 1);
    net.topology.add_host(id, gateway_of(lan), address_of(lan, per_lan[lan]++));
    net.topology.add_link(id.value, static_cast<VertexId>(1000 + lan % routers), static_cast<DelayUs>(pick(1, 5)) * 1000,
                          100'000'000);
    NodeProfile p;
    p.node = id;
    p.free_ram_bytes = (1ull << 28) * pick(1, 6);
    p.cpu_hz = 500'000'000ull * pick(1, 5);
    p.processor_count = static_cast<std::uint32_t>(pick(1, 3));
    p.hop_distance = static_cast<std::uint32_t>(pick(1, 3));
    p.gateway = gateway_of(lan);
    p.local_address = net.topology.host(id).local_address;
    net.profiles.push_back(p);
  }
  return net;
}

/// Shortest path by enumerating every simple path (small graphs only).
inline DelayUs enumerate_shortest(const UnderlayTopology& t, VertexId from, VertexId to, PathMetric metric) {
  DelayUs best = -1;
  std::vector<bool> on_path(t.vertex_count(), false);
  const auto target = t.index_of(to);
  std::function<void(std::size_t, DelayUs)> walk = [&](std::size_t v, DelayUs acc) {
    if (best >= 0 && acc >= best) return;
    if (v == target) {
      best = acc;
      return;
    }
    on_path[v] = true;
    for (const auto& adj : t.neighbours(v)) {
      if (on_path[adj.vertex]) continue;
      walk(adj.vertex, acc + t.link_weight(t.links()[adj.link], metric));
    }
    on_path[v] = false;
  };
  walk(t.index_of(from), 0);
  return best;
}

/// Field-by-field capacity comparison.
inline bool beats(const NodeProfile& a, const NodeProfile& b) {
  if (a.cpu_hz != b.cpu_hz) return a.cpu_hz > b.cpu_hz;
  if (a.free_ram_bytes != b.free_ram_bytes) return a.free_ram_bytes > b.free_ram_bytes;
  if (a.processor_count != b.processor_count) return a.processor_count > b.processor_count;
  if (a.hop_distance != b.hop_distance) return a.hop_distance < b.hop_distance;
  return a.node.value < b.node.value;
}

/// Tree rules checked from the raw parent/children maps. Members listed in
/// `absent` are expected to be missing from the tree.
inline std::vector<std::string> tree_violations(const OverlayTree& t, const std::vector<NodeProfile>& profiles,
                                                const UnderlayTopology& topo, std::uint32_t p,
                                                const std::vector<NodeId>& absent = {}) {
  std::vector<std::string> v;
  std::map<NodeId, const NodeProfile*> prof;
  for (const auto& x : profiles) prof[x.node] = &x;

  // Walk from the root over children lists; every member must be hit once.
  std::map<NodeId, int> depth;
  std::map<NodeId, NodeId> parent;
  std::vector<NodeId> stack{t.root};
  depth[t.root] = 1;
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    auto it = t.children_of.find(n);
    if (it == t.children_of.end()) continue;
    if (it->second.size() > p) v.push_back("fan-out exceeded at " + to_string(n));
    for (auto c : it->second) {
      if (depth.contains(c)) {
        v.push_back("node reached twice: " + to_string(c));
        continue;
      }
      depth[c] = depth[n] + 1;
      parent[c] = n;
      stack.push_back(c);
    }
  }
  const std::set<NodeId> gone(absent.begin(), absent.end());
  for (const auto& x : profiles) {
    if (gone.contains(x.node) == depth.contains(x.node)) v.push_back("membership wrong for " + to_string(x.node));
  }
  for (const auto& [n, d] : depth) {
    if (!t.depth_of.contains(n) || t.depth_of.at(n) != static_cast<std::uint32_t>(d)) v.push_back("depth mismatch");
    if (n != t.root && (!t.parent_of.contains(n) || t.parent_of.at(n) != parent.at(n))) v.push_back("parent mismatch");
  }
  if (t.depth_of.size() != depth.size()) v.push_back("stray depth entries");

  std::map<int, std::size_t> level;
  for (const auto& [n, d] : depth) ++level[d];
  for (const auto& [d, c] : level) {
    if (d < 64 && c > (std::size_t{1} << (d - 1))) v.push_back("level " + std::to_string(d) + " overfull");
  }

  // Root is the global maximum; LAN headers are LAN maxima.
  std::map<std::string, NodeId> best;
  for (const auto& [n, d] : depth) {
    if (!prof.contains(n)) continue;
    const auto& lan = topo.lan_of(n);
    if (!best.contains(lan) || beats(*prof.at(n), *prof.at(best.at(lan)))) best[lan] = n;
    if (beats(*prof.at(n), *prof.at(t.root))) v.push_back("root is not the maximum");
  }
  std::set<NodeId> headers;
  for (const auto& [lan, n] : best) headers.insert(n);
  for (const auto& [n, d] : depth) {
    if (n == t.root) continue;
    if (headers.contains(n)) {
      if (!headers.contains(parent.at(n))) v.push_back("header " + to_string(n) + " below a non-header");
      for (auto a = parent.at(n);; a = parent.at(a)) {
        if (headers.contains(a) && beats(*prof.at(n), *prof.at(a))) v.push_back("header outranks a header above it");
        if (a == t.root) break;
      }
      continue;
    }
    const auto header = best.at(topo.lan_of(n));
    bool under = false;
    for (auto a = parent.at(n);; a = parent.at(a)) {
      if (a == header) under = true;
      if (a == t.root || under) break;
    }
    if (!under) v.push_back("node " + to_string(n) + " outside its header's subtree");
  }
  return v;
}

/// Reference model of the conference server: who is logged in and which
/// role each user holds in each conference.
struct ConferenceModel {
  std::map<std::string, NodeId> node_of;
  std::map<std::string, std::string> password_of;
  std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> allowed;  // participants, spectators
  std::set<std::string> online;
  std::map<std::string, std::map<std::string, Role>> roles;  // conference -> user -> role

  bool try_login(const std::string& u, const std::string& pw) {
    if (!password_of.contains(u) || password_of.at(u) != pw || online.contains(u)) return false;
    online.insert(u);
    return true;
  }
  bool try_join(const std::string& u, const std::string& c, Role r) {
    if (!online.contains(u) || !allowed.contains(c)) return false;
    const auto& a = r == Role::participant ? allowed.at(c).first : allowed.at(c).second;
    if (!a.contains(u) || roles[c].contains(u)) return false;
    roles[c][u] = r;
    return true;
  }
  bool try_leave(const std::string& u, const std::string& c) {
    if (!online.contains(u) || !allowed.contains(c) || !roles[c].contains(u)) return false;
    roles[c].erase(u);
    return true;
  }
  bool try_logout(const std::string& u) {
    if (!online.contains(u)) return false;
    for (auto& [c, r] : roles) r.erase(u);
    online.erase(u);
    return true;
  }
  bool try_publish(const std::string& u, const std::string& c) {
    return online.contains(u) && allowed.contains(c) && roles[c].contains(u) && roles[c].at(u) == Role::participant;
  }

  /// Every member of a conference must hold exactly the keys of its current
  /// participants, and the server's membership must match the model.
  std::vector<std::string> compare(const ConferenceServer& server) const {
    std::vector<std::string> v;
    for (const auto& [name, st] : server.conferences()) {
      std::set<NodeId> parts;
      std::set<NodeId> specs;
      auto it = roles.find(name);
      if (it != roles.end()) {
        for (const auto& [u, r] : it->second) (r == Role::participant ? parts : specs).insert(node_of.at(u));
      }
      if (st.participants != parts) v.push_back(name + ": participant set differs");
      if (st.spectators != specs) v.push_back(name + ": spectator set differs");
      std::set<NodeId> keyed;
      for (const auto& [n, k] : st.public_keys) keyed.insert(n);
      if (keyed != parts) v.push_back(name + ": key directory differs");
      std::set<NodeId> members = parts;
      members.insert(specs.begin(), specs.end());
      for (auto m : members) {
        auto held = st.held_keys.find(m);
        if (held == st.held_keys.end() || held->second != parts) v.push_back(name + ": key coverage broken");
      }
    }
    std::set<std::string> sessions;
    for (const auto& [u, s] : server.sessions()) sessions.insert(u);
    if (sessions != online) v.push_back("session set differs");
    return v;
  }
};

struct ConferenceScriptResult {
  std::size_t events = 0;
  std::size_t violations = 0;
  std::size_t disagreements = 0;  // accept/reject outcome differs from the model
  std::string first_problem;
};

/// Random login/join/leave/logout/publish traffic against both the server
/// and the model, comparing after every event.
inline ConferenceScriptResult run_random_conference_script(std::uint64_t seed, std::size_t steps) {
  std::mt19937_64 rng(seed);
  ConferenceModel model;
  std::vector<Credential> creds;
  const std::size_t users = 3 + rng() % 6;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < users; ++i) {
    const auto u = "u" + std::to_string(i);
    names.push_back(u);
    model.node_of[u] = NodeId{static_cast<std::uint32_t>(i + 1)};
    model.password_of[u] = "pw" + std::to_string(i);
    creds.push_back({u, model.password_of[u], model.node_of[u]});
  }
  ConferenceServer server(creds);
  const std::vector<std::string> confs{"a", "b"};
  for (const auto& c : confs) {
    std::set<std::string> ps;
    std::set<std::string> ss;
    for (const auto& u : names) {
      const auto r = rng() % 4;
      if (r < 2) ps.insert(u);
      if (r == 1 || r == 2) ss.insert(u);
    }
    model.allowed[c] = {ps, ss};
    server.create_conference(names[0], c, ps, ss);
  }

  ConferenceScriptResult out;
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  for (std::size_t step = 0; step < steps; ++step) {
    const auto u = pick(names);
    const auto c = rng() % 8 == 0 ? std::string("zz") : pick(confs);
    bool expect = false;
    bool got = true;
    try {
      switch (rng() % 6) {
        case 0: {
          const auto pw = rng() % 6 ? model.password_of.at(u) : std::string("wrong");
          expect = model.try_login(u, pw);
          server.login(u, pw);
          break;
        }
        case 1:
          expect = model.try_join(u, c, Role::participant);
          server.join_as_participant(u, c, "k" + std::to_string(step));
          break;
        case 2:
          expect = model.try_join(u, c, Role::spectator);
          server.join_as_spectator(u, c);
          break;
        case 3:
          expect = model.try_leave(u, c);
          server.leave_conference(u, c);
          break;
        case 4:
          expect = model.try_logout(u);
          server.logout(u);
          break;
        default:
          expect = model.try_publish(u, c);
          server.publish(u, c);
          break;
      }
    } catch (const ConferenceError&) {
      got = false;
    }
    ++out.events;
    if (got != expect) {
      ++out.disagreements;
      if (out.first_problem.empty()) out.first_problem = "step " + std::to_string(step) + ": outcome differs";
    }
    auto v = model.compare(server);
    auto inv = server.check_invariants();
    v.insert(v.end(), inv.begin(), inv.end());
    if (!v.empty()) {
      ++out.violations;
      if (out.first_problem.empty()) out.first_problem = "step " + std::to_string(step) + ": " + v.front();
    }
  }
  return out;
}

}  // namespace testing_support
