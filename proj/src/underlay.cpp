#include "netrawalm/underlay.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

namespace netrawalm {

namespace {

struct Dijkstra {
  std::vector<DelayUs> dist;
  std::vector<std::size_t> via_link;  // SIZE_MAX for the source / unreachable
};

Dijkstra run_dijkstra(const UnderlayTopology& t, std::size_t source, PathMetric metric) {
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  Dijkstra d{std::vector<DelayUs>(t.vertex_count(), -1), std::vector<std::size_t>(t.vertex_count(), kNone)};
  using Item = std::pair<DelayUs, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d.dist[source] = 0;
  pq.emplace(0, source);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du != d.dist[u]) continue;
    for (const auto& adj : t.neighbours(u)) {
      const DelayUs nd = du + t.link_weight(t.links()[adj.link], metric);
      if (d.dist[adj.vertex] < 0 || nd < d.dist[adj.vertex]) {
        d.dist[adj.vertex] = nd;
        d.via_link[adj.vertex] = adj.link;
        pq.emplace(nd, adj.vertex);
      }
    }
  }
  return d;
}

}  // namespace

void UnderlayTopology::add_vertex(VertexId v) {
  if (index_.contains(v)) throw TopologyError("duplicate vertex id " + std::to_string(v));
  index_.emplace(v, vertices_.size());
  vertices_.push_back(v);
  adjacency_.emplace_back();
}

void UnderlayTopology::add_router(VertexId id) {
  add_vertex(id);
  routers_.push_back(id);
}

void UnderlayTopology::add_host(NodeId node, std::string gateway, std::string local_address) {
  add_vertex(node.value);
  hosts_.emplace(node, Host{node, std::move(gateway), std::move(local_address)});
}

std::size_t UnderlayTopology::add_link(VertexId a, VertexId b, DelayUs delay_us, std::uint64_t capacity_bps) {
  if (!has_vertex(a) || !has_vertex(b)) {
    throw TopologyError("link " + std::to_string(a) + "-" + std::to_string(b) + " references an unknown vertex");
  }
  if (delay_us < 0) throw TopologyError("negative link delay");
  if (capacity_bps == 0) throw TopologyError("link capacity must be positive");
  if (a == b) throw TopologyError("self-loop on vertex " + std::to_string(a));
  const std::size_t id = links_.size();
  links_.push_back(Link{a, b, delay_us, capacity_bps});
  adjacency_[index_of(a)].push_back({index_of(b), id});
  adjacency_[index_of(b)].push_back({index_of(a), id});
  return id;
}

void UnderlayTopology::move_host(NodeId node, std::string gateway) {
  auto it = hosts_.find(node);
  if (it == hosts_.end()) throw TopologyError("unknown host " + to_string(node));
  it->second.gateway = std::move(gateway);
}

void UnderlayTopology::validate() const {
  for (const auto& l : links_) {
    if (l.delay_us < 0 || l.capacity_bps == 0) throw TopologyError("invalid link parameters");
  }
  if (hosts_.empty()) return;
  auto d = run_dijkstra(*this, index_of(hosts_.begin()->first.value), PathMetric::hops);
  for (const auto& [id, h] : hosts_) {
    if (d.dist[index_of(id.value)] < 0) {
      throw TopologyError("host " + to_string(id) + " is not connected to host " +
                          to_string(hosts_.begin()->first));
    }
  }
}

bool UnderlayTopology::is_router(VertexId v) const {
  return std::find(routers_.begin(), routers_.end(), v) != routers_.end();
}

const UnderlayTopology::Host& UnderlayTopology::host(NodeId node) const {
  auto it = hosts_.find(node);
  if (it == hosts_.end()) throw TopologyError("unknown host " + to_string(node));
  return it->second;
}

const std::string& UnderlayTopology::lan_of(NodeId node) const { return host(node).gateway; }

std::vector<NodeId> UnderlayTopology::hosts() const {
  std::vector<NodeId> out;
  out.reserve(hosts_.size());
  for (const auto& [id, h] : hosts_) out.push_back(id);
  return out;
}

std::map<std::string, std::vector<NodeId>> UnderlayTopology::lans() const {
  std::map<std::string, std::vector<NodeId>> out;
  for (const auto& [id, h] : hosts_) out[h.gateway].push_back(id);
  return out;
}

std::size_t UnderlayTopology::index_of(VertexId v) const {
  auto it = index_.find(v);
  if (it == index_.end()) throw TopologyError("unknown vertex " + std::to_string(v));
  return it->second;
}

std::vector<DelayUs> UnderlayTopology::distances_from(VertexId source, PathMetric metric) const {
  return run_dijkstra(*this, index_of(source), metric).dist;
}

std::vector<std::size_t> UnderlayTopology::shortest_path_links(VertexId a, VertexId b, PathMetric metric) const {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  auto d = run_dijkstra(*this, ia, metric);
  if (d.dist[ib] < 0) throw TopologyError("no path " + std::to_string(a) + " -> " + std::to_string(b));
  std::vector<std::size_t> path;
  for (auto v = ib; v != ia;) {
    const auto link = d.via_link[v];
    path.push_back(link);
    const auto& l = links_[link];
    v = index_of(l.a) == v ? index_of(l.b) : index_of(l.a);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void UnderlayTopology::set_tos_delay_multiplier(std::uint8_t precedence, double factor) {
  if (precedence > 7) throw std::out_of_range("precedence must be 0..7");
  if (!(factor > 0)) throw std::invalid_argument("TOS delay multiplier must be positive");
  tos_multiplier_[precedence] = factor;
}

bool UnderlayTopology::operator==(const UnderlayTopology& o) const {
  return routers_ == o.routers_ && hosts_ == o.hosts_ && links_ == o.links_ && tos_multiplier_ == o.tos_multiplier_;
}

DelayUs shortest_path_delay(const UnderlayTopology& topology, NodeId a, NodeId b, PathMetric metric) {
  if (!topology.has_host(a)) throw TopologyError("unknown host " + to_string(a));
  if (!topology.has_host(b)) throw TopologyError("unknown host " + to_string(b));
  if (a == b) return 0;
  auto dist = topology.distances_from(a.value, metric);
  const auto d = dist[topology.index_of(b.value)];
  if (d < 0) throw TopologyError("hosts " + to_string(a) + " and " + to_string(b) + " are disconnected");
  return d;
}

std::string lan_of(const UnderlayTopology& topology, NodeId node) { return topology.lan_of(node); }

// --- TOS --------------------------------------------------------------------

std::string_view TosValue::description() const {
  static constexpr std::array<std::string_view, 8> kNames{
      "Routine", "Priority", "Immediate", "Flash", "Flash Override", "CRITIC/ECP", "Internetwork Control",
      "Network Control"};
  return kNames[precedence & 7u];
}

TosValue encode_tos(int precedence_bits) {
  if (precedence_bits < 0 || precedence_bits > 7) {
    throw std::out_of_range("TOS precedence must be in 0..7, got " + std::to_string(precedence_bits));
  }
  return TosValue{static_cast<std::uint8_t>(precedence_bits)};
}

RouteDecision select_route(std::span<const Route> table, VertexId destination, TosValue packet_tos) {
  auto best_with = [&](TosValue tos) -> std::optional<VertexId> {
    const Route* best = nullptr;
    for (const auto& r : table) {
      if (r.destination != destination || r.tos != tos) continue;
      if (!best || r.metric < best->metric || (r.metric == best->metric && r.next_hop < best->next_hop)) best = &r;
    }
    if (!best) return std::nullopt;
    return best->next_hop;
  };

  if (auto hop = best_with(packet_tos)) return RouteDecision::forward(*hop);
  if (auto hop = best_with(TosValue{0})) return RouteDecision::forward(*hop);

  const bool routable_elsewhere =
      std::any_of(table.begin(), table.end(), [&](const Route& r) { return r.destination == destination; });
  return RouteDecision::drop(routable_elsewhere ? IcmpCode::network_unreachable_for_tos
                                                : IcmpCode::host_unreachable_for_tos);
}

}  // namespace netrawalm
