#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netrawalm/resources.hpp"
#include "netrawalm/units.hpp"

namespace netrawalm {

/// Vertex of the physical graph. Hosts use their NodeId value; routers and
/// hosts share one id space.
using VertexId = std::uint32_t;

struct Link {
  VertexId a = 0;
  VertexId b = 0;
  DelayUs delay_us = 0;
  std::uint64_t capacity_bps = 1;

  bool operator==(const Link&) const = default;
};

enum class PathMetric { delay, hops };

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Routers, end hosts grouped into LANs by gateway token, and weighted links.
/// Treated as immutable once a simulation starts; queries are const and
/// thread-safe.
class UnderlayTopology {
 public:
  struct Host {
    NodeId node;
    std::string gateway;
    std::string local_address;

    bool operator==(const Host&) const = default;
  };

  void add_router(VertexId id);
  void add_host(NodeId node, std::string gateway, std::string local_address);
  std::size_t add_link(VertexId a, VertexId b, DelayUs delay_us, std::uint64_t capacity_bps);
  // Reassigns a host to another LAN; physical links are unchanged.
  void move_host(NodeId node, std::string gateway);

  /// Throws TopologyError if a link references an unknown vertex, a delay is
  /// negative, a capacity is zero, or the hosts are not all connected.
  void validate() const;

  bool has_host(NodeId node) const { return hosts_.contains(node); }
  bool has_vertex(VertexId v) const { return index_.contains(v); }
  bool is_router(VertexId v) const;
  const std::string& lan_of(NodeId node) const;
  const Host& host(NodeId node) const;

  std::vector<NodeId> hosts() const;
  const std::vector<VertexId>& routers() const { return routers_; }
  std::span<const Link> links() const { return links_; }
  std::map<std::string, std::vector<NodeId>> lans() const;

  // Dense vertex indexing used by the path kernels.
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t index_of(VertexId v) const;
  VertexId vertex_at(std::size_t index) const { return vertices_[index]; }
  struct Adjacent {
    std::size_t vertex;  // dense index
    std::size_t link;
  };
  std::span<const Adjacent> neighbours(std::size_t index) const { return adjacency_[index]; }

  DelayUs link_weight(const Link& l, PathMetric metric) const {
    return metric == PathMetric::delay ? l.delay_us : 1;
  }

  /// Single-source shortest distances over dense indices; -1 marks unreachable.
  std::vector<DelayUs> distances_from(VertexId source, PathMetric metric = PathMetric::delay) const;
  /// Link indices along one deterministic shortest path from a to b.
  std::vector<std::size_t> shortest_path_links(VertexId a, VertexId b,
                                               PathMetric metric = PathMetric::delay) const;

  /// Optional per-precedence delay multiplier; 1.0 (no effect) by default.
  void set_tos_delay_multiplier(std::uint8_t precedence, double factor);
  double tos_delay_multiplier(std::uint8_t precedence) const { return tos_multiplier_.at(precedence & 7u); }

  bool operator==(const UnderlayTopology& other) const;

 private:
  void add_vertex(VertexId v);

  std::vector<VertexId> routers_;
  std::map<NodeId, Host> hosts_;
  std::vector<Link> links_;
  std::vector<VertexId> vertices_;
  std::map<VertexId, std::size_t> index_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::array<double, 8> tos_multiplier_{1, 1, 1, 1, 1, 1, 1, 1};
};

/// Exact shortest-path sum between two hosts. Throws TopologyError for an
/// unknown host or a disconnected pair.
DelayUs shortest_path_delay(const UnderlayTopology& topology, NodeId a, NodeId b,
                            PathMetric metric = PathMetric::delay);

/// Gateway token of the LAN a host belongs to.
std::string lan_of(const UnderlayTopology& topology, NodeId node);

// --- Type of Service -------------------------------------------------------

/// The three precedence bits of the IPv4 TOS byte.
struct TosValue {
  std::uint8_t precedence = 0;

  constexpr std::uint8_t byte() const { return static_cast<std::uint8_t>(precedence * 32u); }
  std::string_view description() const;
  bool operator==(const TosValue&) const = default;
};

/// Throws std::out_of_range outside 0..7.
TosValue encode_tos(int precedence_bits);

struct Route {
  VertexId destination = 0;
  VertexId next_hop = 0;
  TosValue tos;  // routes learned without TOS support carry precedence 0
  std::uint32_t metric = 1;
};

enum class IcmpCode : std::uint8_t {
  network_unreachable_for_tos = 11,
  host_unreachable_for_tos = 12,
};

struct RouteDecision {
  std::optional<VertexId> next_hop;
  IcmpCode code = IcmpCode::host_unreachable_for_tos;  // meaningful only for drops

  bool forwards() const { return next_hop.has_value(); }
  static RouteDecision forward(VertexId hop) { return {hop, IcmpCode::host_unreachable_for_tos}; }
  static RouteDecision drop(IcmpCode c) { return {std::nullopt, c}; }
  bool operator==(const RouteDecision&) const = default;
};

/// Exact-TOS match with best metric, else the TOS-0 routes, else an ICMP drop.
/// Metric ties go to the lowest next hop. The drop is code 11 when the
/// destination is routable under some other TOS.
RouteDecision select_route(std::span<const Route> table, VertexId destination, TosValue packet_tos);

}  // namespace netrawalm
