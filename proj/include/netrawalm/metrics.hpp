#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/tree.hpp"
#include "netrawalm/underlay.hpp"

namespace netrawalm {

/// One overlay hop of one stream packet.
struct PacketHop {
  std::uint64_t packet = 0;
  NodeId source;
  NodeId from;
  NodeId to;
  SimTime sent = 0;
};

/// First arrival of a packet at a member, with the overlay path length it
/// travelled (sum of underlay shortest paths per hop) in both metrics.
struct PacketReceipt {
  std::uint64_t packet = 0;
  NodeId source;
  NodeId member;
  DelayUs overlay_delay_us = 0;
  DelayUs overlay_hops = 0;
  SimTime at = 0;
};

struct PacketEmission {
  std::uint64_t packet = 0;
  NodeId source;
  SimTime at = 0;
  std::size_t expected_receivers = 0;
};

struct PacketTrace {
  std::vector<PacketHop> hops;
  std::vector<PacketReceipt> receipts;
  std::vector<PacketEmission> emissions;
};

struct StressResult {
  std::map<std::size_t, std::uint32_t> per_link;  // link index -> max copies of one packet
  std::uint32_t max_stress = 0;
};

struct StretchResult {
  std::map<NodeId, double> per_member;
  double average = 0.0;
};

struct MetricsReport {
  std::map<std::size_t, std::uint32_t> stress_per_link;
  std::uint32_t max_stress = 0;
  std::map<NodeId, double> stretch_per_member;
  double average_stretch = 0.0;
  double delivered_fraction = 0.0;
  bool degenerate = true;  // no stretch samples

  bool operator==(const MetricsReport&) const = default;
};

/// Per link, the most copies of any single packet that crossed it. Overlay
/// hops are mapped to underlay links along shortest paths.
StressResult compute_stress(const PacketTrace& trace, const UnderlayTopology& topology,
                            PathMetric metric = PathMetric::delay);

/// Stretch of every member other than `source`: overlay path length along the
/// tree divided by the underlay shortest path from the source. Throws
/// std::invalid_argument if the source is not in the tree.
StretchResult compute_stretch(const OverlayTree& tree, const DelayMatrix& distances, NodeId source);
StretchResult compute_stretch(const OverlayTree& tree, const UnderlayTopology& topology, NodeId source,
                              PathMetric metric = PathMetric::delay);

/// Stretch per member averaged over every packet it received.
StretchResult stretch_from_trace(const PacketTrace& trace, const DelayMatrix& distances, PathMetric metric);

MetricsReport metrics_from_trace(const PacketTrace& trace, const UnderlayTopology& topology,
                                 const DelayMatrix& distances, PathMetric metric);

}  // namespace netrawalm
