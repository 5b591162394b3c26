#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrawalm/resources.hpp"
#include "netrawalm/underlay.hpp"

namespace netrawalm {

/// Per-node child bound and the mesh-versus-tree decision point:
/// p = floor(free bandwidth / application bandwidth).
struct FanoutThreshold {
  std::uint32_t p = 1;
  std::uint64_t free_network_bps = 0;
  std::uint64_t application_bps = 0;

  bool operator==(const FanoutThreshold&) const = default;
};

class InsufficientBandwidth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument when app_bps is 0 and InsufficientBandwidth
/// when the quotient is 0.
FanoutThreshold compute_fanout_threshold(std::uint64_t free_bps, std::uint64_t app_bps);

/// True iff more participants than p; otherwise everyone talks directly.
bool needs_tree(std::size_t participants, const FanoutThreshold& threshold);

/// Rooted distribution tree. Depths start at 1 for the root.
struct OverlayTree {
  NodeId root = kNoNode;
  std::map<NodeId, NodeId> parent_of;
  std::map<NodeId, std::vector<NodeId>> children_of;
  std::map<NodeId, std::uint32_t> depth_of;
  std::map<std::string, NodeId> headers;  // gateway -> elected header
  std::map<NodeId, std::string> lan_of;
  std::uint32_t height = 0;
  std::uint32_t fanout = 0;  // p the tree was built with, 0 for mesh/chain overlays

  bool empty() const { return depth_of.empty(); }
  std::size_t size() const { return depth_of.size(); }
  bool contains(NodeId n) const { return depth_of.contains(n); }
  bool is_header(NodeId n) const;
  std::vector<NodeId> members() const;
  const std::vector<NodeId>& children(NodeId n) const;
  /// Tree neighbours: parent (if any) followed by children.
  std::vector<NodeId> neighbours(NodeId n) const;
  /// Node sequence along the tree from `from` to `to`, both inclusive.
  std::vector<NodeId> path(NodeId from, NodeId to) const;

  bool operator==(const OverlayTree&) const = default;
};

/// Result of building or repairing a tree; members that could not be placed
/// under the level and fan-out bounds are listed in `rejected`.
struct TreeBuild {
  OverlayTree tree;
  std::vector<NodeId> rejected;
};

class PlacementError : public std::runtime_error {
 public:
  explicit PlacementError(NodeId node)
      : std::runtime_error("placement failed for node " + to_string(node)), node_(node) {}
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

/// Capacity-maximal member of each LAN (LAN taken from the topology).
std::map<std::string, NodeId> elect_headers(std::span<const NodeProfile> profiles, const UnderlayTopology& topology);

/// Resource-aware tree: the best header is the root, other headers hang below
/// headers, and every non-header hangs below its LAN's header, preferring a
/// parent from its own LAN. Each member goes to the shallowest node that still
/// has room: a node at depth d accepts a child while it has fewer than p
/// children and depth d+1 holds fewer than 2^d nodes.
TreeBuild build_tree(std::span<const NodeProfile> profiles, const UnderlayTopology& topology,
                     const FanoutThreshold& threshold);

/// Throws PlacementError naming the first member that could not be placed.
OverlayTree build_tree_strict(std::span<const NodeProfile> profiles, const UnderlayTopology& topology,
                              const FanoutThreshold& threshold);

/// Removes a failed non-root member. Its capacity-maximal descendant takes the
/// vacated slot; the rest of its subtree is re-attached in priority order.
/// Throws std::invalid_argument for the root or a node not in the tree.
TreeBuild replace_failed_interior(const OverlayTree& tree, NodeId failed, std::span<const NodeProfile> profiles);

/// Direct distribution: every member is a child of `source`.
OverlayTree make_star(NodeId source, std::span<const NodeId> members);

/// Overlay from explicit parent links; children keep the order given.
OverlayTree make_rooted(NodeId root, std::span<const std::pair<NodeId, NodeId>> child_parent_edges);

/// Structural checks only: one root, consistent links, no cycles, depths.
std::vector<std::string> check_tree_structure(const OverlayTree& tree);

/// Structural checks plus the level, fan-out, header and LAN-confinement
/// rules. An empty result means the tree is valid.
std::vector<std::string> check_tree_invariants(const OverlayTree& tree, std::span<const NodeProfile> profiles);

/// One line per node, sorted by id: `id depth parent lan header`.
std::string dump_tree(const OverlayTree& tree);

}  // namespace netrawalm
