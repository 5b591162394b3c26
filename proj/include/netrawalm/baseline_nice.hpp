#pragma once

#include <cstdint>
#include <span>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/membership.hpp"
#include "netrawalm/tree.hpp"

namespace netrawalm {

/// Delay-only hierarchical overlay used as the comparison baseline. Resources
/// are ignored and every node forwards one copy at a time.
struct BaselineConfig {
  std::uint32_t k = 3;
};

struct BaselineOverlay {
  Hierarchy hierarchy;
  OverlayTree control_tree;  // each cluster leader is the parent of its members
  OverlayTree chain;         // sequential data path from the source
};

/// Leader-to-member tree of a hierarchy, rooted at the Tree Head. Every node
/// hangs under the leader of the highest cluster it belongs to but does not lead.
OverlayTree leader_tree(const Hierarchy& h);

/// Preorder walk of `tree` re-rooted at `source`, visiting neighbours by delay
/// from the current node (ties to the lower id), laid out as a chain.
OverlayTree sequential_chain(const OverlayTree& tree, NodeId source, const DelayMatrix& delays);

/// Joins `members` in id order, then derives the chain from `source`.
BaselineOverlay build_baseline_overlay(std::span<const NodeId> members, NodeId source, const DelayMatrix& delays,
                                       const BaselineConfig& config = {});

}  // namespace netrawalm
