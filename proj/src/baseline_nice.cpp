#include "netrawalm/baseline_nice.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace netrawalm {

OverlayTree leader_tree(const Hierarchy& h) {
  if (h.empty()) return {};
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::set<NodeId> placed{h.tree_head()};
  for (std::size_t j = h.layer_count(); j-- > 0;) {
    for (const auto& c : h.layer(j)) {
      for (auto m : c.members) {
        if (m == c.leader || placed.contains(m)) continue;
        edges.emplace_back(m, c.leader);
        placed.insert(m);
      }
    }
  }
  return make_rooted(h.tree_head(), edges);
}

OverlayTree sequential_chain(const OverlayTree& tree, NodeId source, const DelayMatrix& delays) {
  if (!tree.contains(source)) throw std::invalid_argument("source " + to_string(source) + " is not in the tree");
  std::vector<NodeId> order;
  std::set<NodeId> seen;
  std::vector<NodeId> stack{source};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    order.push_back(n);
    auto next = tree.neighbours(n);
    std::erase_if(next, [&](NodeId x) { return seen.contains(x); });
    std::sort(next.begin(), next.end(), [&](NodeId a, NodeId b) {
      const auto da = delays.at(n, a);
      const auto db = delays.at(n, b);
      return da != db ? da < db : a < b;
    });
    // Closest neighbour is visited first.
    for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(*it);
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 1; i < order.size(); ++i) edges.emplace_back(order[i], order[i - 1]);
  return make_rooted(source, edges);
}

BaselineOverlay build_baseline_overlay(std::span<const NodeId> members, NodeId source, const DelayMatrix& delays,
                                       const BaselineConfig& config) {
  BaselineOverlay out{Hierarchy(config.k), {}, {}};
  std::vector<NodeId> ordered(members.begin(), members.end());
  std::sort(ordered.begin(), ordered.end());
  for (auto m : ordered) join(out.hierarchy, m, delays);
  out.control_tree = leader_tree(out.hierarchy);
  out.chain = sequential_chain(out.control_tree, source, delays);
  return out;
}

}  // namespace netrawalm
