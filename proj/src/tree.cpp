#include "netrawalm/tree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

namespace netrawalm {

namespace {

// Maximum number of nodes allowed at a depth (root depth 1).
std::uint64_t level_capacity(std::uint32_t depth) {
  if (depth == 0) return 0;
  if (depth > 63) return UINT64_MAX;
  return std::uint64_t{1} << (depth - 1);
}

std::vector<NodeId> bfs_order(const OverlayTree& t) {
  std::vector<NodeId> order;
  if (t.empty()) return order;
  std::deque<NodeId> q{t.root};
  std::set<NodeId> seen{t.root};
  while (!q.empty()) {
    auto n = q.front();
    q.pop_front();
    order.push_back(n);
    for (auto c : t.children(n)) {
      if (seen.insert(c).second) q.push_back(c);
    }
  }
  return order;
}

void recompute_height(OverlayTree& t) {
  t.height = 0;
  for (const auto& [n, d] : t.depth_of) t.height = std::max(t.height, d);
}

// Shallowest-first attachment under the level and fan-out bounds. Parents at
// equal depth are tried in the order they joined the tree.
class Attacher {
 public:
  Attacher(OverlayTree& tree, std::uint32_t fanout) : tree_(tree), fanout_(fanout) {
    for (auto n : bfs_order(tree_)) {
      order_.push_back(n);
      ++level_count_[tree_.depth_of.at(n)];
    }
  }

  void place_root(NodeId n) {
    tree_.root = n;
    tree_.depth_of[n] = 1;
    tree_.children_of[n];
    order_.push_back(n);
    ++level_count_[1];
  }

  void place_under(NodeId n, NodeId parent, std::size_t index) {
    auto& siblings = tree_.children_of[parent];
    siblings.insert(siblings.begin() + static_cast<std::ptrdiff_t>(std::min(index, siblings.size())), n);
    tree_.parent_of[n] = parent;
    const auto d = tree_.depth_of.at(parent) + 1;
    tree_.depth_of[n] = d;
    tree_.children_of[n];
    ++level_count_[d];
    order_.push_back(n);
  }

  bool attach(NodeId n, const std::function<bool(NodeId)>& eligible) {
    const NodeId* best = nullptr;
    std::uint32_t best_depth = 0;
    for (const auto& c : order_) {
      if (!eligible(c)) continue;
      const auto d = tree_.depth_of.at(c);
      if (best && d >= best_depth) continue;
      if (tree_.children_of[c].size() >= fanout_) continue;
      if (level_count_[d + 1] >= level_capacity(d + 1)) continue;
      best = &c;
      best_depth = d;
    }
    if (!best) return false;
    const NodeId parent = *best;
    place_under(n, parent, SIZE_MAX);
    return true;
  }

 private:
  OverlayTree& tree_;
  std::uint32_t fanout_;
  std::vector<NodeId> order_;
  std::map<std::uint32_t, std::uint64_t> level_count_;
};

std::map<NodeId, const NodeProfile*> index_profiles(std::span<const NodeProfile> profiles) {
  std::map<NodeId, const NodeProfile*> out;
  for (const auto& p : profiles) {
    if (!out.emplace(p.node, &p).second) throw ProfileError("duplicate node id " + to_string(p.node));
  }
  return out;
}

bool has_ancestor(const OverlayTree& t, NodeId n, NodeId ancestor) {
  for (auto a = n;;) {
    if (a == ancestor) return true;
    auto it = t.parent_of.find(a);
    if (it == t.parent_of.end()) return false;
    a = it->second;
  }
}

// Same-LAN parents first; otherwise anywhere below the LAN's header.
bool attach_member(Attacher& attacher, const OverlayTree& t, NodeId n, const std::string& lan) {
  if (attacher.attach(n, [&](NodeId c) { return t.lan_of.contains(c) && t.lan_of.at(c) == lan; })) return true;
  auto h = t.headers.find(lan);
  if (h == t.headers.end() || !t.contains(h->second)) return false;
  return attacher.attach(n, [&](NodeId c) { return has_ancestor(t, c, h->second); });
}

void collect_subtree(const OverlayTree& t, NodeId n, std::vector<NodeId>& out) {
  for (auto c : t.children(n)) {
    out.push_back(c);
    collect_subtree(t, c, out);
  }
}

}  // namespace

FanoutThreshold compute_fanout_threshold(std::uint64_t free_bps, std::uint64_t app_bps) {
  if (app_bps == 0) throw std::invalid_argument("application bandwidth must be positive");
  const auto p = free_bps / app_bps;
  if (p == 0) {
    throw InsufficientBandwidth("free bandwidth " + std::to_string(free_bps) +
                                " bps cannot carry one stream of " + std::to_string(app_bps) + " bps");
  }
  return FanoutThreshold{static_cast<std::uint32_t>(std::min<std::uint64_t>(p, UINT32_MAX)), free_bps, app_bps};
}

bool needs_tree(std::size_t participants, const FanoutThreshold& threshold) { return participants > threshold.p; }

bool OverlayTree::is_header(NodeId n) const {
  return std::any_of(headers.begin(), headers.end(), [n](const auto& kv) { return kv.second == n; });
}

std::vector<NodeId> OverlayTree::members() const {
  std::vector<NodeId> out;
  out.reserve(depth_of.size());
  for (const auto& [n, d] : depth_of) out.push_back(n);
  return out;
}

const std::vector<NodeId>& OverlayTree::children(NodeId n) const {
  static const std::vector<NodeId> kNone;
  auto it = children_of.find(n);
  return it == children_of.end() ? kNone : it->second;
}

std::vector<NodeId> OverlayTree::neighbours(NodeId n) const {
  std::vector<NodeId> out;
  if (auto it = parent_of.find(n); it != parent_of.end()) out.push_back(it->second);
  const auto& c = children(n);
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<NodeId> OverlayTree::path(NodeId from, NodeId to) const {
  if (!contains(from) || !contains(to)) throw std::invalid_argument("path endpoint not in tree");
  std::vector<NodeId> up{from};
  std::vector<NodeId> down{to};
  auto a = from;
  auto b = to;
  auto step = [this](NodeId& n, std::vector<NodeId>& trail) {
    n = parent_of.at(n);
    trail.push_back(n);
  };
  while (depth_of.at(a) > depth_of.at(b)) step(a, up);
  while (depth_of.at(b) > depth_of.at(a)) step(b, down);
  while (a != b) {
    step(a, up);
    step(b, down);
  }
  down.pop_back();  // the common ancestor is already in `up`
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

std::map<std::string, NodeId> elect_headers(std::span<const NodeProfile> profiles, const UnderlayTopology& topology) {
  std::map<std::string, const NodeProfile*> best;
  for (const auto& p : profiles) {
    const auto& lan = topology.lan_of(p.node);
    auto [it, inserted] = best.emplace(lan, &p);
    if (!inserted && outranks(p, *it->second)) it->second = &p;
  }
  std::map<std::string, NodeId> out;
  for (const auto& [lan, p] : best) out.emplace(lan, p->node);
  return out;
}

TreeBuild build_tree(std::span<const NodeProfile> profiles, const UnderlayTopology& topology,
                     const FanoutThreshold& threshold) {
  const auto queue = build_priority_queue(profiles);
  TreeBuild out;
  auto& t = out.tree;
  t.fanout = threshold.p;
  t.headers = elect_headers(profiles, topology);
  for (const auto& p : profiles) t.lan_of[p.node] = topology.lan_of(p.node);

  Attacher attacher(t, threshold.p);
  attacher.place_root(queue.front());  // the global maximum always heads its LAN

  auto is_header = [&t](NodeId n) { return t.is_header(n); };
  for (auto n : queue) {
    if (n == t.root || !is_header(n)) continue;
    if (!attacher.attach(n, is_header)) out.rejected.push_back(n);
  }
  for (auto n : queue) {
    if (is_header(n)) continue;
    if (!attach_member(attacher, t, n, t.lan_of.at(n))) out.rejected.push_back(n);
  }

  for (auto n : out.rejected) {
    t.lan_of.erase(n);
    std::erase_if(t.headers, [n](const auto& kv) { return kv.second == n; });
  }
  recompute_height(t);
  return out;
}

OverlayTree build_tree_strict(std::span<const NodeProfile> profiles, const UnderlayTopology& topology,
                              const FanoutThreshold& threshold) {
  auto built = build_tree(profiles, topology, threshold);
  if (!built.rejected.empty()) throw PlacementError(built.rejected.front());
  return std::move(built.tree);
}

TreeBuild replace_failed_interior(const OverlayTree& tree, NodeId failed, std::span<const NodeProfile> profiles) {
  if (!tree.contains(failed)) throw std::invalid_argument("node " + to_string(failed) + " is not in the tree");
  if (failed == tree.root) {
    throw std::invalid_argument("root failure is resolved by leader selection, not interior repair");
  }
  const auto by_id = index_profiles(profiles);
  auto key_of = [&](NodeId n) {
    auto it = by_id.find(n);
    if (it == by_id.end()) throw ProfileError("no profile for node " + to_string(n));
    return capacity_key(*it->second);
  };

  std::vector<NodeId> subtree;
  collect_subtree(tree, failed, subtree);

  TreeBuild out;
  auto& t = out.tree;
  t = tree;
  const auto parent = tree.parent_of.at(failed);
  auto& siblings = t.children_of[parent];
  const auto slot = static_cast<std::size_t>(std::find(siblings.begin(), siblings.end(), failed) - siblings.begin());
  siblings.erase(siblings.begin() + static_cast<std::ptrdiff_t>(slot));

  const std::string failed_lan = tree.lan_of.contains(failed) ? tree.lan_of.at(failed) : std::string{};
  const bool failed_was_header = tree.is_header(failed);
  std::map<NodeId, std::string> lan_cache;
  for (auto n : subtree) lan_cache[n] = tree.lan_of.contains(n) ? tree.lan_of.at(n) : std::string{};
  for (auto n : subtree) {
    t.parent_of.erase(n);
    t.children_of.erase(n);
    t.depth_of.erase(n);
  }
  t.parent_of.erase(failed);
  t.children_of.erase(failed);
  t.depth_of.erase(failed);
  t.lan_of.erase(failed);
  if (failed_was_header) t.headers.erase(failed_lan);

  if (subtree.empty()) {
    recompute_height(t);
    return out;
  }

  std::sort(subtree.begin(), subtree.end(), [&](NodeId a, NodeId b) { return key_of(a) > key_of(b); });
  if (failed_was_header) {
    for (auto n : subtree) {
      if (lan_cache.at(n) == failed_lan) {
        t.headers[failed_lan] = n;  // first in priority order = LAN maximum
        break;
      }
    }
  }
  // Headers outrank everyone else for the vacated slot, since headers may
  // only hang below headers. A non-header's subtree holds no headers.
  auto first_header = std::find_if(subtree.begin(), subtree.end(), [&t](NodeId n) { return t.is_header(n); });
  const NodeId promoted = first_header != subtree.end() ? *first_header : subtree.front();

  Attacher attacher(t, tree.fanout);
  attacher.place_under(promoted, parent, slot);

  auto is_header = [&t](NodeId n) { return t.is_header(n); };
  std::vector<NodeId> orphans;
  std::copy_if(subtree.begin(), subtree.end(), std::back_inserter(orphans), [promoted](NodeId n) { return n != promoted; });
  for (auto n : orphans) {
    if (!is_header(n)) continue;
    if (!attacher.attach(n, is_header)) out.rejected.push_back(n);
  }
  for (auto n : orphans) {
    if (is_header(n)) continue;
    if (!attach_member(attacher, t, n, lan_cache.at(n))) out.rejected.push_back(n);
  }
  for (auto n : out.rejected) {
    t.lan_of.erase(n);
    std::erase_if(t.headers, [n](const auto& kv) { return kv.second == n; });
  }
  recompute_height(t);
  return out;
}

OverlayTree make_star(NodeId source, std::span<const NodeId> members) {
  OverlayTree t;
  t.root = source;
  t.depth_of[source] = 1;
  t.children_of[source];
  for (auto m : members) {
    if (m == source || t.contains(m)) continue;
    t.children_of[source].push_back(m);
    t.children_of[m];
    t.parent_of[m] = source;
    t.depth_of[m] = 2;
  }
  recompute_height(t);
  return t;
}

OverlayTree make_rooted(NodeId root, std::span<const std::pair<NodeId, NodeId>> child_parent_edges) {
  OverlayTree t;
  t.root = root;
  t.children_of[root];
  t.depth_of[root] = 1;
  for (const auto& [child, parent] : child_parent_edges) {
    if (child == root) throw std::invalid_argument("root cannot have a parent");
    if (!t.parent_of.emplace(child, parent).second) {
      throw std::invalid_argument("node " + to_string(child) + " has two parents");
    }
    t.children_of[parent].push_back(child);
    t.children_of[child];
  }
  for (auto n : bfs_order(t)) {
    if (n != root) t.depth_of[n] = t.depth_of.at(t.parent_of.at(n)) + 1;
  }
  if (t.depth_of.size() != t.children_of.size()) throw std::invalid_argument("edges do not form a tree from the root");
  recompute_height(t);
  return t;
}

std::vector<std::string> check_tree_structure(const OverlayTree& t) {
  std::vector<std::string> v;
  if (t.empty()) return v;
  if (!t.contains(t.root)) return {"root is not a member"};
  if (t.parent_of.contains(t.root)) v.push_back("root has a parent");
  if (t.depth_of.at(t.root) != 1) v.push_back("root depth is not 1");

  for (const auto& [n, d] : t.depth_of) {
    if (n == t.root) continue;
    auto it = t.parent_of.find(n);
    if (it == t.parent_of.end()) {
      v.push_back("node " + to_string(n) + " has no parent (second root)");
      continue;
    }
    if (!t.contains(it->second)) {
      v.push_back("node " + to_string(n) + " has a parent outside the tree");
      continue;
    }
    const auto& sib = t.children(it->second);
    if (std::count(sib.begin(), sib.end(), n) != 1) {
      v.push_back("parent " + to_string(it->second) + " does not list child " + to_string(n) + " exactly once");
    }
    if (d != t.depth_of.at(it->second) + 1) v.push_back("depth of " + to_string(n) + " is inconsistent");
  }
  for (const auto& [n, kids] : t.children_of) {
    for (auto c : kids) {
      auto it = t.parent_of.find(c);
      if (it == t.parent_of.end() || it->second != n) {
        v.push_back("child " + to_string(c) + " of " + to_string(n) + " points elsewhere");
      }
    }
  }
  if (t.parent_of.size() + 1 != t.depth_of.size()) v.push_back("parent map size does not match membership");

  const auto reach = bfs_order(t);
  if (reach.size() != t.size()) v.push_back("not every member is reachable from the root (cycle or forest)");

  std::uint32_t h = 0;
  for (const auto& [n, d] : t.depth_of) h = std::max(h, d);
  if (h != t.height) v.push_back("height does not equal the maximum depth");
  return v;
}

std::vector<std::string> check_tree_invariants(const OverlayTree& t, std::span<const NodeProfile> profiles) {
  auto v = check_tree_structure(t);
  if (!v.empty() || t.empty()) return v;
  const auto by_id = index_profiles(profiles);

  std::map<std::uint32_t, std::uint64_t> per_level;
  for (const auto& [n, d] : t.depth_of) ++per_level[d];
  for (const auto& [d, count] : per_level) {
    if (count > level_capacity(d)) {
      v.push_back("depth " + std::to_string(d) + " holds " + std::to_string(count) + " nodes");
    }
  }
  for (const auto& [n, kids] : t.children_of) {
    if (t.fanout > 0 && kids.size() > t.fanout) v.push_back("node " + to_string(n) + " exceeds fan-out");
  }

  std::map<std::string, std::vector<NodeId>> lans;
  for (auto n : t.members()) {
    auto it = t.lan_of.find(n);
    if (it == t.lan_of.end()) {
      v.push_back("node " + to_string(n) + " has no LAN");
      continue;
    }
    lans[it->second].push_back(n);
  }
  for (const auto& [lan, members] : lans) {
    auto h = t.headers.find(lan);
    if (h == t.headers.end()) {
      v.push_back("LAN " + lan + " has no header");
      continue;
    }
    NodeId best = members.front();
    for (auto m : members) {
      if (capacity_key(*by_id.at(m)) > capacity_key(*by_id.at(best))) best = m;
    }
    if (h->second != best) v.push_back("LAN " + lan + " header is not its capacity maximum");
  }
  for (const auto& [lan, h] : t.headers) {
    if (!lans.contains(lan)) v.push_back("header for empty LAN " + lan);
  }

  for (auto n : t.members()) {
    if (n == t.root) continue;
    const auto parent = t.parent_of.at(n);
    if (t.is_header(n)) {
      if (!t.is_header(parent)) v.push_back("header " + to_string(n) + " hangs below a non-header");
      continue;
    }
    auto h = t.headers.find(t.lan_of.at(n));
    if (h == t.headers.end() || !has_ancestor(t, parent, h->second)) {
      v.push_back("node " + to_string(n) + " is outside its header's subtree");
    }
  }
  return v;
}

std::string dump_tree(const OverlayTree& t) {
  std::ostringstream os;
  for (const auto& [n, d] : t.depth_of) {
    os << n << ' ' << d << ' ';
    if (auto it = t.parent_of.find(n); it != t.parent_of.end()) {
      os << it->second;
    } else {
      os << '-';
    }
    auto lan = t.lan_of.find(n);
    os << ' ' << (lan == t.lan_of.end() ? std::string("-") : lan->second) << ' ' << (t.is_header(n) ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace netrawalm
