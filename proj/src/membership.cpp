#include "netrawalm/membership.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace netrawalm {

namespace {

std::string join_ids(std::span<const NodeId> ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out += ',';
    out += to_string(id);
  }
  return out.empty() ? "-" : out;
}

void sort_members(Cluster& c) {
  std::sort(c.members.begin(), c.members.end());
  c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
}

// Two halves seeded by the farthest pair; members go to the seed they are
// relatively closer to.
std::vector<Cluster> split(const Cluster& c, const DelayMatrix& d) {
  const auto& m = c.members;
  std::size_t su = 0;
  std::size_t sv = 1;
  DelayUs far = -1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      if (auto x = d.at(m[i], m[j]); x > far) {
        far = x;
        su = i;
        sv = j;
      }
    }
  }
  const NodeId u = m[su];
  const NodeId v = m[sv];
  std::vector<NodeId> rest;
  for (auto n : m) {
    if (n != u && n != v) rest.push_back(n);
  }
  std::sort(rest.begin(), rest.end(), [&](NodeId a, NodeId b) {
    const auto ka = d.at(a, u) - d.at(a, v);
    const auto kb = d.at(b, u) - d.at(b, v);
    return ka != kb ? ka < kb : a < b;
  });
  const std::size_t first_size = (m.size() + 1) / 2;
  Cluster a{c.layer, {u}, kNoNode};
  Cluster b{c.layer, {v}, kNoNode};
  for (std::size_t i = 0; i < rest.size(); ++i) (a.members.size() < first_size ? a : b).members.push_back(rest[i]);
  sort_members(a);
  sort_members(b);
  a.leader = select_leader(a.members, d);
  b.leader = select_leader(b.members, d);
  return {a, b};
}

}  // namespace

std::string_view to_string(MembershipKind kind) {
  switch (kind) {
    case MembershipKind::join_query: return "JoinQuery";
    case MembershipKind::join_response: return "JoinResponse";
    case MembershipKind::remove: return "Remove";
    case MembershipKind::heartbeat: return "HeartBeat";
    case MembershipKind::leader_transfer: return "LeaderTransfer";
  }
  return "?";
}

bool Cluster::contains(NodeId n) const { return std::binary_search(members.begin(), members.end(), n); }

NodeId select_leader(std::span<const NodeId> members, const DelayMatrix& delays) {
  if (members.empty()) throw MembershipError("cannot select a leader of an empty cluster");
  NodeId best = kNoNode;
  DelayUs best_ecc = -1;
  for (auto m : members) {
    DelayUs ecc = 0;
    for (auto o : members) ecc = std::max(ecc, delays.at(m, o));
    if (best_ecc < 0 || ecc < best_ecc || (ecc == best_ecc && m < best)) {
      best = m;
      best_ecc = ecc;
    }
  }
  return best;
}

Refinement refine(const Cluster& cluster, std::span<const Cluster> siblings, const DelayMatrix& delays,
                  std::uint32_t k) {
  Refinement r;
  if (cluster.members.empty()) return r;
  const std::size_t upper = 3 * static_cast<std::size_t>(k) - 1;
  const auto size = cluster.members.size();

  if (size > upper) {
    r.clusters = split(cluster, delays);
    return r;
  }
  if (size < k && !siblings.empty()) {
    std::size_t target = 0;
    for (std::size_t i = 1; i < siblings.size(); ++i) {
      const auto di = delays.at(cluster.leader, siblings[i].leader);
      const auto dt = delays.at(cluster.leader, siblings[target].leader);
      if (di < dt || (di == dt && siblings[i].leader < siblings[target].leader)) target = i;
    }
    Cluster merged{cluster.layer, cluster.members, kNoNode};
    merged.members.insert(merged.members.end(), siblings[target].members.begin(), siblings[target].members.end());
    sort_members(merged);
    merged.leader = select_leader(merged.members, delays);
    r.absorbed = target;
    if (merged.members.size() > upper) {
      r.clusters = split(merged, delays);
    } else {
      r.clusters = {merged};
    }
    return r;
  }
  r.clusters = {cluster};
  return r;
}

Hierarchy::Hierarchy(std::uint32_t k) : k_(k) {
  if (k == 0) throw MembershipError("cluster parameter k must be positive");
}

bool Hierarchy::contains(NodeId n) const {
  if (layers_.empty()) return false;
  return std::any_of(layers_[0].begin(), layers_[0].end(), [n](const Cluster& c) { return c.contains(n); });
}

std::size_t Hierarchy::size() const {
  if (layers_.empty()) return 0;
  return std::accumulate(layers_[0].begin(), layers_[0].end(), std::size_t{0},
                         [](std::size_t s, const Cluster& c) { return s + c.members.size(); });
}

std::vector<NodeId> Hierarchy::members() const {
  std::vector<NodeId> out;
  if (layers_.empty()) return out;
  for (const auto& c : layers_[0]) out.insert(out.end(), c.members.begin(), c.members.end());
  std::sort(out.begin(), out.end());
  return out;
}

NodeId Hierarchy::tree_head() const {
  if (layers_.empty()) return kNoNode;
  return layers_.back().front().leader;
}

std::size_t Hierarchy::top_layer_of(NodeId n) const {
  std::size_t top = 0;
  bool found = false;
  for (std::size_t j = 0; j < layers_.size(); ++j) {
    for (const auto& c : layers_[j]) {
      if (c.contains(n)) {
        top = j;
        found = true;
      }
    }
  }
  if (!found) throw MembershipError("node " + netrawalm::to_string(n) + " is not a member");
  return top;
}

std::vector<Cluster> Hierarchy::clusters_of(NodeId n) const {
  std::vector<Cluster> out;
  for (const auto& layer : layers_) {
    for (const auto& c : layer) {
      if (c.contains(n)) out.push_back(c);
    }
  }
  return out;
}

std::set<NodeId> Hierarchy::peers_of(NodeId n) const {
  std::set<NodeId> out;
  for (const auto& c : clusters_of(n)) out.insert(c.members.begin(), c.members.end());
  out.erase(n);
  return out;
}

const Cluster* Hierarchy::layer0_cluster_led_by(NodeId leader) const {
  if (layers_.empty()) return nullptr;
  for (const auto& c : layers_[0]) {
    if (c.leader == leader) return &c;
  }
  return nullptr;
}

void Hierarchy::insert(NodeId joiner, NodeId leader, const DelayMatrix& delays) {
  if (contains(joiner)) throw MembershipError("node " + netrawalm::to_string(joiner) + " is already a member");
  ++version_;
  if (layers_.empty()) {
    layers_.push_back({Cluster{0, {joiner}, joiner}});
    return;
  }
  auto& bottom = layers_[0];
  auto it = std::find_if(bottom.begin(), bottom.end(), [leader](const Cluster& c) { return c.leader == leader; });
  if (it == bottom.end()) {
    it = std::min_element(bottom.begin(), bottom.end(), [&](const Cluster& a, const Cluster& b) {
      const auto da = delays.at(joiner, a.leader);
      const auto db = delays.at(joiner, b.leader);
      return da != db ? da < db : a.leader < b.leader;
    });
  }
  it->members.push_back(joiner);
  sort_members(*it);
  normalize_from(0, delays);
}

void Hierarchy::remove(NodeId node, const DelayMatrix& delays) {
  if (!contains(node)) throw MembershipError("node " + netrawalm::to_string(node) + " is not a member");
  ++version_;
  for (auto& layer : layers_) {
    for (auto& c : layer) std::erase(c.members, node);
  }
  if (size() == 0) {
    layers_.clear();
    return;
  }
  normalize_from(0, delays);
}

void Hierarchy::set_leader(std::size_t layer, NodeId old_leader, NodeId new_leader, const DelayMatrix& delays) {
  auto& clusters = layers_.at(layer);
  auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) { return c.leader == old_leader; });
  if (it == clusters.end()) throw MembershipError("no cluster led by " + netrawalm::to_string(old_leader));
  if (!it->contains(new_leader)) throw MembershipError("new leader is not a cluster member");
  if (old_leader == new_leader) return;
  ++version_;
  it->leader = new_leader;
  normalize_from(layer, delays);
}

void Hierarchy::normalize_from(std::size_t start, const DelayMatrix& delays) {
  const std::size_t upper = 3 * static_cast<std::size_t>(k_) - 1;
  for (std::size_t j = start; j < layers_.size(); ++j) {
    auto& layer = layers_[j];
    std::erase_if(layer, [](const Cluster& c) { return c.members.empty(); });
    for (auto& c : layer) {
      c.layer = static_cast<std::uint32_t>(j);
      if (!c.contains(c.leader)) c.leader = select_leader(c.members, delays);
    }

    // Split or merge until every cluster is within bounds (a layer with a
    // single cluster may stay small).
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < layer.size(); ++i) {
        const auto n = layer[i].members.size();
        if (n <= upper && (n >= k_ || layer.size() == 1)) continue;
        std::vector<Cluster> siblings;
        for (std::size_t s = 0; s < layer.size(); ++s) {
          if (s != i) siblings.push_back(layer[s]);
        }
        auto r = refine(layer[i], siblings, delays, k_);
        if (r.absorbed) siblings.erase(siblings.begin() + static_cast<std::ptrdiff_t>(*r.absorbed));
        siblings.insert(siblings.end(), r.clusters.begin(), r.clusters.end());
        layer = std::move(siblings);
        changed = true;
        break;
      }
    }
    std::sort(layer.begin(), layer.end(), [](const Cluster& a, const Cluster& b) { return a.leader < b.leader; });

    if (layer.size() == 1) {
      const auto& only = layer.front();
      if (only.members.size() == 1) {
        layers_.resize(j + 1);
      } else {
        layers_.resize(j + 2);
        layers_[j + 1] = {Cluster{static_cast<std::uint32_t>(j + 1), {only.leader}, only.leader}};
      }
      return;
    }

    // The layer above must hold exactly this layer's leaders.
    std::vector<NodeId> leaders;
    for (const auto& c : layer) leaders.push_back(c.leader);
    std::sort(leaders.begin(), leaders.end());
    if (layers_.size() == j + 1) layers_.push_back({});
    auto& above = layers_[j + 1];
    for (auto& c : above) {
      std::erase_if(c.members, [&](NodeId n) { return !std::binary_search(leaders.begin(), leaders.end(), n); });
    }
    std::erase_if(above, [](const Cluster& c) { return c.members.empty(); });
    for (auto& c : above) {
      if (!c.contains(c.leader)) c.leader = select_leader(c.members, delays);
    }
    for (auto n : leaders) {
      const bool present = std::any_of(above.begin(), above.end(), [n](const Cluster& c) { return c.contains(n); });
      if (present) continue;
      if (above.empty()) {
        above.push_back(Cluster{static_cast<std::uint32_t>(j + 1), {n}, n});
        continue;
      }
      auto best = std::min_element(above.begin(), above.end(), [&](const Cluster& a, const Cluster& b) {
        const auto da = delays.at(n, a.leader);
        const auto db = delays.at(n, b.leader);
        return da != db ? da < db : a.leader < b.leader;
      });
      best->members.push_back(n);
      sort_members(*best);
    }
  }
}

std::vector<std::string> Hierarchy::check_invariants() const {
  std::vector<std::string> v;
  if (layers_.empty()) return v;
  const std::size_t upper = 3 * static_cast<std::size_t>(k_) - 1;

  std::set<NodeId> seen;
  for (const auto& c : layers_[0]) {
    for (auto n : c.members) {
      if (!seen.insert(n).second) v.push_back("node " + netrawalm::to_string(n) + " in two layer-0 clusters");
    }
  }
  for (std::size_t j = 0; j < layers_.size(); ++j) {
    const auto& layer = layers_[j];
    if (layer.empty()) v.push_back("layer " + std::to_string(j) + " is empty");
    for (const auto& c : layer) {
      if (c.members.empty()) v.push_back("empty cluster at layer " + std::to_string(j));
      if (!std::is_sorted(c.members.begin(), c.members.end())) v.push_back("unsorted cluster");
      if (!c.contains(c.leader)) v.push_back("leader outside its cluster at layer " + std::to_string(j));
      if (c.layer != j) v.push_back("cluster layer tag mismatch");
      if (c.members.size() > upper) v.push_back("cluster above 3k-1 at layer " + std::to_string(j));
      if (c.members.size() < k_ && layer.size() > 1) v.push_back("cluster below k at layer " + std::to_string(j));
    }
    if (j == 0) continue;
    std::set<NodeId> here;
    for (const auto& c : layer) here.insert(c.members.begin(), c.members.end());
    std::set<NodeId> leaders_below;
    for (const auto& c : layers_[j - 1]) leaders_below.insert(c.leader);
    if (here != leaders_below) v.push_back("layer " + std::to_string(j) + " differs from the leaders below it");
    std::set<NodeId> below;
    for (const auto& c : layers_[j - 1]) below.insert(c.members.begin(), c.members.end());
    for (auto n : here) {
      if (!below.contains(n)) v.push_back("node " + netrawalm::to_string(n) + " skips a lower layer");
    }
  }
  const auto& top = layers_.back();
  if (top.size() != 1) {
    v.push_back("top layer has more than one cluster");
  } else if (top.front().members.size() != 1) {
    v.push_back("top cluster is not a single Tree Head");
  }
  for (std::size_t j = 0; j + 1 < layers_.size(); ++j) {
    if (layers_[j].size() == 1 && j + 2 != layers_.size()) v.push_back("lone cluster below a non-top layer");
  }
  return v;
}

JoinPlan plan_join(const Hierarchy& h, NodeId joiner, const DelayMatrix& delays) {
  if (h.contains(joiner)) throw MembershipError("node " + netrawalm::to_string(joiner) + " is already a member");
  JoinPlan plan;
  if (h.empty()) return plan;

  const auto head = h.tree_head();
  try {
    (void)delays.at(joiner, head);
  } catch (const TopologyError&) {
    throw MembershipError("tree head " + netrawalm::to_string(head) + " is unreachable");
  }
  using K = MembershipKind;
  const auto top = h.layer_count() - 1;
  plan.messages.push_back({K::join_query, joiner, head, "top"});
  plan.messages.push_back(
      {K::join_response, head, joiner, "layer=" + std::to_string(top) + " members=" + join_ids(h.layer(top)[0].members)});

  Cluster current = h.layer(top)[0];
  for (std::size_t j = top; j > 0; --j) {
    NodeId closest = kNoNode;
    DelayUs best_rtt = -1;
    for (auto x : current.members) {
      const auto& below = *std::find_if(h.layer(j - 1).begin(), h.layer(j - 1).end(),
                                        [x](const Cluster& c) { return c.leader == x; });
      plan.messages.push_back({K::join_query, joiner, x, "layer=" + std::to_string(j)});
      plan.messages.push_back({K::join_response, x, joiner,
                               "layer=" + std::to_string(j - 1) + " members=" + join_ids(below.members)});
      const auto rtt = 2 * delays.at(joiner, x);
      if (best_rtt < 0 || rtt < best_rtt || (rtt == best_rtt && x < closest)) {
        best_rtt = rtt;
        closest = x;
      }
    }
    current = *std::find_if(h.layer(j - 1).begin(), h.layer(j - 1).end(),
                            [closest](const Cluster& c) { return c.leader == closest; });
    ++plan.descent_rounds;
  }
  plan.target_leader = current.leader;
  plan.messages.push_back({K::join_query, joiner, current.leader, "attach"});
  plan.messages.push_back({K::join_response, current.leader, joiner, "accepted"});
  return plan;
}

JoinPlan join(Hierarchy& h, NodeId joiner, const DelayMatrix& delays) {
  auto plan = plan_join(h, joiner, delays);
  h.insert(joiner, plan.target_leader, delays);
  return plan;
}

std::vector<MembershipMessage> graceful_leave(Hierarchy& h, NodeId leaver, const DelayMatrix& delays) {
  const auto clusters = h.clusters_of(leaver);
  if (clusters.empty()) throw MembershipError("node " + netrawalm::to_string(leaver) + " is not a member");

  std::string listing;
  for (const auto& c : clusters) {
    if (!listing.empty()) listing += ',';
    listing += "L" + std::to_string(c.layer) + ":" + netrawalm::to_string(c.leader);
  }
  std::vector<MembershipMessage> out;
  for (const auto& c : clusters) {
    NodeId to = c.leader;
    if (to == leaver) {
      std::vector<NodeId> rest;
      for (auto m : c.members) {
        if (m != leaver) rest.push_back(m);
      }
      to = rest.empty() ? kNoNode : select_leader(rest, delays);
    }
    out.push_back({MembershipKind::remove, leaver, to,
                   "layer=" + std::to_string(c.layer) + " clusters=" + listing});
  }
  h.remove(leaver, delays);
  return out;
}

std::set<NodeId> detect_failure(const FailureDetectorState& state, SimTime now) {
  const auto timeout = state.heartbeat_interval_us * static_cast<DelayUs>(state.timeout_multiplier);
  std::set<NodeId> out;
  for (const auto& [peer, seen] : state.last_seen) {
    if (now - seen > timeout) out.insert(peer);
  }
  return out;
}

Reconciliation reconcile_leaders(const LeaderView& a, const LeaderView& b, const DelayMatrix& delays) {
  if (!a.members.contains(a.leader) || !b.members.contains(b.leader)) {
    throw MembershipError("leader candidate missing from its own cluster view");
  }
  Reconciliation r;
  r.view.members = a.members;
  r.view.members.insert(b.members.begin(), b.members.end());
  const std::vector<NodeId> all(r.view.members.begin(), r.view.members.end());
  r.winner = select_leader(all, delays);
  r.view.leader = r.winner;
  const std::string payload = "winner=" + netrawalm::to_string(r.winner) + " view=" + join_ids(all);
  r.messages.push_back({MembershipKind::leader_transfer, a.leader, b.leader, payload});
  r.messages.push_back({MembershipKind::leader_transfer, b.leader, a.leader, payload});
  return r;
}

std::string dump_hierarchy(const Hierarchy& h) {
  std::string out;
  for (std::size_t j = 0; j < h.layer_count(); ++j) {
    for (const auto& c : h.layer(j)) {
      out += std::to_string(j) + ' ' + netrawalm::to_string(c.leader) + ' ';
      for (std::size_t i = 0; i < c.members.size(); ++i) out += (i ? "," : "") + netrawalm::to_string(c.members[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace netrawalm
