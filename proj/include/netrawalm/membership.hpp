#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/resources.hpp"
#include "netrawalm/units.hpp"

namespace netrawalm {

enum class MembershipKind { join_query, join_response, remove, heartbeat, leader_transfer };

std::string_view to_string(MembershipKind kind);

struct MembershipMessage {
  MembershipKind kind = MembershipKind::heartbeat;
  NodeId sender;
  NodeId receiver;  // kNoNode when a Remove targets a cluster with no one left
  std::string payload;

  bool operator==(const MembershipMessage&) const = default;
};

/// One cluster of the layered hierarchy.
struct Cluster {
  std::uint32_t layer = 0;
  std::vector<NodeId> members;  // sorted
  NodeId leader = kNoNode;

  bool contains(NodeId n) const;
  bool operator==(const Cluster&) const = default;
};

class MembershipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Member minimizing its maximum delay to the others; ties go to the lower id.
NodeId select_leader(std::span<const NodeId> members, const DelayMatrix& delays);

/// Outcome of size refinement for one cluster.
struct Refinement {
  std::vector<Cluster> clusters;        // replaces the input cluster
  std::optional<std::size_t> absorbed;  // index into `siblings` merged away
};

/// Splits clusters above 3k-1 into two halves (sizes differ by at most one),
/// merges clusters below k into the sibling with the closest leader, and
/// otherwise returns the cluster unchanged. A merge that overflows is split.
Refinement refine(const Cluster& cluster, std::span<const Cluster> siblings, const DelayMatrix& delays,
                  std::uint32_t k);

/// Layered clusters with leaders. Layer 0 holds every member; the leader of
/// each layer-j cluster is a member of layer j+1; the top layer is a single
/// cluster with one member, the Tree Head.
class Hierarchy {
 public:
  explicit Hierarchy(std::uint32_t k = 3);

  std::uint32_t k() const { return k_; }
  bool empty() const { return layers_.empty(); }
  bool contains(NodeId n) const;
  std::size_t size() const;
  std::vector<NodeId> members() const;
  NodeId tree_head() const;
  std::size_t layer_count() const { return layers_.size(); }
  std::span<const Cluster> layer(std::size_t j) const { return layers_.at(j); }
  /// Highest layer the node appears in.
  std::size_t top_layer_of(NodeId n) const;
  /// Clusters containing the node, bottom-up.
  std::vector<Cluster> clusters_of(NodeId n) const;
  /// Everyone sharing at least one cluster with the node.
  std::set<NodeId> peers_of(NodeId n) const;
  /// Layer-0 cluster led by `leader`, if any.
  const Cluster* layer0_cluster_led_by(NodeId leader) const;
  std::uint64_t version() const { return version_; }

  /// Adds a new member to the layer-0 cluster led by `leader` (closest
  /// layer-0 leader when it no longer exists), then restores size bounds.
  void insert(NodeId joiner, NodeId leader, const DelayMatrix& delays);
  /// Removes a member from every layer, re-electing leaders where needed.
  void remove(NodeId node, const DelayMatrix& delays);
  /// Overrides a cluster leader (used after reconciliation).
  void set_leader(std::size_t layer, NodeId old_leader, NodeId new_leader, const DelayMatrix& delays);

  /// Empty when the layering, leadership and size invariants hold.
  std::vector<std::string> check_invariants() const;

  bool operator==(const Hierarchy& o) const { return k_ == o.k_ && layers_ == o.layers_; }

 private:
  void normalize_from(std::size_t layer, const DelayMatrix& delays);

  std::uint32_t k_;
  std::vector<std::vector<Cluster>> layers_;
  std::uint64_t version_ = 0;
};

/// One line per cluster, bottom layer first: `layer leader members`.
std::string dump_hierarchy(const Hierarchy& h);

/// Query/response sequence of a join and the layer-0 cluster chosen.
struct JoinPlan {
  std::vector<MembershipMessage> messages;
  NodeId target_leader = kNoNode;  // kNoNode: first member ever
  std::size_t descent_rounds = 0;
};

/// Layered descent from the Tree Head: at each layer the joiner queries every
/// member of the current cluster and moves to the closest one's cluster
/// below. Throws MembershipError if the joiner is already a member.
JoinPlan plan_join(const Hierarchy& h, NodeId joiner, const DelayMatrix& delays);

/// plan_join followed by insertion.
JoinPlan join(Hierarchy& h, NodeId joiner, const DelayMatrix& delays);

/// One Remove per cluster the leaver belongs to, then removal.
std::vector<MembershipMessage> graceful_leave(Hierarchy& h, NodeId leaver, const DelayMatrix& delays);

/// HeartBeat bookkeeping for one node's peers.
struct FailureDetectorState {
  DelayUs heartbeat_interval_us = 1000 * kMicrosPerMilli;
  std::uint32_t timeout_multiplier = 3;
  std::map<NodeId, SimTime> last_seen;
};

/// Peers whose last HeartBeat is strictly older than interval * multiplier.
std::set<NodeId> detect_failure(const FailureDetectorState& state, SimTime now);

/// One candidate's belief about a cluster it thinks it leads.
struct LeaderView {
  NodeId leader = kNoNode;
  std::set<NodeId> members;
};

struct Reconciliation {
  NodeId winner = kNoNode;
  LeaderView view;                          // adopted by both candidates
  std::vector<MembershipMessage> messages;  // one LeaderTransfer each way
};

/// Both candidates exchange LeaderTransfer; the leader is re-selected on the
/// union of their views. Throws MembershipError if a candidate is missing
/// from its own view.
Reconciliation reconcile_leaders(const LeaderView& a, const LeaderView& b, const DelayMatrix& delays);

}  // namespace netrawalm
