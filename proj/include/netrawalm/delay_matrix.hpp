#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "netrawalm/underlay.hpp"

namespace netrawalm {

enum class Execution { serial, parallel };

/// All-pairs host-to-host shortest-path distances. Immutable after
/// construction, so concurrent readers need no locking.
class DelayMatrix {
 public:
  DelayMatrix() = default;
  DelayMatrix(std::vector<NodeId> hosts, std::vector<DelayUs> values);

  /// Throws TopologyError for an unknown host or a disconnected pair.
  DelayUs at(NodeId a, NodeId b) const;
  bool contains(NodeId n) const { return slot_.contains(n); }
  const std::vector<NodeId>& hosts() const { return hosts_; }
  const std::vector<DelayUs>& values() const { return values_; }

  bool operator==(const DelayMatrix& o) const { return hosts_ == o.hosts_ && values_ == o.values_; }

 private:
  std::vector<NodeId> hosts_;
  std::map<NodeId, std::size_t> slot_;
  std::vector<DelayUs> values_;  // row-major, -1 when unreachable
};

/// Reference kernel: one Dijkstra per host, in order.
DelayMatrix delay_matrix_serial(const UnderlayTopology& topology, PathMetric metric = PathMetric::delay);
/// OpenMP kernel: sources distributed across threads; identical output.
DelayMatrix delay_matrix_parallel(const UnderlayTopology& topology, PathMetric metric = PathMetric::delay);

DelayMatrix compute_delay_matrix(const UnderlayTopology& topology, PathMetric metric = PathMetric::delay,
                                 Execution exec = Execution::parallel);

}  // namespace netrawalm
