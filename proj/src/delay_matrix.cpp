#include "netrawalm/delay_matrix.hpp"

namespace netrawalm {

DelayMatrix::DelayMatrix(std::vector<NodeId> hosts, std::vector<DelayUs> values)
    : hosts_(std::move(hosts)), values_(std::move(values)) {
  for (std::size_t i = 0; i < hosts_.size(); ++i) slot_.emplace(hosts_[i], i);
}

DelayUs DelayMatrix::at(NodeId a, NodeId b) const {
  auto ia = slot_.find(a);
  auto ib = slot_.find(b);
  if (ia == slot_.end() || ib == slot_.end()) {
    throw TopologyError("delay lookup for unknown host " + to_string(ia == slot_.end() ? a : b));
  }
  const auto d = values_[ia->second * hosts_.size() + ib->second];
  if (d < 0) throw TopologyError("hosts " + to_string(a) + " and " + to_string(b) + " are disconnected");
  return d;
}

namespace {

void fill_row(const UnderlayTopology& topology, const std::vector<NodeId>& hosts, std::size_t row,
              PathMetric metric, std::vector<DelayUs>& out) {
  const auto dist = topology.distances_from(hosts[row].value, metric);
  const auto n = hosts.size();
  for (std::size_t col = 0; col < n; ++col) out[row * n + col] = dist[topology.index_of(hosts[col].value)];
}

}  // namespace

DelayMatrix delay_matrix_serial(const UnderlayTopology& topology, PathMetric metric) {
  auto hosts = topology.hosts();
  std::vector<DelayUs> values(hosts.size() * hosts.size(), -1);
  for (std::size_t row = 0; row < hosts.size(); ++row) fill_row(topology, hosts, row, metric, values);
  return DelayMatrix(std::move(hosts), std::move(values));
}

DelayMatrix delay_matrix_parallel(const UnderlayTopology& topology, PathMetric metric) {
  auto hosts = topology.hosts();
  std::vector<DelayUs> values(hosts.size() * hosts.size(), -1);
  const auto n = static_cast<std::ptrdiff_t>(hosts.size());
  // Rows are disjoint slices of `values`.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t row = 0; row < n; ++row) {
    fill_row(topology, hosts, static_cast<std::size_t>(row), metric, values);
  }
  return DelayMatrix(std::move(hosts), std::move(values));
}

DelayMatrix compute_delay_matrix(const UnderlayTopology& topology, PathMetric metric, Execution exec) {
  return exec == Execution::parallel ? delay_matrix_parallel(topology, metric) : delay_matrix_serial(topology, metric);
}

}  // namespace netrawalm
