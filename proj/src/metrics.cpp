#include "netrawalm/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace netrawalm {

namespace {

double mean_of(const std::map<NodeId, double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [n, v] : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

StressResult compute_stress(const PacketTrace& trace, const UnderlayTopology& topology, PathMetric metric) {
  std::map<std::pair<NodeId, NodeId>, std::vector<std::size_t>> path_cache;
  std::map<std::uint64_t, std::map<std::size_t, std::uint32_t>> copies;  // packet -> link -> count
  for (const auto& hop : trace.hops) {
    auto key = std::make_pair(hop.from, hop.to);
    auto it = path_cache.find(key);
    if (it == path_cache.end()) {
      it = path_cache.emplace(key, topology.shortest_path_links(hop.from.value, hop.to.value, metric)).first;
    }
    auto& per_link = copies[hop.packet];
    for (auto link : it->second) ++per_link[link];
  }
  StressResult r;
  for (const auto& [packet, per_link] : copies) {
    for (const auto& [link, count] : per_link) {
      auto& slot = r.per_link[link];
      slot = std::max(slot, count);
      r.max_stress = std::max(r.max_stress, count);
    }
  }
  return r;
}

StretchResult compute_stretch(const OverlayTree& tree, const DelayMatrix& distances, NodeId source) {
  if (!tree.contains(source)) throw std::invalid_argument("source " + to_string(source) + " is not in the tree");
  StretchResult r;
  for (auto m : tree.members()) {
    if (m == source) continue;
    const auto path = tree.path(source, m);
    DelayUs overlay = 0;
    for (std::size_t i = 1; i < path.size(); ++i) overlay += distances.at(path[i - 1], path[i]);
    const DelayUs direct = distances.at(source, m);
    r.per_member[m] = direct == 0 ? 1.0 : static_cast<double>(overlay) / static_cast<double>(direct);
  }
  r.average = mean_of(r.per_member);
  return r;
}

StretchResult compute_stretch(const OverlayTree& tree, const UnderlayTopology& topology, NodeId source,
                              PathMetric metric) {
  return compute_stretch(tree, compute_delay_matrix(topology, metric, Execution::serial), source);
}

StretchResult stretch_from_trace(const PacketTrace& trace, const DelayMatrix& distances, PathMetric metric) {
  std::map<NodeId, std::pair<double, std::size_t>> acc;
  for (const auto& rc : trace.receipts) {
    const DelayUs overlay = metric == PathMetric::delay ? rc.overlay_delay_us : rc.overlay_hops;
    const DelayUs direct = distances.at(rc.source, rc.member);
    const double s = direct == 0 ? 1.0 : static_cast<double>(overlay) / static_cast<double>(direct);
    auto& [sum, count] = acc[rc.member];
    sum += s;
    ++count;
  }
  StretchResult r;
  for (const auto& [m, sc] : acc) r.per_member[m] = sc.first / static_cast<double>(sc.second);
  r.average = mean_of(r.per_member);
  return r;
}

MetricsReport metrics_from_trace(const PacketTrace& trace, const UnderlayTopology& topology,
                                 const DelayMatrix& distances, PathMetric metric) {
  MetricsReport m;
  auto stress = compute_stress(trace, topology, metric);
  m.stress_per_link = std::move(stress.per_link);
  m.max_stress = stress.max_stress;
  auto stretch = stretch_from_trace(trace, distances, metric);
  m.stretch_per_member = std::move(stretch.per_member);
  m.average_stretch = stretch.average;
  m.degenerate = m.stretch_per_member.empty();

  std::size_t expected = 0;
  for (const auto& e : trace.emissions) expected += e.expected_receivers;
  m.delivered_fraction =
      expected == 0 ? 0.0 : static_cast<double>(trace.receipts.size()) / static_cast<double>(expected);
  return m;
}

}  // namespace netrawalm
