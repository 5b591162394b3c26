#include "netrawalm/resources.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <set>

namespace netrawalm {

CapacityKey capacity_key(const NodeProfile& p) {
  return CapacityKey{p.cpu_hz, p.free_ram_bytes, p.processor_count, p.hop_distance, p.node};
}

CapacityOrder capacity_order(const NodeProfile& a, const NodeProfile& b) {
  return capacity_key(a) > capacity_key(b) ? CapacityOrder::a_first : CapacityOrder::b_first;
}

std::vector<NodeId> build_priority_queue(std::span<const NodeProfile> profiles) {
  if (profiles.empty()) throw ProfileError("priority queue needs at least one profile");

  std::set<NodeId> seen;
  std::priority_queue<CapacityKey> queue;
  for (const auto& p : profiles) {
    if (!seen.insert(p.node).second) throw ProfileError("duplicate node id " + to_string(p.node));
    queue.push(capacity_key(p));
  }

  std::vector<NodeId> order;
  order.reserve(profiles.size());
  while (!queue.empty()) {
    order.push_back(queue.top().node);
    queue.pop();
  }
  return order;
}

bool is_address_token(std::string_view token) {
  int parts = 0;
  std::size_t pos = 0;
  while (pos <= token.size()) {
    auto dot = token.find('.', pos);
    auto end = dot == std::string_view::npos ? token.size() : dot;
    auto octet = token.substr(pos, end - pos);
    if (octet.empty() || octet.size() > 3) return false;
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(octet.data(), octet.data() + octet.size(), v);
    if (ec != std::errc{} || ptr != octet.data() + octet.size() || v > 255) return false;
    ++parts;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return parts == 4;
}

void validate_profile(const NodeProfile& p) {
  if (p.processor_count < 1) throw ProfileError("node " + to_string(p.node) + ": processor count must be >= 1");
  if (!is_address_token(p.gateway)) {
    throw ProfileError("node " + to_string(p.node) + ": malformed gateway '" + p.gateway + "'");
  }
  if (!is_address_token(p.local_address)) {
    throw ProfileError("node " + to_string(p.node) + ": malformed local address '" + p.local_address + "'");
  }
}

}  // namespace netrawalm
