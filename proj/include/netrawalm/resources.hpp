#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netrawalm {

/// Identifier of an end host taking part in a scenario.
struct NodeId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }
inline std::string to_string(NodeId id) { return std::to_string(id.value); }

inline constexpr NodeId kNoNode{UINT32_MAX};

/// Resources advertised by one peer. Quantities are normalized: RAM in bytes,
/// CPU speed in hertz.
struct NodeProfile {
  NodeId node;
  std::uint64_t free_ram_bytes = 0;
  std::uint64_t cpu_hz = 0;
  std::uint32_t processor_count = 1;
  std::string gateway;
  std::string local_address;
  std::uint32_t hop_distance = 0;

  bool operator==(const NodeProfile&) const = default;
};

/// Sort key for "effective capacity". A greater key sits higher in the tree:
/// cpu speed, then free RAM, then processor count, then fewer hops to the
/// gateway, then the lower node id.
struct CapacityKey {
  std::uint64_t cpu_hz = 0;
  std::uint64_t free_ram_bytes = 0;
  std::uint32_t processor_count = 0;
  std::uint32_t hop_distance = 0;
  NodeId node;

  friend std::strong_ordering operator<=>(const CapacityKey& a, const CapacityKey& b) {
    if (auto c = a.cpu_hz <=> b.cpu_hz; c != 0) return c;
    if (auto c = a.free_ram_bytes <=> b.free_ram_bytes; c != 0) return c;
    if (auto c = a.processor_count <=> b.processor_count; c != 0) return c;
    if (auto c = b.hop_distance <=> a.hop_distance; c != 0) return c;
    return b.node <=> a.node;
  }
  friend bool operator==(const CapacityKey& a, const CapacityKey& b) { return (a <=> b) == 0; }
};

enum class CapacityOrder { a_first, b_first };

class ProfileError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

CapacityKey capacity_key(const NodeProfile& p);

/// Which of two peers belongs higher in the distribution tree.
CapacityOrder capacity_order(const NodeProfile& a, const NodeProfile& b);

/// True when `a` strictly outranks `b`.
inline bool outranks(const NodeProfile& a, const NodeProfile& b) {
  return capacity_key(a) > capacity_key(b);
}

/// Node ids sorted from highest to lowest effective capacity. Throws
/// ProfileError on empty input or duplicate ids.
std::vector<NodeId> build_priority_queue(std::span<const NodeProfile> profiles);

/// Dotted-quad IPv4 check used for gateway and local address tokens.
bool is_address_token(std::string_view token);

/// Throws ProfileError when a profile breaks its field invariants.
void validate_profile(const NodeProfile& p);

}  // namespace netrawalm

template <>
struct std::hash<netrawalm::NodeId> {
  std::size_t operator()(netrawalm::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
