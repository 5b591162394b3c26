#pragma once

#include <cstddef>
#include <cstdint>

#include "netrawalm/scenario.hpp"

namespace netrawalm {

struct GeneratorConfig {
  std::size_t node_count = 8;
  std::size_t router_count = 0;  // 0: derived from node_count
  DelayUs min_link_delay_us = 1 * kMicrosPerMilli;
  DelayUs max_link_delay_us = 20 * kMicrosPerMilli;
  DelayUs min_access_delay_us = 1 * kMicrosPerMilli;
  DelayUs max_access_delay_us = 5 * kMicrosPerMilli;
  DelayUs stream_duration_us = 200 * kMicrosPerMilli;
  DelayUs join_spacing_us = 10 * kMicrosPerMilli;
  /// Crash one random non-source member after the stream, if set.
  bool crash_one = false;
};

/// Random connected underlay with `node_count` hosts attached to backbone
/// routers (one LAN per router), random resources, and a script that joins
/// every host, starts the conference and streams from the best-provisioned
/// member. Parameters and bandwidth are copied from `base`; when `base`
/// carries routers they are reused as the backbone.
Scenario generate_scenario(const Scenario& base, const GeneratorConfig& config, std::uint64_t seed);

/// Every host hangs off a single router with the same access delay, each in
/// its own LAN, so all host pairs are equidistant.
Scenario generate_symmetric_scenario(std::size_t node_count, std::uint64_t free_bps, std::uint64_t application_bps,
                                     std::uint64_t seed);

}  // namespace netrawalm
