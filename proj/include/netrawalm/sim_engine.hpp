#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrawalm/membership.hpp"
#include "netrawalm/metrics.hpp"
#include "netrawalm/scenario.hpp"
#include "netrawalm/tree.hpp"

namespace netrawalm {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Timeline of one crash. Times are -1 until the step happened.
struct RecoveryRecord {
  NodeId node;
  SimTime crashed = 0;
  SimTime detected = -1;
  NodeId detector = kNoNode;
  SimTime reconnected = -1;  // last re-attachment delivered
};

struct RunResult {
  std::vector<std::string> event_log;    // `time kind from to detail`
  std::vector<std::string> control_log;  // `time kind sender recipient conference payload`
  std::vector<std::string> warnings;
  PacketTrace trace;
  MetricsReport metrics;
  OverlayTree overlay;  // data overlay at the end of the run
  Hierarchy hierarchy;
  std::optional<NodeId> stream_source;
  std::vector<RecoveryRecord> recoveries;
  std::vector<std::pair<SimTime, NodeId>> joins_completed;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t messages_in_flight = 0;  // still queued when the run stopped
  std::uint64_t events_processed = 0;
  SimTime end_time = 0;
};

/// Runs the scenario to quiescence (or its end time). Identical scenarios
/// produce identical results. Throws SimulationError when the event budget
/// is exhausted.
RunResult run_simulation(const Scenario& scenario);

std::string join_lines(const std::vector<std::string>& lines);

}  // namespace netrawalm
