#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netrawalm/conference.hpp"
#include "netrawalm/resources.hpp"
#include "netrawalm/underlay.hpp"
#include "netrawalm/units.hpp"

namespace netrawalm {

enum class Protocol { netrawalm, nice };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

struct SimParameters {
  std::uint64_t seed = 1;
  Protocol protocol = Protocol::netrawalm;
  std::uint32_t k = 3;
  DelayUs heartbeat_interval_us = 1000 * kMicrosPerMilli;
  std::uint32_t timeout_multiplier = 3;
  std::uint32_t join_retries = 3;
  std::optional<SimTime> end_time;
  DelayUs packet_interval_us = 40 * kMicrosPerMilli;
  double loss_probability = 0.0;
  PathMetric stretch_metric = PathMetric::delay;
  std::uint8_t data_precedence = 1;  // "Priority" class for stream packets
  std::uint64_t event_budget = 20'000'000;
  bool log_spectator_leave = false;

  bool operator==(const SimParameters&) const = default;
};

struct BandwidthSpec {
  std::uint64_t network_capacity_bps = 0;
  std::uint64_t free_bps = 0;
  std::uint64_t application_bps = 0;

  bool operator==(const BandwidthSpec&) const = default;
};

struct ConferenceSpec {
  std::string name;
  std::string host;
  std::set<std::string> participants;
  std::set<std::string> spectators;

  bool operator==(const ConferenceSpec&) const = default;
};

enum class ActionKind {
  node_join,
  node_leave,
  node_crash,
  start_conference,
  send_stream,
  set_bandwidth,
  move_host,
  login,
  logout,
  join_conference,
  leave_conference,
  call,
  accept_call,
  end_call,
};

struct ScriptAction {
  SimTime at = 0;
  ActionKind kind = ActionKind::node_join;
  NodeId node = kNoNode;  // join/leave/crash/stream source/conference source/move_host
  std::string user;
  std::string other;  // password, peer user, or conference name depending on kind
  std::string conference;
  std::string token;  // public key or gateway
  Role role = Role::participant;
  DelayUs duration_us = 0;
  DelayUs interval_us = 0;
  std::uint64_t free_bps = 0;
  std::uint64_t application_bps = 0;

  bool operator==(const ScriptAction&) const = default;
};

/// Everything needed for one deterministic run.
struct Scenario {
  std::string name;
  SimParameters params;
  UnderlayTopology topology;
  std::map<NodeId, std::string> labels;  // optional display names
  std::vector<NodeProfile> profiles;     // sorted by node id
  BandwidthSpec bandwidth;
  std::vector<Credential> users;
  std::vector<ConferenceSpec> conferences;
  std::vector<ScriptAction> script;  // non-decreasing time

  const NodeProfile& profile(NodeId n) const;
  bool operator==(const Scenario& o) const;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses and validates the sectioned text format. Throws ScenarioError with
/// every positioned problem found.
Scenario parse_scenario(std::string_view text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& scenario);

/// Resolves a bundled scenario name (e.g. "fig6_ring") or a file path.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

}  // namespace netrawalm
