#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netrawalm/resources.hpp"

namespace netrawalm {

enum class ControlKind {
  log_in,
  call,
  join_conference_p,
  join_conference_s,
  leave_conference,
  end_call,
  call_accepted,
  bye,
  // Server-originated notifications.
  conference_list,
  public_key,
  participant_left,
  rejected,
};

std::string_view to_string(ControlKind kind);

struct ControlMessage {
  ControlKind kind = ControlKind::log_in;
  std::string sender;      // user token, or "server"
  std::string recipient;   // user token, or "server"
  std::string conference;  // empty when not conference-scoped
  std::string payload;

  bool operator==(const ControlMessage&) const = default;
};

enum class Role { participant, spectator };

struct PeerSession {
  std::string user;
  NodeId node;
  std::map<std::string, Role> roles;  // conference -> role; empty when only authenticated
};

struct ConferenceState {
  std::string name;
  std::string host;
  std::set<std::string> allowed_participants;
  std::set<std::string> allowed_spectators;
  std::set<NodeId> participants;
  std::set<NodeId> spectators;
  std::map<NodeId, std::string> public_keys;
  std::map<NodeId, std::set<NodeId>> subscriptions;  // subscriber -> publishers
  std::map<NodeId, std::set<NodeId>> held_keys;      // holder -> publishers whose key it holds
};

enum class ConferenceErrc {
  bad_credentials,
  already_logged_in,
  not_authenticated,
  unknown_conference,
  not_allowed,
  already_in_conference,
  not_in_conference,
  spectator_cannot_publish,
  duplicate_conference,
  no_pending_call,
};

class ConferenceError : public std::runtime_error {
 public:
  ConferenceError(ConferenceErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ConferenceErrc code() const { return code_; }

 private:
  ConferenceErrc code_;
};

struct Credential {
  std::string user;
  std::string password;
  NodeId node;
};

/// Server-side registry of sessions and conferences. One control message is
/// processed at a time; a rejected request throws ConferenceError and leaves
/// the state untouched. Keys are opaque tokens.
class ConferenceServer {
 public:
  explicit ConferenceServer(std::vector<Credential> credentials, bool log_spectator_leave = false);

  void create_conference(const std::string& host, const std::string& name, std::set<std::string> participants,
                         std::set<std::string> spectators);

  /// Returns the names of on-going conferences.
  std::vector<std::string> login(const std::string& user, const std::string& password);
  void join_as_participant(const std::string& user, const std::string& conference, const std::string& public_key);
  void join_as_spectator(const std::string& user, const std::string& conference);
  void leave_conference(const std::string& user, const std::string& conference);
  /// Graceful exit (BYE): leaves every conference, then ends the session.
  void logout(const std::string& user);
  /// Same cleanup as logout for a peer that vanished without BYE.
  void drop_node(NodeId node);
  /// Spectators only receive; publishing from one is rejected.
  void publish(const std::string& user, const std::string& conference);

  void call(const std::string& caller, const std::string& callee);
  /// Places both parties in an ad-hoc two-member conference; returns its name.
  std::string accept_call(const std::string& callee, const std::string& caller);
  void end_call(const std::string& user, const std::string& peer);

  const std::map<std::string, ConferenceState>& conferences() const { return conferences_; }
  const std::map<std::string, PeerSession>& sessions() const { return sessions_; }
  std::vector<std::string> incident_log() const { return incidents_; }

  /// Messages emitted since the last drain.
  std::vector<ControlMessage> drain();
  const std::vector<ControlMessage>& pending() const { return outbox_; }

  /// Key coverage, subscription and authorization checks; empty when sound.
  std::vector<std::string> check_invariants() const;

 private:
  PeerSession& session(const std::string& user);
  ConferenceState& conference(const std::string& name);
  const std::string& user_of(NodeId node) const;
  void send(ControlKind kind, std::string from, std::string to, std::string conf, std::string payload);

  std::map<std::string, Credential> credentials_;
  std::map<std::string, PeerSession> sessions_;
  std::map<std::string, ConferenceState> conferences_;
  std::set<std::pair<std::string, std::string>> pending_calls_;  // (caller, callee)
  std::vector<ControlMessage> outbox_;
  std::vector<std::string> incidents_;
  bool log_spectator_leave_;
};

}  // namespace netrawalm
