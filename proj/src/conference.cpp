#include "netrawalm/conference.hpp"

#include <algorithm>

namespace netrawalm {

namespace {

const std::string kServer = "server";

}  // namespace

std::string_view to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::log_in: return "LOG_IN";
    case ControlKind::call: return "CALL";
    case ControlKind::join_conference_p: return "JOIN_CONFERENCE_P";
    case ControlKind::join_conference_s: return "JOIN_CONFERENCE_S";
    case ControlKind::leave_conference: return "LEAVE_CONFERENCE";
    case ControlKind::end_call: return "END_CALL";
    case ControlKind::call_accepted: return "CALL_ACCEPTED";
    case ControlKind::bye: return "BYE";
    case ControlKind::conference_list: return "CONFERENCE_LIST";
    case ControlKind::public_key: return "PUBLIC_KEY";
    case ControlKind::participant_left: return "PARTICIPANT_LEFT";
    case ControlKind::rejected: return "REJECTED";
  }
  return "?";
}

ConferenceServer::ConferenceServer(std::vector<Credential> credentials, bool log_spectator_leave)
    : log_spectator_leave_(log_spectator_leave) {
  for (auto& c : credentials) {
    auto user = c.user;
    credentials_.emplace(std::move(user), std::move(c));
  }
}

void ConferenceServer::send(ControlKind kind, std::string from, std::string to, std::string conf,
                            std::string payload) {
  outbox_.push_back({kind, std::move(from), std::move(to), std::move(conf), std::move(payload)});
}

std::vector<ControlMessage> ConferenceServer::drain() {
  std::vector<ControlMessage> out;
  out.swap(outbox_);
  return out;
}

PeerSession& ConferenceServer::session(const std::string& user) {
  auto it = sessions_.find(user);
  if (it == sessions_.end()) throw ConferenceError(ConferenceErrc::not_authenticated, user + " is not logged in");
  return it->second;
}

ConferenceState& ConferenceServer::conference(const std::string& name) {
  auto it = conferences_.find(name);
  if (it == conferences_.end()) throw ConferenceError(ConferenceErrc::unknown_conference, "no conference " + name);
  return it->second;
}

const std::string& ConferenceServer::user_of(NodeId node) const {
  for (const auto& [user, s] : sessions_) {
    if (s.node == node) return user;
  }
  static const std::string kUnknown = "?";
  return kUnknown;
}

void ConferenceServer::create_conference(const std::string& host, const std::string& name,
                                         std::set<std::string> participants, std::set<std::string> spectators) {
  if (conferences_.contains(name)) throw ConferenceError(ConferenceErrc::duplicate_conference, "conference exists: " + name);
  ConferenceState c;
  c.name = name;
  c.host = host;
  c.allowed_participants = std::move(participants);
  c.allowed_spectators = std::move(spectators);
  conferences_.emplace(name, std::move(c));
}

std::vector<std::string> ConferenceServer::login(const std::string& user, const std::string& password) {
  auto it = credentials_.find(user);
  if (it == credentials_.end() || it->second.password != password) {
    throw ConferenceError(ConferenceErrc::bad_credentials, "bad credentials for " + user);
  }
  if (sessions_.contains(user)) throw ConferenceError(ConferenceErrc::already_logged_in, user + " is already logged in");
  sessions_.emplace(user, PeerSession{user, it->second.node, {}});

  std::vector<std::string> names;
  for (const auto& [name, c] : conferences_) names.push_back(name);
  std::string listing;
  for (const auto& n : names) listing += (listing.empty() ? "" : ",") + n;
  send(ControlKind::log_in, user, kServer, "", "node=" + to_string(it->second.node));
  send(ControlKind::conference_list, kServer, user, "", listing.empty() ? "-" : listing);
  return names;
}

void ConferenceServer::join_as_participant(const std::string& user, const std::string& name,
                                           const std::string& public_key) {
  auto& s = session(user);
  auto& c = conference(name);
  if (!c.allowed_participants.contains(user)) {
    throw ConferenceError(ConferenceErrc::not_allowed, user + " is not an allowed participant of " + name);
  }
  if (s.roles.contains(name)) throw ConferenceError(ConferenceErrc::already_in_conference, user + " already in " + name);

  const NodeId me = s.node;
  send(ControlKind::join_conference_p, user, kServer, name, "key=" + public_key);
  for (auto p : c.participants) {
    send(ControlKind::public_key, kServer, user_of(p), name, "owner=" + user + " key=" + public_key);
    c.held_keys[p].insert(me);
    c.subscriptions[p].insert(me);
  }
  for (auto sp : c.spectators) {
    send(ControlKind::public_key, kServer, user_of(sp), name, "owner=" + user + " key=" + public_key);
    c.held_keys[sp].insert(me);
    c.subscriptions[sp].insert(me);
  }
  auto& mine = c.held_keys[me];
  auto& my_subs = c.subscriptions[me];
  for (auto p : c.participants) {
    send(ControlKind::public_key, kServer, user, name, "owner=" + user_of(p) + " key=" + c.public_keys.at(p));
    mine.insert(p);
    my_subs.insert(p);
  }
  mine.insert(me);
  c.participants.insert(me);
  c.public_keys[me] = public_key;
  s.roles[name] = Role::participant;
}

void ConferenceServer::join_as_spectator(const std::string& user, const std::string& name) {
  auto& s = session(user);
  auto& c = conference(name);
  if (!c.allowed_spectators.contains(user)) {
    throw ConferenceError(ConferenceErrc::not_allowed, user + " is not an allowed spectator of " + name);
  }
  if (s.roles.contains(name)) throw ConferenceError(ConferenceErrc::already_in_conference, user + " already in " + name);

  const NodeId me = s.node;
  send(ControlKind::join_conference_s, user, kServer, name, "");
  auto& mine = c.held_keys[me];
  auto& subs = c.subscriptions[me];
  for (auto p : c.participants) {
    send(ControlKind::public_key, kServer, user, name, "owner=" + user_of(p) + " key=" + c.public_keys.at(p));
    mine.insert(p);
    subs.insert(p);
  }
  c.spectators.insert(me);
  s.roles[name] = Role::spectator;
}

void ConferenceServer::leave_conference(const std::string& user, const std::string& name) {
  auto& s = session(user);
  auto& c = conference(name);
  auto role = s.roles.find(name);
  if (role == s.roles.end()) throw ConferenceError(ConferenceErrc::not_in_conference, user + " is not in " + name);

  const NodeId me = s.node;
  if (role->second == Role::participant) {
    send(ControlKind::leave_conference, user, kServer, name, "");
    c.participants.erase(me);
    c.public_keys.erase(me);
    for (auto other : c.participants) send(ControlKind::participant_left, kServer, user_of(other), name, "who=" + user);
    for (auto sp : c.spectators) send(ControlKind::participant_left, kServer, user_of(sp), name, "who=" + user);
    for (auto& [holder, keys] : c.held_keys) keys.erase(me);
    for (auto& [sub, pubs] : c.subscriptions) pubs.erase(me);
  } else {
    c.spectators.erase(me);
    if (log_spectator_leave_) {
      send(ControlKind::leave_conference, user, kServer, name, "");
      incidents_.push_back(user + " left " + name + " as spectator");
    }
  }
  c.held_keys.erase(me);
  c.subscriptions.erase(me);
  s.roles.erase(role);
}

void ConferenceServer::logout(const std::string& user) {
  auto& s = session(user);
  send(ControlKind::bye, user, kServer, "", "");
  const auto roles = s.roles;
  for (const auto& [name, role] : roles) leave_conference(user, name);
  sessions_.erase(user);
}

void ConferenceServer::drop_node(NodeId node) {
  std::string user;
  for (const auto& [u, s] : sessions_) {
    if (s.node == node) user = u;
  }
  if (user.empty()) return;
  const auto roles = sessions_.at(user).roles;
  for (const auto& [name, role] : roles) leave_conference(user, name);
  sessions_.erase(user);
}

void ConferenceServer::publish(const std::string& user, const std::string& name) {
  auto& s = session(user);
  (void)conference(name);
  auto role = s.roles.find(name);
  if (role == s.roles.end()) throw ConferenceError(ConferenceErrc::not_in_conference, user + " is not in " + name);
  if (role->second == Role::spectator) {
    throw ConferenceError(ConferenceErrc::spectator_cannot_publish, user + " is a spectator of " + name);
  }
}

void ConferenceServer::call(const std::string& caller, const std::string& callee) {
  (void)session(caller);
  (void)session(callee);
  pending_calls_.emplace(caller, callee);
  send(ControlKind::call, caller, callee, "", "");
}

std::string ConferenceServer::accept_call(const std::string& callee, const std::string& caller) {
  if (!pending_calls_.contains({caller, callee})) {
    throw ConferenceError(ConferenceErrc::no_pending_call, "no call from " + caller + " to " + callee);
  }
  const std::string name = "call:" + caller + ":" + callee;
  create_conference(caller, name, {caller, callee}, {});
  pending_calls_.erase({caller, callee});
  send(ControlKind::call_accepted, callee, caller, name, "");
  join_as_participant(caller, name, "key:" + caller);
  join_as_participant(callee, name, "key:" + callee);
  return name;
}

void ConferenceServer::end_call(const std::string& user, const std::string& peer) {
  std::string name = "call:" + user + ":" + peer;
  if (!conferences_.contains(name)) name = "call:" + peer + ":" + user;
  if (!conferences_.contains(name)) throw ConferenceError(ConferenceErrc::unknown_conference, "no call between " + user + " and " + peer);
  send(ControlKind::end_call, user, peer, name, "");
  for (const auto& u : {user, peer}) {
    auto it = sessions_.find(u);
    if (it != sessions_.end() && it->second.roles.contains(name)) leave_conference(u, name);
  }
  conferences_.erase(name);
}

std::vector<std::string> ConferenceServer::check_invariants() const {
  std::vector<std::string> v;
  std::map<NodeId, std::string> user_by_node;
  for (const auto& [u, s] : sessions_) user_by_node[s.node] = u;

  for (const auto& [name, c] : conferences_) {
    auto user = [&](NodeId n) {
      auto it = user_by_node.find(n);
      return it == user_by_node.end() ? std::string{} : it->second;
    };
    for (auto p : c.participants) {
      if (!c.allowed_participants.contains(user(p))) v.push_back(name + ": unauthorized participant " + to_string(p));
    }
    for (auto s : c.spectators) {
      if (!c.allowed_spectators.contains(user(s))) v.push_back(name + ": unauthorized spectator " + to_string(s));
    }
    std::set<NodeId> keyed;
    for (const auto& [n, k] : c.public_keys) keyed.insert(n);
    if (keyed != c.participants) v.push_back(name + ": public keys do not match current participants");

    std::set<NodeId> members = c.participants;
    members.insert(c.spectators.begin(), c.spectators.end());
    for (auto m : members) {
      auto held = c.held_keys.find(m);
      const std::set<NodeId> have = held == c.held_keys.end() ? std::set<NodeId>{} : held->second;
      if (have != c.participants) v.push_back(name + ": member " + to_string(m) + " holds a stale key set");
      std::set<NodeId> expected = c.participants;
      expected.erase(m);
      auto subs = c.subscriptions.find(m);
      const std::set<NodeId> got = subs == c.subscriptions.end() ? std::set<NodeId>{} : subs->second;
      if (got != expected) v.push_back(name + ": member " + to_string(m) + " has wrong subscriptions");
    }
    for (const auto& [holder, keys] : c.held_keys) {
      if (!members.contains(holder) && !keys.empty()) v.push_back(name + ": ex-member still holds keys");
    }
    for (const auto& [sub, pubs] : c.subscriptions) {
      for (auto p : pubs) {
        if (!c.participants.contains(p)) v.push_back(name + ": subscription to ex-participant " + to_string(p));
      }
    }
  }
  return v;
}

}  // namespace netrawalm
