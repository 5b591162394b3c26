#include <doctest.h>

#include <sstream>

#include "netrawalm/conference.hpp"
#include "support.hpp"

using namespace netrawalm;

namespace {

ConferenceServer lecture() {
  ConferenceServer s({{"alice", "a", NodeId{1}}, {"bob", "b", NodeId{2}}, {"carol", "c", NodeId{3}},
                      {"dave", "d", NodeId{4}}});
  s.create_conference("alice", "lecture", {"alice", "bob", "carol"}, {"dave", "carol"});
  return s;
}

// Printable copy of the whole server state for before/after comparison.
std::string snapshot(const ConferenceServer& s) {
  std::ostringstream os;
  for (const auto& [u, p] : s.sessions()) {
    os << u << ':' << p.node << ':';
    for (const auto& [c, r] : p.roles) os << c << '=' << static_cast<int>(r) << ';';
    os << '\n';
  }
  for (const auto& [n, c] : s.conferences()) {
    os << n << " P";
    for (auto x : c.participants) os << ' ' << x;
    os << " S";
    for (auto x : c.spectators) os << ' ' << x;
    os << " K";
    for (const auto& [x, k] : c.public_keys) os << ' ' << x << '=' << k;
    os << " H";
    for (const auto& [x, ks] : c.held_keys) {
      os << ' ' << x << ':';
      for (auto k : ks) os << k << ',';
    }
    os << '\n';
  }
  return os.str();
}

ConferenceErrc code_of(auto&& f) {
  try {
    f();
  } catch (const ConferenceError& e) {
    return e.code();
  }
  FAIL("expected a rejection");
  return ConferenceErrc::bad_credentials;
}

}  // namespace

TEST_SUITE("conference") {
  TEST_CASE("login returns the conference list") {
    auto s = lecture();
    CHECK(s.login("alice", "a") == std::vector<std::string>{"lecture"});
    const auto out = s.drain();
    REQUIRE(out.size() == 2);
    CHECK(out[0].kind == ControlKind::log_in);
    CHECK(out[1].kind == ControlKind::conference_list);
    CHECK(out[1].payload == "lecture");
    CHECK(s.pending().empty());
  }

  TEST_CASE("keys are distributed to every member") {
    auto s = lecture();
    for (auto [u, pw] : {std::pair{"alice", "a"}, {"bob", "b"}, {"dave", "d"}}) s.login(u, pw);
    s.join_as_participant("alice", "lecture", "KA");
    s.join_as_spectator("dave", "lecture");
    s.join_as_participant("bob", "lecture", "KB");
    const auto& c = s.conferences().at("lecture");
    const std::set<NodeId> parts{NodeId{1}, NodeId{2}};
    CHECK(c.participants == parts);
    CHECK(c.held_keys.at(NodeId{4}) == parts);
    CHECK(c.held_keys.at(NodeId{1}) == parts);
    CHECK(c.subscriptions.at(NodeId{1}) == std::set<NodeId>{NodeId{2}});
    CHECK(s.check_invariants().empty());

    s.leave_conference("alice", "lecture");
    CHECK(s.conferences().at("lecture").held_keys.at(NodeId{4}) == std::set<NodeId>{NodeId{2}});
    CHECK(s.check_invariants().empty());
  }

  TEST_CASE("rejections leave the state untouched") {
    auto s = lecture();
    s.login("alice", "a");
    s.login("dave", "d");
    s.join_as_spectator("dave", "lecture");
    const auto before = snapshot(s);

    CHECK(code_of([&] { s.login("bob", "wrong"); }) == ConferenceErrc::bad_credentials);
    CHECK(code_of([&] { s.login("nobody", "x"); }) == ConferenceErrc::bad_credentials);
    CHECK(code_of([&] { s.login("alice", "a"); }) == ConferenceErrc::already_logged_in);
    CHECK(code_of([&] { s.join_as_participant("bob", "lecture", "K"); }) == ConferenceErrc::not_authenticated);
    CHECK(code_of([&] { s.join_as_participant("alice", "nope", "K"); }) == ConferenceErrc::unknown_conference);
    CHECK(code_of([&] { s.join_as_participant("dave", "lecture", "K"); }) == ConferenceErrc::not_allowed);
    CHECK(code_of([&] { s.join_as_spectator("alice", "lecture"); }) == ConferenceErrc::not_allowed);
    CHECK(code_of([&] { s.join_as_spectator("dave", "lecture"); }) == ConferenceErrc::already_in_conference);
    CHECK(code_of([&] { s.leave_conference("alice", "lecture"); }) == ConferenceErrc::not_in_conference);
    CHECK(code_of([&] { s.publish("dave", "lecture"); }) == ConferenceErrc::spectator_cannot_publish);
    CHECK(code_of([&] { s.create_conference("x", "lecture", {}, {}); }) == ConferenceErrc::duplicate_conference);
    CHECK(code_of([&] { s.accept_call("alice", "dave"); }) == ConferenceErrc::no_pending_call);
    CHECK(snapshot(s) == before);
  }

  TEST_CASE("logout and silent drop both clean up") {
    auto s = lecture();
    s.login("alice", "a");
    s.login("bob", "b");
    s.join_as_participant("alice", "lecture", "KA");
    s.join_as_participant("bob", "lecture", "KB");
    s.drain();
    s.logout("alice");
    const auto out = s.drain();
    CHECK(out.front().kind == ControlKind::bye);
    CHECK(std::any_of(out.begin(), out.end(), [](const ControlMessage& m) {
      return m.kind == ControlKind::participant_left && m.recipient == "bob";
    }));
    CHECK_FALSE(s.sessions().contains("alice"));

    s.drop_node(NodeId{2});
    CHECK(s.sessions().empty());
    CHECK(s.conferences().at("lecture").participants.empty());
    CHECK(s.check_invariants().empty());
    s.drop_node(NodeId{9});  // unknown node is ignored
  }

  TEST_CASE("spectator leave is silent unless logging is enabled") {
    for (bool log : {false, true}) {
      ConferenceServer s({{"dave", "d", NodeId{4}}}, log);
      s.create_conference("dave", "c", {}, {"dave"});
      s.login("dave", "d");
      s.join_as_spectator("dave", "c");
      s.drain();
      s.leave_conference("dave", "c");
      CHECK(s.drain().size() == (log ? 1u : 0u));
      CHECK(s.incident_log().size() == (log ? 1u : 0u));
    }
  }

  TEST_CASE("calls create and tear down a two-party conference") {
    auto s = lecture();
    s.login("alice", "a");
    s.login("bob", "b");
    CHECK(code_of([&] { s.call("alice", "carol"); }) == ConferenceErrc::not_authenticated);
    s.call("alice", "bob");
    const auto name = s.accept_call("bob", "alice");
    CHECK(s.conferences().at(name).participants == std::set<NodeId>{NodeId{1}, NodeId{2}});
    CHECK(s.check_invariants().empty());
    s.end_call("bob", "alice");
    CHECK_FALSE(s.conferences().contains(name));
    CHECK(s.sessions().at("alice").roles.empty());
    CHECK(code_of([&] { s.end_call("bob", "alice"); }) == ConferenceErrc::unknown_conference);
  }

  TEST_CASE("random scripts agree with the reference model") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto r = testing_support::run_random_conference_script(seed, 300);
      CHECK_MESSAGE(r.violations == 0, r.first_problem);
      CHECK_MESSAGE(r.disagreements == 0, r.first_problem);
    }
  }
}
