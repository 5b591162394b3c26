#include <doctest.h>

#include <filesystem>

#include "netrawalm/scenario.hpp"
#include "netrawalm/units.hpp"

using namespace netrawalm;

namespace {

const char* kSmall = R"(
[bandwidth]
free = 512kbps
application = 250kbps

[topology]
host 1 gateway=10.0.0.1 address=10.0.0.2
host 2 gateway=10.0.1.1 address=10.0.1.2
link 1 2 delay=10ms capacity=1Mbps

[profiles]
node 1 ram=1GB cpu=1GHz
node 2 ram=2GB cpu=2GHz
)";

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<Diagnostic>& d, std::size_t line, const std::string& fragment) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) {
    return x.line == line && x.message.find(fragment) != std::string::npos;
  });
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("bundled worked example") {
    const auto s = load_scenario(resolve_scenario_path("worked_example_s5"));
    CHECK(s.name == "worked_example_s5");
    CHECK(s.bandwidth.free_bps == 512'000);
    CHECK(s.bandwidth.application_bps == 250'000);
    REQUIRE(s.profiles.size() == 4);
    CHECK(s.profile(NodeId{1}).free_ram_bytes == 1ull << 20);
    CHECK(s.profile(NodeId{1}).cpu_hz == 512'000'000);
    CHECK(s.profile(NodeId{3}).free_ram_bytes == 4ull << 30);
    CHECK(s.profile(NodeId{3}).cpu_hz == 2'370'000'000);
    CHECK(s.labels.at(NodeId{3}) == "V3");
    CHECK(s.conferences.size() == 1);
    CHECK(s.script.size() == 14);
  }

  TEST_CASE("every bundled scenario validates and round-trips") {
    for (const auto& entry : std::filesystem::directory_iterator(NETRAWALM_SCENARIO_DIR)) {
      if (entry.path().extension() != ".scn") continue;
      CAPTURE(entry.path().string());
      const auto s = load_scenario(entry.path());
      const auto again = parse_scenario(serialize_scenario(s), s.name);
      CHECK(again == s);
    }
  }

  TEST_CASE("errors carry line numbers") {
    const std::string bad = std::string(kSmall) + "node 9 ram=1GB cpu=1GHz\n";
    const auto d = diagnostics_of(bad);
    REQUIRE_FALSE(d.empty());
    CHECK(d.front().line == 14);

    const auto unknown_key = diagnostics_of(std::string(kSmall) + "[parameters]\nbogus = 1\n");
    CHECK(mentions(unknown_key, 15, "bogus"));

    const auto unknown_section = diagnostics_of("[nonsense]\n");
    CHECK(mentions(unknown_section, 1, "nonsense"));

    const auto bad_gateway = diagnostics_of(R"(
[bandwidth]
free = 1Mbps
application = 1Mbps
[topology]
host 1 gateway=lan-a address=10.0.0.2
)");
    CHECK(mentions(bad_gateway, 6, "gateway"));
  }

  TEST_CASE("zero application bandwidth is rejected") {
    std::string text = kSmall;
    text.replace(text.find("application = 250kbps"), 21, "application = 0bps");
    CHECK_FALSE(diagnostics_of(text).empty());
  }

  TEST_CASE("script references must resolve") {
    const auto d = diagnostics_of(std::string(kSmall) + "[script]\nat 0ms join 7\nat 1ms login ghost password=x\n");
    CHECK(d.size() >= 2);
    CHECK(mentions(d, 15, "7"));
    CHECK(mentions(d, 16, "ghost"));
  }

  TEST_CASE("script parsing") {
    const auto s = parse_scenario(std::string(kSmall) +
                                  "[script]\nat 1.5s join 1\nat 20ms stream 2 duration=100ms interval=20ms\n"
                                  "at 30ms set_bandwidth free=1Mbps application=250kbps\n");
    REQUIRE(s.script.size() == 3);
    CHECK(s.script[0].at == 1'500'000);
    CHECK(s.script[1].kind == ActionKind::send_stream);
    CHECK(s.script[1].duration_us == 100'000);
    CHECK(s.script[1].interval_us == 20'000);
    CHECK(s.script[2].free_bps == 1'000'000);
  }

  TEST_CASE("path resolution") {
    CHECK(resolve_scenario_path("fig6_ring").filename() == "fig6_ring.scn");
    CHECK_THROWS(load_scenario("/nonexistent/file.scn"));
  }
}
