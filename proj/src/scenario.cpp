#include "netrawalm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#ifndef NETRAWALM_SCENARIO_DIR
#define NETRAWALM_SCENARIO_DIR "scenarios"
#endif

namespace netrawalm {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_uint(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

double parse_real(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(text) + "'");
}

DelayUs parse_time(std::string_view text) {
  if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative time '" + std::string(text) + "'");
  return parse_duration(text);
}

std::string real_text(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// `key=value` options after the positional tokens of a line.
class Options {
 public:
  Options(const std::vector<std::string>& tokens, std::size_t first) {
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + tokens[i] + "'");
      const auto key = tokens[i].substr(0, eq);
      if (!values_.emplace(key, tokens[i].substr(eq + 1)).second) {
        throw std::invalid_argument("duplicate key '" + key + "'");
      }
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    auto v = it->second;
    values_.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw std::invalid_argument("missing '" + key + "'");
    return *v;
  }

  void finish() const {
    if (!values_.empty()) throw std::invalid_argument("unknown key '" + values_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> values_;
};

enum class Section { none, parameters, bandwidth, topology, profiles, conference, script };

struct PendingProfile {
  std::size_t line;
  NodeProfile profile;
};

class Parser {
 public:
  explicit Parser(std::string name) { s_.name = std::move(name); }

  Scenario parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      ++line_no;
      auto line = text.substr(start, nl - start);
      start = nl + 1;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      try {
        handle(line, line_no);
      } catch (const std::exception& e) {
        error(line_no, e.what());
      }
    }
    finish();
    if (!errors_.empty()) throw ScenarioError(errors_);
    return std::move(s_);
  }

 private:
  void error(std::size_t line, std::string message) { errors_.push_back({line, std::move(message)}); }

  void handle(std::string_view line, std::size_t n) {
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("malformed section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      static const std::map<std::string_view, Section> kSections{
          {"parameters", Section::parameters}, {"bandwidth", Section::bandwidth}, {"topology", Section::topology},
          {"profiles", Section::profiles},     {"conference", Section::conference}, {"script", Section::script}};
      auto it = kSections.find(name);
      if (it == kSections.end()) throw std::invalid_argument("unknown section '" + std::string(name) + "'");
      section_ = it->second;
      section_line_[section_] = n;
      return;
    }
    switch (section_) {
      case Section::none: throw std::invalid_argument("content before the first section");
      case Section::parameters: parameter(line); break;
      case Section::bandwidth: bandwidth(line); break;
      case Section::topology: topology(line, n); break;
      case Section::profiles: profile(line, n); break;
      case Section::conference: conference(line, n); break;
      case Section::script: script(line, n); break;
    }
  }

  static std::pair<std::string, std::string> key_value(std::string_view line) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("expected 'key = value'");
    return {std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
  }

  void parameter(std::string_view line) {
    auto [key, value] = key_value(line);
    auto& p = s_.params;
    if (key == "seed") {
      p.seed = parse_uint(value);
    } else if (key == "protocol") {
      p.protocol = parse_protocol(value);
    } else if (key == "k") {
      p.k = static_cast<std::uint32_t>(parse_uint(value));
      if (p.k < 1) throw std::invalid_argument("k must be positive");
    } else if (key == "heartbeat_interval") {
      p.heartbeat_interval_us = parse_time(value);
      if (p.heartbeat_interval_us <= 0) throw std::invalid_argument("heartbeat_interval must be positive");
    } else if (key == "timeout_multiplier") {
      p.timeout_multiplier = static_cast<std::uint32_t>(parse_uint(value));
      if (p.timeout_multiplier < 1) throw std::invalid_argument("timeout_multiplier must be positive");
    } else if (key == "join_retries") {
      p.join_retries = static_cast<std::uint32_t>(parse_uint(value));
    } else if (key == "end_time") {
      p.end_time = parse_time(value);
    } else if (key == "packet_interval") {
      p.packet_interval_us = parse_time(value);
      if (p.packet_interval_us <= 0) throw std::invalid_argument("packet_interval must be positive");
    } else if (key == "loss_probability") {
      p.loss_probability = parse_real(value);
      if (p.loss_probability < 0.0 || p.loss_probability > 1.0) {
        throw std::invalid_argument("loss_probability must lie in [0, 1]");
      }
    } else if (key == "stretch_metric") {
      if (value == "delay") {
        p.stretch_metric = PathMetric::delay;
      } else if (value == "hops") {
        p.stretch_metric = PathMetric::hops;
      } else {
        throw std::invalid_argument("stretch_metric must be delay or hops");
      }
    } else if (key == "data_precedence") {
      const auto v = parse_uint(value);
      if (v > 7) throw std::invalid_argument("data_precedence must be 0..7");
      p.data_precedence = static_cast<std::uint8_t>(v);
    } else if (key == "event_budget") {
      p.event_budget = parse_uint(value);
    } else if (key == "log_spectator_leave") {
      p.log_spectator_leave = parse_bool(value);
    } else {
      throw std::invalid_argument("unknown parameter '" + key + "'");
    }
  }

  void bandwidth(std::string_view line) {
    auto [key, value] = key_value(line);
    if (key == "network_capacity") {
      s_.bandwidth.network_capacity_bps = parse_bits_per_second(value);
    } else if (key == "free") {
      s_.bandwidth.free_bps = parse_bits_per_second(value);
      if (s_.bandwidth.free_bps == 0) throw std::invalid_argument("free bandwidth must be positive");
    } else if (key == "application") {
      s_.bandwidth.application_bps = parse_bits_per_second(value);
      if (s_.bandwidth.application_bps == 0) throw std::invalid_argument("application bandwidth must be positive");
    } else {
      throw std::invalid_argument("unknown bandwidth key '" + key + "'");
    }
  }

  void topology(std::string_view line, std::size_t n) {
    const auto t = split_ws(line);
    if (t[0] == "router") {
      if (t.size() != 2) throw std::invalid_argument("expected 'router <id>'");
      s_.topology.add_router(static_cast<VertexId>(parse_uint(t[1])));
    } else if (t[0] == "host") {
      if (t.size() < 2) throw std::invalid_argument("expected 'host <id> gateway=... address=...'");
      const NodeId id{static_cast<std::uint32_t>(parse_uint(t[1]))};
      Options o(t, 2);
      auto gateway = o.require("gateway");
      auto address = o.require("address");
      auto name = o.take("name");
      o.finish();
      if (!is_address_token(gateway)) throw std::invalid_argument("malformed gateway '" + gateway + "'");
      if (!is_address_token(address)) throw std::invalid_argument("malformed address '" + address + "'");
      s_.topology.add_host(id, gateway, address);
      host_line_[id] = n;
      if (name) {
        if (by_label_.contains(*name)) throw std::invalid_argument("duplicate host name '" + *name + "'");
        s_.labels[id] = *name;
        by_label_[*name] = id;
      }
    } else if (t[0] == "link") {
      if (t.size() < 3) throw std::invalid_argument("expected 'link <a> <b> delay=... capacity=...'");
      Options o(t, 3);
      const auto delay = parse_time(o.require("delay"));
      const auto capacity = parse_bits_per_second(o.require("capacity"));
      o.finish();
      s_.topology.add_link(static_cast<VertexId>(parse_uint(t[1])), static_cast<VertexId>(parse_uint(t[2])), delay,
                           capacity);
    } else if (t[0] == "tos_multiplier") {
      if (t.size() != 3) throw std::invalid_argument("expected 'tos_multiplier <precedence> <factor>'");
      const auto prec = parse_uint(t[1]);
      if (prec > 7) throw std::invalid_argument("precedence must be 0..7");
      const auto factor = parse_real(t[2]);
      if (factor <= 0.0) throw std::invalid_argument("multiplier must be positive");
      s_.topology.set_tos_delay_multiplier(static_cast<std::uint8_t>(prec), factor);
    } else {
      throw std::invalid_argument("unknown topology entry '" + t[0] + "'");
    }
  }

  void profile(std::string_view line, std::size_t n) {
    const auto t = split_ws(line);
    if (t[0] != "node" || t.size() < 2) throw std::invalid_argument("expected 'node <id> ram=... cpu=...'");
    NodeProfile p;
    p.node = node_ref(t[1]);
    Options o(t, 2);
    p.free_ram_bytes = parse_bytes(o.require("ram"));
    p.cpu_hz = parse_hertz(o.require("cpu"));
    if (auto v = o.take("procs")) p.processor_count = static_cast<std::uint32_t>(parse_uint(*v));
    if (auto v = o.take("hops")) p.hop_distance = static_cast<std::uint32_t>(parse_uint(*v));
    o.finish();
    profiles_.push_back({n, std::move(p)});
  }

  void conference(std::string_view line, std::size_t n) {
    const auto t = split_ws(line);
    if (t[0] == "user") {
      if (t.size() < 2) throw std::invalid_argument("expected 'user <name> password=... node=...'");
      Options o(t, 2);
      Credential c{t[1], o.require("password"), node_ref(o.require("node"))};
      o.finish();
      for (const auto& u : s_.users) {
        if (u.user == c.user) throw std::invalid_argument("duplicate user '" + c.user + "'");
      }
      node_uses_.emplace_back(n, c.node);
      s_.users.push_back(std::move(c));
    } else if (t[0] == "conference") {
      if (t.size() < 2) throw std::invalid_argument("expected 'conference <name> host=... participants=...'");
      Options o(t, 2);
      ConferenceSpec c;
      c.name = t[1];
      c.host = o.require("host");
      for (auto& u : split_list(o.take("participants").value_or(""))) c.participants.insert(u);
      for (auto& u : split_list(o.take("spectators").value_or(""))) c.spectators.insert(u);
      o.finish();
      user_uses_.emplace_back(n, c.host);
      for (const auto& u : c.participants) user_uses_.emplace_back(n, u);
      for (const auto& u : c.spectators) user_uses_.emplace_back(n, u);
      s_.conferences.push_back(std::move(c));
    } else {
      throw std::invalid_argument("unknown conference entry '" + t[0] + "'");
    }
  }

  NodeId node_ref(const std::string& token) {
    if (auto it = by_label_.find(token); it != by_label_.end()) return it->second;
    if (token.empty() || !std::isdigit(static_cast<unsigned char>(token.front()))) {
      throw std::invalid_argument("unknown node '" + token + "'");
    }
    return NodeId{static_cast<std::uint32_t>(parse_uint(token))};
  }

  void script(std::string_view line, std::size_t n) {
    const auto t = split_ws(line);
    if (t.size() < 3 || t[0] != "at") throw std::invalid_argument("expected 'at <time> <action> ...'");
    ScriptAction a;
    a.at = parse_time(t[1]);
    const auto& verb = t[2];
    auto need = [&](std::size_t count) {
      if (t.size() < 3 + count) throw std::invalid_argument("'" + verb + "' needs " + std::to_string(count) + " argument(s)");
    };
    auto node_arg = [&](std::size_t i) {
      a.node = node_ref(t[i]);
      node_uses_.emplace_back(n, a.node);
    };
    std::size_t opts_from = 3;
    if (verb == "join" || verb == "leave" || verb == "crash") {
      need(1);
      node_arg(3);
      a.kind = verb == "join" ? ActionKind::node_join : verb == "leave" ? ActionKind::node_leave : ActionKind::node_crash;
      opts_from = 4;
    } else if (verb == "start_conference") {
      a.kind = ActionKind::start_conference;
    } else if (verb == "stream") {
      need(1);
      a.kind = ActionKind::send_stream;
      node_arg(3);
      opts_from = 4;
    } else if (verb == "set_bandwidth") {
      a.kind = ActionKind::set_bandwidth;
    } else if (verb == "move_host") {
      need(1);
      a.kind = ActionKind::move_host;
      node_arg(3);
      opts_from = 4;
    } else if (verb == "login" || verb == "logout") {
      need(1);
      a.kind = verb == "login" ? ActionKind::login : ActionKind::logout;
      a.user = t[3];
      opts_from = 4;
    } else if (verb == "join_conference") {
      need(3);
      a.kind = ActionKind::join_conference;
      a.user = t[3];
      a.conference = t[4];
      if (t[5] == "participant") {
        a.role = Role::participant;
      } else if (t[5] == "spectator") {
        a.role = Role::spectator;
      } else {
        throw std::invalid_argument("role must be participant or spectator");
      }
      opts_from = 6;
    } else if (verb == "leave_conference") {
      need(2);
      a.kind = ActionKind::leave_conference;
      a.user = t[3];
      a.conference = t[4];
      opts_from = 5;
    } else if (verb == "call" || verb == "accept_call" || verb == "end_call") {
      need(2);
      a.kind = verb == "call" ? ActionKind::call : verb == "accept_call" ? ActionKind::accept_call : ActionKind::end_call;
      a.user = t[3];
      a.other = t[4];
      user_uses_.emplace_back(n, a.other);
      opts_from = 5;
    } else {
      throw std::invalid_argument("unknown action '" + verb + "'");
    }
    if (!a.user.empty()) user_uses_.emplace_back(n, a.user);

    Options o(t, opts_from);
    switch (a.kind) {
      case ActionKind::start_conference:
        if (auto v = o.take("source")) {
          a.node = node_ref(*v);
          node_uses_.emplace_back(n, a.node);
        }
        break;
      case ActionKind::send_stream:
        a.duration_us = parse_time(o.require("duration"));
        if (auto v = o.take("interval")) {
          a.interval_us = parse_time(*v);
          if (a.interval_us <= 0) throw std::invalid_argument("interval must be positive");
        }
        break;
      case ActionKind::set_bandwidth:
        a.free_bps = parse_bits_per_second(o.require("free"));
        a.application_bps = parse_bits_per_second(o.require("application"));
        if (a.free_bps == 0 || a.application_bps == 0) throw std::invalid_argument("bandwidth must be positive");
        break;
      case ActionKind::move_host:
        a.token = o.require("gateway");
        if (!is_address_token(a.token)) throw std::invalid_argument("malformed gateway '" + a.token + "'");
        break;
      case ActionKind::login: a.other = o.require("password"); break;
      case ActionKind::join_conference:
        if (a.role == Role::participant) a.token = o.require("key");
        break;
      default: break;
    }
    o.finish();
    s_.script.push_back(std::move(a));
  }

  void finish() {
    const auto topo_line = section_line_.contains(Section::topology) ? section_line_[Section::topology] : 0;
    try {
      s_.topology.validate();
    } catch (const std::exception& e) {
      error(topo_line, e.what());
    }

    std::map<NodeId, std::size_t> seen;
    for (auto& [line, p] : profiles_) {
      if (!s_.topology.has_host(p.node)) {
        error(line, "profile for unknown node " + to_string(p.node));
        continue;
      }
      if (!seen.emplace(p.node, line).second) {
        error(line, "duplicate profile for node " + to_string(p.node));
        continue;
      }
      const auto& h = s_.topology.host(p.node);
      p.gateway = h.gateway;
      p.local_address = h.local_address;
      try {
        validate_profile(p);
      } catch (const std::exception& e) {
        error(line, e.what());
        continue;
      }
      s_.profiles.push_back(p);
    }
    std::sort(s_.profiles.begin(), s_.profiles.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
    for (auto h : s_.topology.hosts()) {
      if (!seen.contains(h)) error(host_line_.contains(h) ? host_line_[h] : topo_line, "no profile for node " + to_string(h));
    }

    const auto bw_line = section_line_.contains(Section::bandwidth) ? section_line_[Section::bandwidth] : 0;
    if (s_.bandwidth.application_bps == 0) error(bw_line, "application bandwidth must be positive");
    if (s_.bandwidth.free_bps == 0) error(bw_line, "free bandwidth must be positive");

    for (const auto& [line, node] : node_uses_) {
      if (!s_.topology.has_host(node)) error(line, "unknown node " + to_string(node));
    }
    std::set<std::string> users;
    for (const auto& u : s_.users) users.insert(u.user);
    for (const auto& [line, user] : user_uses_) {
      if (!users.contains(user)) error(line, "unknown user '" + user + "'");
    }
    std::sort(errors_.begin(), errors_.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  }

  Scenario s_;
  Section section_ = Section::none;
  std::map<Section, std::size_t> section_line_;
  std::map<NodeId, std::size_t> host_line_;
  std::map<std::string, NodeId> by_label_;
  std::vector<PendingProfile> profiles_;
  std::vector<std::pair<std::size_t, NodeId>> node_uses_;
  std::vector<std::pair<std::size_t, std::string>> user_uses_;
  std::vector<Diagnostic> errors_;
};

std::string join_set(const std::set<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
  return out;
}

}  // namespace

std::string_view to_string(Protocol p) { return p == Protocol::netrawalm ? "netrawalm" : "nice"; }

Protocol parse_protocol(std::string_view text) {
  if (text == "netrawalm") return Protocol::netrawalm;
  if (text == "nice") return Protocol::nice;
  throw std::invalid_argument("protocol must be netrawalm or nice, got '" + std::string(text) + "'");
}

const NodeProfile& Scenario::profile(NodeId n) const {
  auto it = std::lower_bound(profiles.begin(), profiles.end(), n,
                             [](const NodeProfile& p, NodeId id) { return p.node < id; });
  if (it == profiles.end() || it->node != n) throw std::out_of_range("no profile for node " + to_string(n));
  return *it;
}

bool Scenario::operator==(const Scenario& o) const {
  auto same_users = std::equal(users.begin(), users.end(), o.users.begin(), o.users.end(),
                               [](const Credential& a, const Credential& b) {
                                 return a.user == b.user && a.password == b.password && a.node == b.node;
                               });
  return name == o.name && params == o.params && topology == o.topology && labels == o.labels &&
         profiles == o.profiles && bandwidth == o.bandwidth && same_users && conferences == o.conferences &&
         script == o.script;
}

namespace {

std::string format_diagnostics(const std::vector<Diagnostic>& d) {
  std::string out;
  for (const auto& x : d) {
    if (!out.empty()) out += '\n';
    out += "line " + std::to_string(x.line) + ": " + x.message;
  }
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Scenario parse_scenario(std::string_view text, std::string name) { return Parser(std::move(name)).parse(text); }

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({{0, "cannot read " + path.string()}});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  auto bundled = std::filesystem::path(NETRAWALM_SCENARIO_DIR) / (name_or_path + ".scn");
  if (std::filesystem::is_regular_file(bundled)) return bundled;
  throw ScenarioError({{0, "no scenario file or bundled scenario named '" + name_or_path + "'"}});
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  const auto& p = s.params;
  out << "[parameters]\n";
  out << "seed = " << p.seed << '\n';
  out << "protocol = " << to_string(p.protocol) << '\n';
  out << "k = " << p.k << '\n';
  out << "heartbeat_interval = " << format_duration(p.heartbeat_interval_us) << '\n';
  out << "timeout_multiplier = " << p.timeout_multiplier << '\n';
  out << "join_retries = " << p.join_retries << '\n';
  if (p.end_time) out << "end_time = " << format_duration(*p.end_time) << '\n';
  out << "packet_interval = " << format_duration(p.packet_interval_us) << '\n';
  out << "loss_probability = " << real_text(p.loss_probability) << '\n';
  out << "stretch_metric = " << (p.stretch_metric == PathMetric::delay ? "delay" : "hops") << '\n';
  out << "data_precedence = " << static_cast<int>(p.data_precedence) << '\n';
  out << "event_budget = " << p.event_budget << '\n';
  out << "log_spectator_leave = " << (p.log_spectator_leave ? "true" : "false") << '\n';

  out << "\n[bandwidth]\n";
  out << "network_capacity = " << format_bits_per_second(s.bandwidth.network_capacity_bps) << '\n';
  out << "free = " << format_bits_per_second(s.bandwidth.free_bps) << '\n';
  out << "application = " << format_bits_per_second(s.bandwidth.application_bps) << '\n';

  out << "\n[topology]\n";
  for (auto r : s.topology.routers()) out << "router " << r << '\n';
  for (auto n : s.topology.hosts()) {
    const auto& h = s.topology.host(n);
    out << "host " << n << " gateway=" << h.gateway << " address=" << h.local_address;
    if (auto it = s.labels.find(n); it != s.labels.end()) out << " name=" << it->second;
    out << '\n';
  }
  for (const auto& l : s.topology.links()) {
    out << "link " << l.a << ' ' << l.b << " delay=" << format_duration(l.delay_us)
        << " capacity=" << format_bits_per_second(l.capacity_bps) << '\n';
  }
  for (std::uint8_t prec = 0; prec < 8; ++prec) {
    const double f = s.topology.tos_delay_multiplier(prec);
    if (f != 1.0) out << "tos_multiplier " << static_cast<int>(prec) << ' ' << real_text(f) << '\n';
  }

  out << "\n[profiles]\n";
  for (const auto& pr : s.profiles) {
    out << "node " << pr.node << " ram=" << format_bytes(pr.free_ram_bytes) << " cpu=" << format_hertz(pr.cpu_hz)
        << " procs=" << pr.processor_count << " hops=" << pr.hop_distance << '\n';
  }

  if (!s.users.empty() || !s.conferences.empty()) {
    out << "\n[conference]\n";
    for (const auto& u : s.users) out << "user " << u.user << " password=" << u.password << " node=" << u.node << '\n';
    for (const auto& c : s.conferences) {
      out << "conference " << c.name << " host=" << c.host;
      if (!c.participants.empty()) out << " participants=" << join_set(c.participants);
      if (!c.spectators.empty()) out << " spectators=" << join_set(c.spectators);
      out << '\n';
    }
  }

  if (!s.script.empty()) {
    out << "\n[script]\n";
    for (const auto& a : s.script) {
      out << "at " << format_duration(a.at) << ' ';
      switch (a.kind) {
        case ActionKind::node_join: out << "join " << a.node; break;
        case ActionKind::node_leave: out << "leave " << a.node; break;
        case ActionKind::node_crash: out << "crash " << a.node; break;
        case ActionKind::start_conference:
          out << "start_conference";
          if (a.node != kNoNode) out << " source=" << a.node;
          break;
        case ActionKind::send_stream:
          out << "stream " << a.node << " duration=" << format_duration(a.duration_us);
          if (a.interval_us > 0) out << " interval=" << format_duration(a.interval_us);
          break;
        case ActionKind::set_bandwidth:
          out << "set_bandwidth free=" << format_bits_per_second(a.free_bps)
              << " application=" << format_bits_per_second(a.application_bps);
          break;
        case ActionKind::move_host: out << "move_host " << a.node << " gateway=" << a.token; break;
        case ActionKind::login: out << "login " << a.user << " password=" << a.other; break;
        case ActionKind::logout: out << "logout " << a.user; break;
        case ActionKind::join_conference:
          out << "join_conference " << a.user << ' ' << a.conference << ' '
              << (a.role == Role::participant ? "participant key=" + a.token : std::string("spectator"));
          break;
        case ActionKind::leave_conference: out << "leave_conference " << a.user << ' ' << a.conference; break;
        case ActionKind::call: out << "call " << a.user << ' ' << a.other; break;
        case ActionKind::accept_call: out << "accept_call " << a.user << ' ' << a.other; break;
        case ActionKind::end_call: out << "end_call " << a.user << ' ' << a.other; break;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace netrawalm
