#include "netrawalm/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include "netrawalm/baseline_nice.hpp"
#include "netrawalm/delay_matrix.hpp"

namespace netrawalm {

namespace {

enum class MsgKind { join_query, join_response, remove, heartbeat, leader_transfer, attach, data };

std::string_view kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::join_query: return "JoinQuery";
    case MsgKind::join_response: return "JoinResponse";
    case MsgKind::remove: return "Remove";
    case MsgKind::heartbeat: return "HeartBeat";
    case MsgKind::leader_transfer: return "LeaderTransfer";
    case MsgKind::attach: return "Attach";
    case MsgKind::data: return "Data";
  }
  return "?";
}

MsgKind from_membership(MembershipKind k) {
  switch (k) {
    case MembershipKind::join_query: return MsgKind::join_query;
    case MembershipKind::join_response: return MsgKind::join_response;
    case MembershipKind::remove: return MsgKind::remove;
    case MembershipKind::heartbeat: return MsgKind::heartbeat;
    case MembershipKind::leader_transfer: return MsgKind::leader_transfer;
  }
  return MsgKind::heartbeat;
}

std::string id_text(NodeId n) { return n == kNoNode ? "-" : to_string(n); }

struct Message {
  MsgKind kind = MsgKind::heartbeat;
  NodeId from;
  NodeId to;
  std::string detail;
  std::uint8_t precedence = 0;
  // Join bookkeeping.
  NodeId joiner = kNoNode;
  std::uint64_t epoch = 0;
  std::size_t step = 0;
  // Stream packets.
  std::uint64_t packet = 0;
  NodeId source = kNoNode;
  DelayUs path_delay = 0;
  DelayUs path_hops = 0;
  // Re-attachment after a failure.
  std::optional<std::size_t> recovery;
};

enum class TimerKind { heartbeat, join_retry, stream_tick };

struct Timer {
  TimerKind kind = TimerKind::heartbeat;
  NodeId owner;
  std::uint64_t epoch = 0;
  std::size_t stream = 0;
};

enum class EventType { deliver, timer, script };

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;
  EventType type = EventType::script;
  std::size_t index = 0;
  bool counts = true;  // false for heartbeat traffic
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

struct Stream {
  NodeId source;
  std::size_t remaining = 0;
  DelayUs interval = 0;
};

struct JoinSession {
  JoinPlan plan;
  std::uint64_t epoch = 0;
  std::uint32_t attempts = 0;
};

struct NodeState {
  bool alive = true;
  bool member = false;
  FailureDetectorState detector;
  std::uint64_t heartbeat_epoch = 0;
  std::set<NodeId> suspects;
};

class Simulator {
 public:
  explicit Simulator(const Scenario& s);
  RunResult run();

 private:
  void log(std::string_view kind, NodeId from, NodeId to, const std::string& detail);
  void warn(const std::string& text);
  void schedule(SimTime at, EventType type, std::size_t index, bool counts);
  void schedule_timer(SimTime at, Timer t);
  bool alive(NodeId n) const;

  void send(Message m);
  void drop(const Message& m, std::string_view reason);
  void deliver(std::size_t index);
  void on_timer(const Timer& t);
  void on_script(const ScriptAction& a);

  void start_join(NodeId joiner);
  void attempt_join(NodeId joiner);
  void send_join_step(NodeId joiner, std::size_t step);
  void join_lost(NodeId joiner, std::uint64_t epoch);
  void complete_join(NodeId joiner, NodeId leader);
  void leave(NodeId node);
  void crash(NodeId node);

  void start_heartbeat(NodeId n);
  void stop_heartbeat(NodeId n);
  void heartbeat_tick(NodeId n);
  void sync_detectors();
  void on_suspect(NodeId detector, NodeId suspect);
  void handle_failure(NodeId failed, NodeId detector);
  void check_leadership(NodeId detector);

  std::vector<NodeProfile> member_profiles() const;
  NodeId effective_source() const;
  void recompute_overlay();
  void repair_overlay(NodeId gone, std::optional<std::size_t> recovery);
  void send_attachments(const OverlayTree& before, std::optional<std::size_t> recovery);
  void attach_done(std::size_t recovery);
  void overlay_changed(std::optional<std::size_t> recovery = std::nullopt);

  void emit_packet(std::size_t stream);
  void forward(NodeId at, NodeId previous, std::uint64_t packet, NodeId source, DelayUs delay, DelayUs hops);
  void on_data(const Message& m);

  void conference_action(const ScriptAction& a);
  void flush_control();

  const Scenario& sc_;
  const SimParameters& params_;
  UnderlayTopology topo_;
  std::vector<NodeProfile> profiles_;
  DelayMatrix delay_;
  DelayMatrix hops_;
  Hierarchy h_;
  ConferenceServer server_;
  std::map<NodeId, NodeState> nodes_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<Message> messages_;
  std::vector<Timer> timers_;
  std::vector<Stream> streams_;
  std::map<std::pair<NodeId, NodeId>, SimTime> last_arrival_;
  std::map<NodeId, JoinSession> joins_;
  std::set<NodeId> undetected_;
  std::map<NodeId, std::size_t> recovery_of_;
  std::map<std::size_t, std::size_t> attach_pending_;
  std::set<std::pair<std::uint64_t, NodeId>> received_;
  std::uint64_t next_epoch_ = 1;
  std::uint64_t next_packet_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t pending_ = 0;
  SimTime now_ = 0;
  std::mt19937_64 rng_;
  std::bernoulli_distribution loss_;

  bool conference_active_ = false;
  std::optional<NodeId> source_;
  std::optional<FanoutThreshold> threshold_;
  OverlayTree overlay_;
  RunResult out_;
};

Simulator::Simulator(const Scenario& s)
    : sc_(s),
      params_(s.params),
      topo_(s.topology),
      profiles_(s.profiles),
      delay_(compute_delay_matrix(s.topology, PathMetric::delay, Execution::serial)),
      hops_(compute_delay_matrix(s.topology, PathMetric::hops, Execution::serial)),
      h_(s.params.k),
      server_(s.users, s.params.log_spectator_leave),
      rng_(s.params.seed),
      loss_(s.params.loss_probability) {
  for (auto n : topo_.hosts()) {
    auto& st = nodes_[n];
    st.detector.heartbeat_interval_us = params_.heartbeat_interval_us;
    st.detector.timeout_multiplier = params_.timeout_multiplier;
  }
  for (const auto& c : s.conferences) server_.create_conference(c.host, c.name, c.participants, c.spectators);
  if (s.bandwidth.application_bps > 0) {
    try {
      threshold_ = compute_fanout_threshold(s.bandwidth.free_bps, s.bandwidth.application_bps);
    } catch (const InsufficientBandwidth& e) {
      warn(e.what());
    }
  }
}

void Simulator::log(std::string_view kind, NodeId from, NodeId to, const std::string& detail) {
  std::string line = format_millis(now_);
  line += ' ';
  line += kind;
  line += ' ' + id_text(from) + ' ' + id_text(to);
  if (!detail.empty()) line += ' ' + detail;
  out_.event_log.push_back(std::move(line));
}

void Simulator::warn(const std::string& text) { out_.warnings.push_back(format_millis(now_) + " " + text); }

void Simulator::schedule(SimTime at, EventType type, std::size_t index, bool counts) {
  queue_.push(Event{at, seq_++, type, index, counts});
  if (counts) ++pending_;
}

void Simulator::schedule_timer(SimTime at, Timer t) {
  const bool counts = t.kind != TimerKind::heartbeat;
  timers_.push_back(t);
  schedule(at, EventType::timer, timers_.size() - 1, counts);
}

bool Simulator::alive(NodeId n) const {
  auto it = nodes_.find(n);
  return it != nodes_.end() && it->second.alive;
}

void Simulator::send(Message m) {
  ++out_.messages_sent;
  log(kind_name(m.kind), m.from, m.to, m.detail.empty() ? "send" : "send " + m.detail);
  if (m.to == kNoNode) {
    drop(m, "no-receiver");
    return;
  }
  if (params_.loss_probability > 0.0 && loss_(rng_)) {
    drop(m, "loss");
    return;
  }
  DelayUs d = delay_.at(m.from, m.to);
  const double factor = topo_.tos_delay_multiplier(m.precedence);
  if (factor != 1.0) d = static_cast<DelayUs>(std::llround(static_cast<double>(d) * factor));
  auto& last = last_arrival_[{m.from, m.to}];
  const SimTime at = std::max(now_ + d, last);
  last = at;
  const bool counts = m.kind != MsgKind::heartbeat;
  messages_.push_back(std::move(m));
  schedule(at, EventType::deliver, messages_.size() - 1, counts);
}

void Simulator::drop(const Message& m, std::string_view reason) {
  ++out_.messages_dropped;
  log(kind_name(m.kind), m.from, m.to, "drop:" + std::string(reason));
  if (m.joiner != kNoNode) join_lost(m.joiner, m.epoch);
  if (m.recovery) attach_done(*m.recovery);
}

void Simulator::deliver(std::size_t index) {
  const Message m = messages_[index];
  if (!alive(m.to)) {
    drop(m, "crash");
    return;
  }
  ++out_.messages_delivered;
  log(kind_name(m.kind), m.from, m.to, "recv");
  switch (m.kind) {
    case MsgKind::heartbeat: {
      auto& seen = nodes_[m.to].detector.last_seen;
      if (auto it = seen.find(m.from); it != seen.end()) it->second = now_;
      break;
    }
    case MsgKind::join_query:
    case MsgKind::join_response: {
      auto it = joins_.find(m.joiner);
      if (it == joins_.end() || it->second.epoch != m.epoch) break;  // stale attempt
      if (m.step + 1 < it->second.plan.messages.size()) {
        send_join_step(m.joiner, m.step + 1);
      } else {
        complete_join(m.joiner, it->second.plan.target_leader);
      }
      break;
    }
    case MsgKind::attach:
      if (m.recovery) attach_done(*m.recovery);
      break;
    case MsgKind::data:
      on_data(m);
      break;
    case MsgKind::remove:
    case MsgKind::leader_transfer:
      break;  // state already applied at the sender
  }
}

// ---- membership ------------------------------------------------------------

void Simulator::start_join(NodeId joiner) {
  if (!alive(joiner)) {
    warn("join ignored: node " + to_string(joiner) + " is down");
    return;
  }
  if (nodes_[joiner].member || joins_.contains(joiner)) {
    warn("join ignored: node " + to_string(joiner) + " is already a member");
    return;
  }
  joins_[joiner] = JoinSession{};
  attempt_join(joiner);
}

void Simulator::attempt_join(NodeId joiner) {
  auto& s = joins_.at(joiner);
  s.epoch = next_epoch_++;
  if (h_.empty()) {
    complete_join(joiner, kNoNode);
    return;
  }
  try {
    s.plan = plan_join(h_, joiner, delay_);
  } catch (const std::exception& e) {
    warn(std::string("join failed: ") + e.what());
    joins_.erase(joiner);
    return;
  }
  send_join_step(joiner, 0);
}

void Simulator::send_join_step(NodeId joiner, std::size_t step) {
  auto& s = joins_.at(joiner);
  const auto& mm = s.plan.messages.at(step);
  if (!alive(mm.sender)) {
    join_lost(joiner, s.epoch);
    return;
  }
  Message m;
  m.kind = from_membership(mm.kind);
  m.from = mm.sender;
  m.to = mm.receiver;
  m.detail = mm.payload;
  m.joiner = joiner;
  m.epoch = s.epoch;
  m.step = step;
  send(std::move(m));
}

void Simulator::join_lost(NodeId joiner, std::uint64_t epoch) {
  auto it = joins_.find(joiner);
  if (it == joins_.end() || it->second.epoch != epoch) return;
  const DelayUs timeout = params_.heartbeat_interval_us * static_cast<DelayUs>(params_.timeout_multiplier);
  schedule_timer(now_ + timeout, Timer{TimerKind::join_retry, joiner, epoch, 0});
}

void Simulator::complete_join(NodeId joiner, NodeId leader) {
  joins_.erase(joiner);
  h_.insert(joiner, leader, delay_);
  auto& st = nodes_[joiner];
  st.member = true;
  st.suspects.clear();
  for (auto& [n, other] : nodes_) other.suspects.erase(joiner);
  out_.joins_completed.emplace_back(now_, joiner);
  log("Joined", joiner, leader, "layers=" + std::to_string(h_.layer_count()));
  sync_detectors();
  start_heartbeat(joiner);
  if (conference_active_) overlay_changed();
}

void Simulator::leave(NodeId node) {
  if (!alive(node) || !nodes_[node].member) {
    warn("leave ignored: node " + to_string(node) + " is not a member");
    return;
  }
  auto msgs = graceful_leave(h_, node, delay_);
  nodes_[node].member = false;
  stop_heartbeat(node);
  for (const auto& mm : msgs) {
    Message m;
    m.kind = from_membership(mm.kind);
    m.from = mm.sender;
    m.to = mm.receiver;
    m.detail = mm.payload;
    send(std::move(m));
  }
  sync_detectors();
  if (conference_active_ && overlay_.contains(node)) repair_overlay(node, std::nullopt);
}

void Simulator::crash(NodeId node) {
  auto& st = nodes_[node];
  if (!st.alive) {
    warn("crash ignored: node " + to_string(node) + " is already down");
    return;
  }
  st.alive = false;
  stop_heartbeat(node);
  joins_.erase(node);
  out_.recoveries.push_back(RecoveryRecord{node, now_, -1, kNoNode, -1});
  recovery_of_[node] = out_.recoveries.size() - 1;
  if (st.member) undetected_.insert(node);
  log("Crash", node, kNoNode, "");
}

// ---- failure detection -----------------------------------------------------

void Simulator::start_heartbeat(NodeId n) {
  auto& st = nodes_[n];
  st.heartbeat_epoch = next_epoch_++;
  schedule_timer(now_ + params_.heartbeat_interval_us, Timer{TimerKind::heartbeat, n, st.heartbeat_epoch, 0});
}

void Simulator::stop_heartbeat(NodeId n) { nodes_[n].heartbeat_epoch = next_epoch_++; }

void Simulator::heartbeat_tick(NodeId n) {
  for (auto suspect : detect_failure(nodes_[n].detector, now_)) {
    if (!nodes_[n].suspects.insert(suspect).second) continue;
    log("Suspect", n, suspect, "");
    on_suspect(n, suspect);
  }
  auto& st = nodes_[n];
  if (!st.alive || !st.member) return;
  const std::string version = "v=" + std::to_string(h_.version());
  for (auto p : h_.peers_of(n)) {
    Message m;
    m.kind = MsgKind::heartbeat;
    m.from = n;
    m.to = p;
    m.detail = version;
    send(std::move(m));
  }
  schedule_timer(now_ + params_.heartbeat_interval_us, Timer{TimerKind::heartbeat, n, st.heartbeat_epoch, 0});
}

void Simulator::sync_detectors() {
  for (auto& [n, st] : nodes_) {
    if (!st.member) {
      st.detector.last_seen.clear();
      continue;
    }
    const auto peers = h_.peers_of(n);
    std::erase_if(st.detector.last_seen, [&](const auto& kv) { return !peers.contains(kv.first); });
    for (auto p : peers) st.detector.last_seen.try_emplace(p, now_);
  }
}

void Simulator::on_suspect(NodeId detector, NodeId suspect) {
  if (h_.contains(suspect)) {
    if (alive(suspect)) warn("node " + to_string(suspect) + " evicted on a false suspicion");
    handle_failure(suspect, detector);
  } else {
    check_leadership(detector);
  }
}

void Simulator::handle_failure(NodeId failed, NodeId detector) {
  undetected_.erase(failed);
  std::optional<std::size_t> recovery;
  if (auto it = recovery_of_.find(failed); it != recovery_of_.end() && out_.recoveries[it->second].detected < 0) {
    recovery = it->second;
    out_.recoveries[*recovery].detected = now_;
    out_.recoveries[*recovery].detector = detector;
  }
  h_.remove(failed, delay_);
  nodes_[failed].member = false;
  stop_heartbeat(failed);
  log("Evict", detector, failed, "layers=" + std::to_string(h_.layer_count()));
  sync_detectors();
  check_leadership(detector);

  server_.drop_node(failed);
  flush_control();

  if (conference_active_ && overlay_.contains(failed)) repair_overlay(failed, recovery);
  if (recovery && !attach_pending_.contains(*recovery)) out_.recoveries[*recovery].reconnected = now_;
}

void Simulator::check_leadership(NodeId detector) {
  if (!h_.contains(detector)) return;
  const auto& suspects = nodes_[detector].suspects;
  // A leader change re-forms the layers above, so clusters are re-read for
  // every layer instead of iterating a stale copy.
  for (std::size_t layer = 0; h_.contains(detector); ++layer) {
    const auto clusters = h_.clusters_of(detector);
    if (layer >= clusters.size()) break;
    const Cluster c = clusters[layer];
    std::vector<NodeId> view;
    for (auto m : c.members) {
      if (!suspects.contains(m)) view.push_back(m);
    }
    if (view.empty()) continue;
    const NodeId candidate = select_leader(view, delay_);
    if (candidate == c.leader) continue;
    LeaderView installed{c.leader, {c.members.begin(), c.members.end()}};
    LeaderView local{candidate, {view.begin(), view.end()}};
    const auto rec = reconcile_leaders(installed, local, delay_);
    for (const auto& mm : rec.messages) {
      Message m;
      m.kind = MsgKind::leader_transfer;
      m.from = mm.sender;
      m.to = mm.receiver;
      m.detail = mm.payload;
      send(std::move(m));
    }
    if (rec.winner != c.leader && c.contains(rec.winner)) {
      h_.set_leader(c.layer, c.leader, rec.winner, delay_);
      sync_detectors();
    }
  }
}

// ---- overlay ---------------------------------------------------------------

std::vector<NodeProfile> Simulator::member_profiles() const {
  std::vector<NodeProfile> out;
  for (const auto& p : profiles_) {
    if (h_.contains(p.node)) out.push_back(p);
  }
  return out;
}

NodeId Simulator::effective_source() const {
  if (source_ && h_.contains(*source_) && alive(*source_)) return *source_;
  const auto profiles = member_profiles();
  return build_priority_queue(profiles).front();
}

void Simulator::recompute_overlay() {
  if (h_.empty()) {
    overlay_ = {};
    return;
  }
  const NodeId src = effective_source();
  auto members = h_.members();
  if (params_.protocol == Protocol::nice) {
    overlay_ = sequential_chain(leader_tree(h_), src, delay_);
  } else if (!threshold_ || !needs_tree(members.size(), *threshold_)) {
    std::erase(members, src);
    overlay_ = make_star(src, members);
  } else {
    auto profiles = member_profiles();
    auto built = build_tree(profiles, topo_, *threshold_);
    overlay_ = std::move(built.tree);
    for (auto r : built.rejected) warn("node " + to_string(r) + " could not be placed in the tree");
  }
}

void Simulator::repair_overlay(NodeId gone, std::optional<std::size_t> recovery) {
  const OverlayTree before = overlay_;
  if (params_.protocol == Protocol::nice || overlay_.fanout == 0 || gone == overlay_.root) {
    recompute_overlay();
  } else {
    const auto profiles = member_profiles();
    auto repaired = replace_failed_interior(overlay_, gone, profiles);
    overlay_ = std::move(repaired.tree);
    for (auto r : repaired.rejected) warn("node " + to_string(r) + " could not be re-attached");
  }
  send_attachments(before, recovery);
}

void Simulator::send_attachments(const OverlayTree& before, std::optional<std::size_t> recovery) {
  for (const auto& [child, parent] : overlay_.parent_of) {
    if (parent == kNoNode) continue;
    auto it = before.parent_of.find(child);
    if (it != before.parent_of.end() && it->second == parent) continue;
    if (!alive(parent)) continue;
    Message m;
    m.kind = MsgKind::attach;
    m.from = parent;
    m.to = child;
    m.detail = "depth=" + std::to_string(overlay_.depth_of.at(child));
    m.recovery = recovery;
    if (recovery) ++attach_pending_[*recovery];
    send(std::move(m));
  }
  log("Overlay", overlay_.root, kNoNode,
      "members=" + std::to_string(overlay_.size()) + " height=" + std::to_string(overlay_.height));
}

void Simulator::attach_done(std::size_t recovery) {
  auto it = attach_pending_.find(recovery);
  if (it == attach_pending_.end()) return;
  auto& rec = out_.recoveries[recovery];
  rec.reconnected = std::max(rec.reconnected, now_);
  if (--it->second == 0) attach_pending_.erase(it);
}

void Simulator::overlay_changed(std::optional<std::size_t> recovery) {
  const OverlayTree before = overlay_;
  recompute_overlay();
  send_attachments(before, recovery);
}

// ---- streaming -------------------------------------------------------------

void Simulator::emit_packet(std::size_t stream) {
  auto& s = streams_[stream];
  if (alive(s.source) && conference_active_ && overlay_.contains(s.source)) {
    const std::uint64_t id = next_packet_++;
    out_.trace.emissions.push_back(PacketEmission{id, s.source, now_, overlay_.size() - 1});
    received_.insert({id, s.source});
    forward(s.source, kNoNode, id, s.source, 0, 0);
  } else {
    warn("packet from " + to_string(s.source) + " not sent");
  }
  if (--s.remaining > 0) schedule_timer(now_ + s.interval, Timer{TimerKind::stream_tick, s.source, 0, stream});
}

void Simulator::forward(NodeId at, NodeId previous, std::uint64_t packet, NodeId source, DelayUs delay,
                        DelayUs hops) {
  if (!overlay_.contains(at)) return;
  const auto tos = encode_tos(params_.data_precedence);
  for (auto next : overlay_.neighbours(at)) {
    if (next == previous) continue;
    Message m;
    m.kind = MsgKind::data;
    m.from = at;
    m.to = next;
    m.precedence = params_.data_precedence;
    m.packet = packet;
    m.source = source;
    m.path_delay = delay + delay_.at(at, next);
    m.path_hops = hops + hops_.at(at, next);
    m.detail = "pkt=" + std::to_string(packet) + " src=" + to_string(source) + " tos=" + std::to_string(tos.byte());
    out_.trace.hops.push_back(PacketHop{packet, source, at, next, now_});
    send(std::move(m));
  }
}

void Simulator::on_data(const Message& m) {
  if (!received_.insert({m.packet, m.to}).second) return;
  out_.trace.receipts.push_back(PacketReceipt{m.packet, m.source, m.to, m.path_delay, m.path_hops, now_});
  forward(m.to, m.from, m.packet, m.source, m.path_delay, m.path_hops);
}

// ---- conference control ----------------------------------------------------

void Simulator::flush_control() {
  for (const auto& c : server_.drain()) {
    std::string line = format_millis(now_);
    line += ' ';
    line += to_string(c.kind);
    line += ' ' + c.sender + ' ' + c.recipient + ' ' + (c.conference.empty() ? "-" : c.conference) + ' ' +
            (c.payload.empty() ? "-" : c.payload);
    out_.control_log.push_back(std::move(line));
  }
}

void Simulator::conference_action(const ScriptAction& a) {
  try {
    switch (a.kind) {
      case ActionKind::login: server_.login(a.user, a.other); break;
      case ActionKind::logout: server_.logout(a.user); break;
      case ActionKind::join_conference:
        if (a.role == Role::participant) {
          server_.join_as_participant(a.user, a.conference, a.token);
        } else {
          server_.join_as_spectator(a.user, a.conference);
        }
        break;
      case ActionKind::leave_conference: server_.leave_conference(a.user, a.conference); break;
      case ActionKind::call: server_.call(a.user, a.other); break;
      case ActionKind::accept_call: server_.accept_call(a.user, a.other); break;
      case ActionKind::end_call: server_.end_call(a.user, a.other); break;
      default: break;
    }
  } catch (const ConferenceError& e) {
    out_.control_log.push_back(format_millis(now_) + " REJECTED server " + a.user + " " +
                               (a.conference.empty() ? "-" : a.conference) + " " + e.what());
  }
  flush_control();
}

// ---- dispatch --------------------------------------------------------------

void Simulator::on_timer(const Timer& t) {
  switch (t.kind) {
    case TimerKind::heartbeat: {
      const auto& st = nodes_[t.owner];
      if (st.alive && st.member && st.heartbeat_epoch == t.epoch) heartbeat_tick(t.owner);
      break;
    }
    case TimerKind::join_retry: {
      auto it = joins_.find(t.owner);
      if (it == joins_.end() || it->second.epoch != t.epoch) break;
      if (++it->second.attempts > params_.join_retries) {
        warn("join of node " + to_string(t.owner) + " abandoned after " + std::to_string(params_.join_retries) +
             " retries");
        joins_.erase(it);
        break;
      }
      log("JoinRetry", t.owner, kNoNode, "attempt=" + std::to_string(it->second.attempts));
      attempt_join(t.owner);
      break;
    }
    case TimerKind::stream_tick:
      emit_packet(t.stream);
      break;
  }
}

void Simulator::on_script(const ScriptAction& a) {
  switch (a.kind) {
    case ActionKind::node_join: start_join(a.node); break;
    case ActionKind::node_leave: leave(a.node); break;
    case ActionKind::node_crash: crash(a.node); break;
    case ActionKind::start_conference: {
      if (a.node != kNoNode) source_ = a.node;
      if (!threshold_) {
        warn("conference not started: insufficient bandwidth");
        break;
      }
      conference_active_ = true;
      overlay_changed();
      break;
    }
    case ActionKind::send_stream: {
      const DelayUs interval = a.interval_us > 0 ? a.interval_us : params_.packet_interval_us;
      const auto count = static_cast<std::size_t>(std::max<DelayUs>(1, (a.duration_us + interval - 1) / interval));
      streams_.push_back(Stream{a.node, count, interval});
      schedule_timer(now_, Timer{TimerKind::stream_tick, a.node, 0, streams_.size() - 1});
      break;
    }
    case ActionKind::set_bandwidth: {
      try {
        threshold_ = compute_fanout_threshold(a.free_bps, a.application_bps);
        log("Bandwidth", kNoNode, kNoNode, "p=" + std::to_string(threshold_->p));
      } catch (const std::exception& e) {
        warn(e.what());
        break;
      }
      if (conference_active_) overlay_changed();
      break;
    }
    case ActionKind::move_host: {
      topo_.move_host(a.node, a.token);
      for (auto& p : profiles_) {
        if (p.node == a.node) p.gateway = a.token;
      }
      log("Move", a.node, kNoNode, "gateway=" + a.token);
      if (conference_active_) overlay_changed();
      break;
    }
    default:
      conference_action(a);
      break;
  }
}

RunResult Simulator::run() {
  for (std::size_t i = 0; i < sc_.script.size(); ++i) schedule(sc_.script[i].at, EventType::script, i, true);

  const auto end = params_.end_time;
  while (!queue_.empty()) {
    const Event e = queue_.top();
    if (end && e.time > *end) break;
    if (!end && pending_ == 0 && undetected_.empty()) break;
    queue_.pop();
    now_ = e.time;
    if (e.counts) --pending_;
    if (++out_.events_processed > params_.event_budget) {
      throw SimulationError("event budget of " + std::to_string(params_.event_budget) +
                            " exhausted without quiescence");
    }
    switch (e.type) {
      case EventType::deliver: deliver(e.index); break;
      case EventType::timer: on_timer(timers_[e.index]); break;
      case EventType::script: on_script(sc_.script[e.index]); break;
    }
  }
  out_.end_time = end ? *end : now_;
  for (; !queue_.empty(); queue_.pop()) {
    if (queue_.top().type == EventType::deliver) ++out_.messages_in_flight;
  }
  const auto& metric_matrix = params_.stretch_metric == PathMetric::delay ? delay_ : hops_;
  out_.metrics = metrics_from_trace(out_.trace, topo_, metric_matrix, params_.stretch_metric);
  out_.overlay = overlay_;
  out_.hierarchy = h_;
  if (conference_active_ && !overlay_.empty()) out_.stream_source = effective_source();
  return std::move(out_);
}

}  // namespace

RunResult run_simulation(const Scenario& scenario) {
  Simulator sim(scenario);
  return sim.run();
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace netrawalm
