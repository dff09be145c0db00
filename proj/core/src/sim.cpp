#include "certmesh/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace certmesh {

std::string format_trace_line(Seconds t, const char* kind, std::int64_t src, std::int64_t dst,
                              std::int64_t request_id) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.6f\t%s\t%lld\t%lld\t%lld", t, kind,
                static_cast<long long>(src), static_cast<long long>(dst),
                static_cast<long long>(request_id));
  return std::string(buf);
}

FileTrace::FileTrace(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open trace file: " + path);
}

void FileTrace::line(const std::string& text) { out_ << text << '\n'; }

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Vec2 leg_position(const Vec2& from, const Vec2& to, double speed, Seconds depart, Seconds t) {
  double total = distance(from, to);
  if (total <= 0 || speed <= 0) return from;
  double travelled = speed * (t - depart);
  if (travelled <= 0) return from;
  if (travelled >= total) return to;
  double f = travelled / total;
  return Vec2{from.x + f * (to.x - from.x), from.y + f * (to.y - from.y)};
}

// ---------------------------------------------------------------------------
// Mobility
// ---------------------------------------------------------------------------

RandomWaypointMobility::RandomWaypointMobility(double area_x, double area_y, double vmax,
                                               Seconds pause, std::size_t node_count,
                                               std::uint64_t seed)
    : area_x_(area_x), area_y_(area_y), vmax_(vmax), pause_(pause) {
  if (!(vmax > 0)) throw std::invalid_argument("vmax must be positive");
  motions_.resize(node_count);
  streams_.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    streams_.emplace_back(derive_seed(seed, 0x6d6f6275ull /*"mobu"*/, i));
    Vec2 start{streams_[i].uniform(0, area_x_), streams_[i].uniform(0, area_y_)};
    motions_[i] = Motion{start, start, 0, 0, 0, true, 0};  // first leg picked at t=0
  }
}

Vec2 RandomWaypointMobility::position(NodeId node, Seconds t) const {
  const Motion& m = motions_[node.value];
  if (m.paused) return m.to;
  return leg_position(m.from, m.to, m.speed, m.depart, t);
}

Seconds RandomWaypointMobility::advance(NodeId node, Seconds now) {
  Motion& m = motions_[node.value];
  if (m.paused) {
    if (now + 1e-12 < m.pause_until) return m.pause_until;
    Rng& rng = streams_[node.value];
    Vec2 waypoint{rng.uniform(0, area_x_), rng.uniform(0, area_y_)};
    double speed = vmax_ * (1.0 - rng.uniform());  // uniform in (0, vmax]
    m.from = m.to;
    m.to = waypoint;
    m.speed = speed;
    m.depart = now;
    m.arrive = now + distance(m.from, m.to) / speed;
    m.paused = false;
    return m.arrive;
  }
  if (now + 1e-12 < m.arrive) return m.arrive;
  m.from = m.to;
  m.paused = true;
  m.pause_until = now + pause_;
  return m.pause_until;
}

// ---------------------------------------------------------------------------
// Adversary
// ---------------------------------------------------------------------------

AdversaryModel::AdversaryModel(AttackerMode mode, std::set<NodeId> members, std::uint64_t seed,
                               SimOracleScheme& scheme)
    : mode_(mode), members_(std::move(members)), seed_(seed), scheme_(scheme) {}

KeyPair AdversaryModel::fabricated_keypair(NodeId attacker, NodeId target) {
  if (!is_member(attacker)) throw std::logic_error("fabricated key for non-member");
  std::uint32_t group = mode_ == AttackerMode::colluding ? 0xffffffffu : attacker.value;
  auto key = std::make_pair(group, target.value);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  Rng stream(derive_seed(seed_, 0xfab0000ull + group, target.value));
  SecretKey secret;
  auto raw = stream.bytes(kKeyTokenBytes);
  std::copy(raw.begin(), raw.end(), secret.token.begin());
  KeyPair kp = scheme_.adopt_secret(secret);
  memo_.emplace(key, kp);
  return kp;
}

// ---------------------------------------------------------------------------
// Event queue
// ---------------------------------------------------------------------------

void EventQueue::push(Seconds t, SimEvent event) {
  heap_.push(Item{t, seq_++, std::move(event)});
}

std::pair<Seconds, SimEvent> EventQueue::pop() {
  Item item = heap_.top();
  heap_.pop();
  return {item.t, std::move(item.event)};
}

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

World::World(const WorldConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  mobility_.emplace(cfg.area_x, cfg.area_y, cfg.vmax, cfg.pause, cfg.node_count, seed);
  nodes_.reserve(cfg.node_count);
  node_rngs_.reserve(cfg.node_count);
  for (std::size_t i = 0; i < cfg.node_count; ++i) {
    NodeId id{static_cast<std::uint32_t>(i)};
    KeyPair keys = generate_keypair(scheme_, id, seed);
    nodes_.push_back(std::make_unique<Node>(id, keys, scheme_, cfg.protocol));
    node_rngs_.emplace_back(derive_seed(seed, 0x6e6f6465ull /*"node"*/, i));
    if (cfg_.mobility) queue_.push(0.0, MobilityEvent{id});
  }
}

World::World(const WorldConfig& cfg, std::uint64_t seed, std::vector<Vec2> positions)
    : cfg_(cfg), fixed_positions_(std::move(positions)) {
  if (fixed_positions_.size() != cfg.node_count) {
    throw std::invalid_argument("fixture positions must match node count");
  }
  cfg_.mobility = false;
  nodes_.reserve(cfg.node_count);
  for (std::size_t i = 0; i < cfg.node_count; ++i) {
    NodeId id{static_cast<std::uint32_t>(i)};
    KeyPair keys = generate_keypair(scheme_, id, seed);
    nodes_.push_back(std::make_unique<Node>(id, keys, scheme_, cfg.protocol));
    node_rngs_.emplace_back(derive_seed(seed, 0x6e6f6465ull, i));
  }
}

void World::make_attacker(NodeId id, AdversaryModel& adversary, bool drop_relayed) {
  AdversaryHook hook;
  hook.fabricated_keypair = [&adversary, id](NodeId target) {
    return adversary.fabricated_keypair(id, target);
  };
  hook.drop_relayed_certificates = drop_relayed;
  node(id).set_adversary(std::move(hook));
}

Vec2 World::position(NodeId id) const {
  if (mobility_) return mobility_->position(id, now_);
  return fixed_positions_[id.value];
}

bool World::linked(NodeId a, NodeId b) const {
  if (a == b) return false;
  return distance(position(a), position(b)) <= cfg_.radio.range;
}

std::vector<NodeId> World::neighbors(NodeId id) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeId other{static_cast<std::uint32_t>(i)};
    if (other != id && linked(id, other)) out.push_back(other);
  }
  return out;
}

void World::schedule_session(Seconds at, NodeId origin, NodeId target, double mpktv) {
  queue_.push(at, SessionStartEvent{origin, target, mpktv});
}

void World::account_send(const Message& msg) {
  auto encoded = encode_message(msg);
  messages_sent_ += 1;
  bytes_sent_ += encoded.size();
  if (encoded_sink_) encoded_sink_(encoded);
}

void World::broadcast(NodeId from, const Message& msg) {
  account_send(msg);
  if (const auto* creq = std::get_if<CertRequest>(&msg)) {
    creq_broadcasts_[{creq->origin, creq->target}] += 1;
  }
  for (NodeId nb : neighbors(from)) {
    queue_.push(now_ + cfg_.radio.hop_delay, Delivery{from, nb, msg, std::nullopt});
  }
}

void World::send_routed(NodeId from, const SourceRoute& route, const Message& msg) {
  if (route.source() != from) throw std::logic_error("routed send must start at sender");
  NodeId next = route.hops()[1];
  if (!linked(from, next)) {
    node(from).route_cache().invalidate_link(from, next);
    if (!std::holds_alternative<RouteError>(msg)) {
      // Synchronous local failure: the sender is its own error reporter.
      RouteError err;
      err.reporter = from;
      err.broken_from = from;
      err.broken_to = next;
      err.dropped_kind = kind_tag(msg);
      err.dropped_request_id = request_id_of(msg).value_or(0);
      err.dropped_destination = route.destination();
      queue_.push(now_, Delivery{from, from, err, std::nullopt});
    }
    return;
  }
  account_send(msg);
  queue_.push(now_ + cfg_.radio.hop_delay, Delivery{from, next, msg, {{route, 1}}});
}

void World::schedule(NodeId node, Seconds delay, const TimerPayload& timer) {
  queue_.push(now_ + delay, TimerEvent{node, timer});
}

void World::session_decided(const ExchangeSession& session) {
  decided_.push_back(session);
  if (trace_) {
    const char* kind = session.state == ExchangeSession::State::accepted ? "ACCEPT" : "FAIL";
    trace_->line(format_trace_line(now_, kind, session.origin.value, session.target.value,
                                   static_cast<std::int64_t>(session.attempt)));
  }
}

void World::emit_route_error(NodeId reporter, const SourceRoute& route, std::size_t cursor,
                             const Message& dropped) {
  if (std::holds_alternative<RouteError>(dropped)) return;  // no errors about errors
  RouteError err;
  err.reporter = reporter;
  err.broken_from = route.hops()[cursor];
  err.broken_to = route.hops()[cursor + 1];
  err.dropped_kind = kind_tag(dropped);
  err.dropped_request_id = request_id_of(dropped).value_or(0);
  err.dropped_destination = route.destination();
  if (cursor == 0) {
    queue_.push(now_, Delivery{reporter, reporter, err, std::nullopt});
    return;
  }
  std::vector<NodeId> back(route.hops().rend() - static_cast<std::ptrdiff_t>(cursor) - 1,
                           route.hops().rend());
  send_routed(reporter, SourceRoute(std::move(back)), err);
}

void World::forward_or_deliver(const Delivery& d) {
  if (!d.routed) {
    node(d.to).on_message(*this, d.from, d.msg, nullptr);
    return;
  }
  const auto& [route, cursor] = *d.routed;
  if (cursor + 1 == route.hops().size()) {
    node(d.to).on_message(*this, d.from, d.msg, &route);
    return;
  }
  Node& relay = node(d.to);
  if (const auto* rrep = std::get_if<RouteReply>(&d.msg)) {
    relay.absorb_route_reply(*rrep);  // reply paths populate caches en route
  }
  if (relay.drops_relayed_certificates() &&
      (std::holds_alternative<CertReply>(d.msg) || std::holds_alternative<OriginCertReply>(d.msg))) {
    return;
  }
  NodeId next = route.hops()[cursor + 1];
  if (!linked(d.to, next)) {
    relay.route_cache().invalidate_link(d.to, next);
    emit_route_error(d.to, route, cursor, d.msg);
    return;
  }
  account_send(d.msg);
  queue_.push(now_ + cfg_.radio.hop_delay, Delivery{d.to, next, d.msg, {{route, cursor + 1}}});
}

void World::trace_event(Seconds t, const SimEvent& event) {
  if (!trace_) return;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Delivery>) {
          std::int64_t req = request_id_of(e.msg) ? *request_id_of(e.msg) : -1;
          trace_->line(format_trace_line(t, kind_name(e.msg), e.from.value, e.to.value, req));
        } else if constexpr (std::is_same_v<T, TimerEvent>) {
          const char* kind = std::holds_alternative<CreqTimeout>(e.payload)  ? "T_CREQ"
                             : std::holds_alternative<ContactTimeout>(e.payload) ? "T_CONTACT"
                                                                                 : "T_REFRESH";
          trace_->line(format_trace_line(t, kind, e.node.value, e.node.value, -1));
        } else if constexpr (std::is_same_v<T, SessionStartEvent>) {
          trace_->line(format_trace_line(t, "SESSION", e.origin.value, e.target.value, -1));
        } else if constexpr (std::is_same_v<T, MobilityEvent>) {
          trace_->line(format_trace_line(t, "MOVE", e.node.value, e.node.value, -1));
        }
      },
      event);
}

void World::dispatch(Seconds t, const SimEvent& event) {
  now_ = t;
  trace_event(t, event);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Delivery>) {
          forward_or_deliver(e);
        } else if constexpr (std::is_same_v<T, TimerEvent>) {
          node(e.node).on_timer(*this, e.payload);
        } else if constexpr (std::is_same_v<T, SessionStartEvent>) {
          node(e.origin).start_exchange(*this, e.target, Mpktv{e.mpktv});
        } else if constexpr (std::is_same_v<T, MobilityEvent>) {
          Seconds next = mobility_->advance(e.node, now_);
          if (next <= cfg_.duration) queue_.push(next, MobilityEvent{e.node});
        }
      },
      event);
}

void World::run(Seconds until) {
  while (!queue_.empty() && queue_.next_time() <= until) {
    auto [t, event] = queue_.pop();
    dispatch(t, event);
  }
  now_ = until;
}

void World::fail_pending_sessions() {
  for (auto& node_ptr : nodes_) {
    for (const auto& [target, session] : node_ptr->sessions()) {
      if (session.state == ExchangeSession::State::pending) {
        ExchangeSession failed = session;
        failed.state = ExchangeSession::State::failed;
        failed.decided_at = now_;
        decided_.push_back(failed);
      }
    }
  }
}

}  // namespace certmesh
