#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "certmesh/node.hpp"
#include "certmesh/trace.hpp"

namespace certmesh {

struct Vec2 {
  double x = 0;
  double y = 0;
};

double distance(const Vec2& a, const Vec2& b);

// Unit-disk radio: a symmetric link exists iff nodes are within range.
struct RadioModel {
  double range = 250.0;
  Seconds hop_delay = 0.001;
};

// Random waypoint motion. Every node owns its random stream, so the draw
// sequence never depends on event interleaving.
class RandomWaypointMobility {
 public:
  RandomWaypointMobility(double area_x, double area_y, double vmax, Seconds pause,
                         std::size_t node_count, std::uint64_t seed);

  Vec2 position(NodeId node, Seconds t) const;

  // Advances the node's plan at a transition instant (arrival or pause end)
  // and returns the time of its next transition.
  Seconds advance(NodeId node, Seconds now);

  double vmax() const { return vmax_; }

 private:
  struct Motion {
    Vec2 from, to;
    Seconds depart = 0, arrive = 0;
    double speed = 0;
    bool paused = true;
    Seconds pause_until = 0;
  };

  double area_x_, area_y_, vmax_;
  Seconds pause_;
  std::vector<Motion> motions_;
  std::vector<Rng> streams_;
};

// Straight-line position along a leg, clamped to the endpoints.
Vec2 leg_position(const Vec2& from, const Vec2& to, double speed, Seconds depart, Seconds t);

enum class AttackerMode { isolated, colluding };

// Supplies fabricated identities: one per (attacker, target) in isolated
// mode, one shared per target in colluding mode. Keys are derived from the
// scenario seed, so call order never matters.
class AdversaryModel {
 public:
  AdversaryModel(AttackerMode mode, std::set<NodeId> members, std::uint64_t seed,
                 SimOracleScheme& scheme);

  AttackerMode mode() const { return mode_; }
  const std::set<NodeId>& members() const { return members_; }
  bool is_member(NodeId node) const { return members_.contains(node); }

  KeyPair fabricated_keypair(NodeId attacker, NodeId target);

 private:
  AttackerMode mode_;
  std::set<NodeId> members_;
  std::uint64_t seed_;
  SimOracleScheme& scheme_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, KeyPair> memo_;
};

struct Delivery {
  NodeId from;
  NodeId to;
  Message msg;
  // Present for source-routed packets: the route and the index of `to` in it.
  std::optional<std::pair<SourceRoute, std::size_t>> routed;
};
struct TimerEvent {
  NodeId node;
  TimerPayload payload;
};
struct SessionStartEvent {
  NodeId origin;
  NodeId target;
  double mpktv = 0.5;
};
struct MobilityEvent {
  NodeId node;
};

using SimEvent = std::variant<Delivery, TimerEvent, SessionStartEvent, MobilityEvent>;

// Time-ordered queue; insertion sequence breaks time ties, which makes the
// processing order total and runs replayable.
class EventQueue {
 public:
  void push(Seconds t, SimEvent event);
  bool empty() const { return heap_.empty(); }
  Seconds next_time() const { return heap_.top().t; }
  std::pair<Seconds, SimEvent> pop();

 private:
  struct Item {
    Seconds t;
    std::uint64_t seq;
    SimEvent event;
    bool operator>(const Item& o) const { return std::tie(t, seq) > std::tie(o.t, o.seq); }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
  std::uint64_t seq_ = 0;
};

struct WorldConfig {
  std::size_t node_count = 0;
  double area_x = 1500, area_y = 1500;
  double vmax = 10;
  Seconds pause = 30;
  bool mobility = true;
  RadioModel radio;
  ProtocolParams protocol;
  Seconds duration = 120;
};

// One simulation instance: nodes, motion, radio, and the event loop. Strictly
// single-threaded; isolated instances may run concurrently.
class World final : public Env {
 public:
  // Random placement (scenario runs).
  World(const WorldConfig& cfg, std::uint64_t seed);
  // Fixed placement, mobility off (topology fixtures).
  World(const WorldConfig& cfg, std::uint64_t seed, std::vector<Vec2> positions);

  Node& node(NodeId id) { return *nodes_[id.value]; }
  const Node& node(NodeId id) const { return *nodes_[id.value]; }
  std::size_t node_count() const { return nodes_.size(); }
  SimOracleScheme& scheme() { return scheme_; }

  void make_attacker(NodeId id, AdversaryModel& adversary, bool drop_relayed = false);

  Vec2 position(NodeId id) const;
  bool linked(NodeId a, NodeId b) const;
  std::vector<NodeId> neighbors(NodeId id) const;

  void schedule_session(Seconds at, NodeId origin, NodeId target, double mpktv);
  void run(Seconds until);
  Seconds current_time() const { return now_; }

  // Env interface (called by node handlers).
  Seconds now() const override { return now_; }
  void broadcast(NodeId from, const Message& msg) override;
  void send_routed(NodeId from, const SourceRoute& route, const Message& msg) override;
  void schedule(NodeId node, Seconds delay, const TimerPayload& timer) override;
  void session_decided(const ExchangeSession& session) override;
  Rng& node_rng(NodeId node) override { return node_rngs_[node.value]; }

  void set_trace(TraceSink* sink) { trace_ = sink; }
  void set_encoded_sink(std::function<void(const std::vector<std::uint8_t>&)> sink) {
    encoded_sink_ = std::move(sink);
  }

  const std::vector<ExchangeSession>& decided_sessions() const { return decided_; }
  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t bytes_sent() const { return bytes_sent_; }
  const std::map<std::pair<NodeId, NodeId>, std::uint64_t>& creq_broadcasts() const {
    return creq_broadcasts_;
  }

  // Marks every still-pending session failed (end of run).
  void fail_pending_sessions();

 private:
  void dispatch(Seconds t, const SimEvent& event);
  void forward_or_deliver(const Delivery& d);
  void account_send(const Message& msg);
  void emit_route_error(NodeId reporter, const SourceRoute& route, std::size_t cursor,
                        const Message& dropped);
  void trace_event(Seconds t, const SimEvent& event);

  WorldConfig cfg_;
  SimOracleScheme scheme_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<Rng> node_rngs_;
  std::optional<RandomWaypointMobility> mobility_;
  std::vector<Vec2> fixed_positions_;
  EventQueue queue_;
  Seconds now_ = 0;

  std::vector<ExchangeSession> decided_;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t bytes_sent_ = 0;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> creq_broadcasts_;
  TraceSink* trace_ = nullptr;
  std::function<void(const std::vector<std::uint8_t>&)> encoded_sink_;
};

}  // namespace certmesh
