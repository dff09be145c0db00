#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "certmesh/messages.hpp"
#include "certmesh/routing.hpp"
#include "certmesh/rng.hpp"
#include "certmesh/trust.hpp"
#include "certmesh/types.hpp"

namespace certmesh {

struct ProtocolParams {
  std::vector<std::uint32_t> ttl_schedule{2, 4, 8};
  Seconds hop_delay = 0.001;       // mirrors the radio model, used for timeouts
  Seconds timeout_margin = 0.005;  // per-attempt timeout = 2*ttl*hop_delay + margin
  std::size_t k_paths = 3;         // disjoint paths per CREP
  std::size_t route_cache_capacity = 8;
  std::size_t self_reply_threshold = 3;  // target self-replies below this many certifiers
  std::size_t offer_cap = 5;             // mutual certifications per session from offers
  Seconds cert_lifetime = 120.0;
  Seconds refresh_period = 30.0;  // <= 0 disables the refresh loop
  bool rotate_on_refresh = false;
  double default_mpktv = 0.5;  // used outside explicit sessions (notice gating)
  TrustParams trust;
};

// One requester-side certificate exchange (or bootstrap) in flight.
struct ExchangeSession {
  enum class State { pending, accepted, failed };

  NodeId origin;
  NodeId target;
  Mpktv mpktv;
  bool bootstrap = false;
  std::size_t required = 0;  // bootstrap: distinct certifiers wanted

  int attempt = 1;
  Seconds started_at = 0;
  std::optional<Seconds> decided_at;
  State state = State::pending;

  std::vector<KeyCandidate> candidates;
  std::set<std::uint32_t> request_ids;
  std::set<std::pair<NodeId, std::uint32_t>> seen_creps;
  std::vector<std::pair<NodeId, Certificate>> offers;

  PublicKey accepted_key;
  std::vector<NodeId> winning_certifiers;
  double combined = 0.0;
};

struct CreqTimeout {
  NodeId target;
  int attempt = 0;
};
struct ContactTimeout {
  NodeId target;
};
struct RefreshTick {};

using TimerPayload = std::variant<CreqTimeout, ContactTimeout, RefreshTick>;

// Everything a node needs from the outside world. The simulator implements
// this; unit tests use a recording stub.
class Env {
 public:
  virtual ~Env() = default;
  virtual Seconds now() const = 0;
  virtual void broadcast(NodeId from, const Message& msg) = 0;
  virtual void send_routed(NodeId from, const SourceRoute& route, const Message& msg) = 0;
  virtual void schedule(NodeId node, Seconds delay, const TimerPayload& timer) = 0;
  virtual void session_decided(const ExchangeSession& session) = 0;
  virtual Rng& node_rng(NodeId node) = 0;  // consumed only by key rotation
};

// Certificates a node holds, keyed (subject, issuer) so re-issuing replaces.
struct CertStore {
  std::map<NodeId, PublicKey> bindings;  // keys this node has accepted
  std::map<std::pair<NodeId, NodeId>, Certificate> held;
  std::vector<Certificate> issued;

  void store_cert(const Certificate& cert) { held[{cert.subject, cert.issuer}] = cert; }
  bool has_valid_cert_about(NodeId subject, Seconds now) const;
  std::vector<Certificate> certs_about(NodeId subject) const;
  void purge_expired(Seconds now);
};

// Installed on attacker nodes: supplies the fabricated identity to certify
// for a given target. Shared per-target keypairs model collusion.
struct AdversaryHook {
  std::function<KeyPair(NodeId target)> fabricated_keypair;
  bool drop_relayed_certificates = false;
};

// Per-node protocol state machine. All handlers are run-to-completion
// reactions to delivered messages and timers; a node is only ever touched
// from its own events, so a run is single-threaded and deterministic.
class Node {
 public:
  Node(NodeId id, KeyPair keys, SignatureScheme& scheme, ProtocolParams params);

  NodeId id() const { return id_; }
  const KeyPair& keys() const { return keys_; }
  const PublicKey& public_key() const { return keys_.pub; }

  TrustTable& trust() { return trust_; }
  const TrustTable& trust() const { return trust_; }
  CertStore& store() { return store_; }
  const CertStore& store() const { return store_; }
  RouteCache& route_cache() { return cache_; }
  const ProtocolParams& params() const { return params_; }

  void set_adversary(AdversaryHook hook) { adversary_ = std::move(hook); }
  bool is_attacker() const { return adversary_.has_value(); }
  bool drops_relayed_certificates() const {
    return adversary_ && adversary_->drop_relayed_certificates;
  }

  const ExchangeSession* session_for(NodeId target) const;
  const std::map<NodeId, ExchangeSession>& sessions() const { return sessions_; }
  const std::vector<NodeId>* certifier_view_of(NodeId origin) const;

  // Requester-side entry points.
  void start_exchange(Env& env, NodeId target, Mpktv mpktv);
  void start_bootstrap(Env& env, std::size_t required);
  void discover_routes(Env& env, NodeId destination, std::uint32_t ttl);
  void schedule_refresh(Env& env);

  // Event entry points. `via` is the source route the message arrived on
  // (null for flood hops); the reversed route is cached before handling.
  void on_message(Env& env, NodeId from, const Message& msg, const SourceRoute* via = nullptr);
  void on_timer(Env& env, const TimerPayload& timer);

  // Called while forwarding a RouteReply so every node on the reply path
  // learns the discovered route.
  void absorb_route_reply(const RouteReply& reply);

  // Fresh self-signed certificate for the node's current key.
  Certificate self_certificate(Seconds now) const;

 private:
  void on_rreq(Env& env, const RouteRequest& m);
  void on_rrep(Env& env, const RouteReply& m);
  void on_route_error(Env& env, const RouteError& m);
  void on_creq(Env& env, const CertRequest& m);
  void on_crep(Env& env, const CertReply& m);
  void on_target_notice(Env& env, const TargetNotice& m, const SourceRoute* via);
  void on_origin_cert_request(Env& env, const OriginCertRequest& m, const SourceRoute* via);
  void on_origin_cert_reply(Env& env, const OriginCertReply& m);
  void on_first_contact(Env& env, const FirstContact& m, const SourceRoute* via);
  void on_first_contact_ack(Env& env, const FirstContactAck& m);
  void on_offer_accept(Env& env, const OfferAccept& m, const SourceRoute* via);
  void on_offer_ack(Env& env, const OfferAck& m);
  void on_refresh_request(Env& env, const RefreshRequest& m, const SourceRoute* via);
  void on_refresh_reply(Env& env, const RefreshReply& m);

  void handle_creq_as_attacker(Env& env, const CertRequest& m);
  void reply_to_bootstrap_creq(Env& env, const CertRequest& m);

  void send_creq(Env& env, ExchangeSession& session);
  void finalize_acceptance(Env& env, ExchangeSession& session, const Decision& decision);
  void fail_session(Env& env, ExchangeSession& session);
  void handle_bootstrap_crep(Env& env, ExchangeSession& session, const CertReply& m,
                             const PublicKey& replier_key);
  void begin_first_contact(Env& env, ExchangeSession& session);
  void send_first_contact(Env& env, NodeId target, const SourceRoute& route);
  void accept_offer(Env& env, NodeId peer, const Certificate& peer_self_cert);

  ExchangeSession* session_by_request(std::uint32_t request_id);
  std::uint32_t fresh_request_id();

  // Route helpers.
  std::optional<SourceRoute> best_route(NodeId destination) const;
  bool send_to(Env& env, NodeId destination, const Message& msg);
  void reply_along(Env& env, const std::vector<NodeId>& path_from_origin, const Message& msg);

  // Identity helpers.
  template <class M>
  void sign_envelope(M& m) const;
  bool envelope_ok(const Message& msg, const PublicKey& key, std::span<const std::uint8_t> sig) const;
  std::optional<PublicKey> resolve_key(NodeId claimed, const Certificate& attached_self_cert,
                                       Seconds now) const;
  Certificate issue_for(NodeId subject, const PublicKey& key, Seconds now);
  Seconds attempt_timeout(std::uint32_t ttl) const;

  NodeId id_;
  KeyPair keys_;
  SignatureScheme& scheme_;
  ProtocolParams params_;

  TrustTable trust_;
  CertStore store_;
  RouteCache cache_;

  std::map<NodeId, ExchangeSession> sessions_;  // keyed by target
  std::map<std::uint32_t, NodeId> request_to_target_;
  std::set<std::pair<NodeId, std::uint32_t>> seen_creq_;
  std::set<std::pair<NodeId, std::uint32_t>> seen_rreq_;
  std::set<std::pair<NodeId, std::uint32_t>> answered_creq_;
  std::map<std::uint32_t, Certificate> creq_origin_certs_;
  std::map<NodeId, NodeId> pending_pull_;  // origin -> relay asked for its cert
  std::map<NodeId, std::vector<NodeId>> certifier_view_;
  std::set<NodeId> pending_contact_;
  std::map<NodeId, SourceRoute> contact_route_used_;
  std::set<NodeId> contact_retry_done_;
  std::optional<AdversaryHook> adversary_;
  std::uint32_t next_request_seq_ = 0;
};

}  // namespace certmesh
