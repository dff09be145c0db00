#include "certmesh/node.hpp"

#include <algorithm>
#include <stdexcept>

namespace certmesh {

namespace {

bool within_window(const Certificate& cert, Seconds now) {
  return now >= cert.issued_at && now < cert.issued_at + cert.lifetime;
}

bool contains(const std::vector<NodeId>& v, NodeId id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

}  // namespace

bool CertStore::has_valid_cert_about(NodeId subject, Seconds now) const {
  for (auto it = held.lower_bound({subject, NodeId{0}});
       it != held.end() && it->first.first == subject; ++it) {
    if (within_window(it->second, now)) return true;
  }
  return false;
}

std::vector<Certificate> CertStore::certs_about(NodeId subject) const {
  std::vector<Certificate> out;
  for (auto it = held.lower_bound({subject, NodeId{0}});
       it != held.end() && it->first.first == subject; ++it) {
    out.push_back(it->second);
  }
  return out;
}

void CertStore::purge_expired(Seconds now) {
  std::erase_if(held, [&](const auto& kv) { return !within_window(kv.second, now); });
}

Node::Node(NodeId id, KeyPair keys, SignatureScheme& scheme, ProtocolParams params)
    : id_(id),
      keys_(std::move(keys)),
      scheme_(scheme),
      params_(std::move(params)),
      trust_(id, params_.trust),
      cache_(id, params_.route_cache_capacity) {
  if (params_.ttl_schedule.empty()) {
    throw std::invalid_argument("ttl schedule must not be empty");
  }
}

const ExchangeSession* Node::session_for(NodeId target) const {
  auto it = sessions_.find(target);
  return it == sessions_.end() ? nullptr : &it->second;
}

const std::vector<NodeId>* Node::certifier_view_of(NodeId origin) const {
  auto it = certifier_view_.find(origin);
  return it == certifier_view_.end() ? nullptr : &it->second;
}

Certificate Node::self_certificate(Seconds now) const {
  return issue_certificate(scheme_, keys_, id_, id_, keys_.pub, now, params_.cert_lifetime);
}

std::uint32_t Node::fresh_request_id() { return ++next_request_seq_; }

Seconds Node::attempt_timeout(std::uint32_t ttl) const {
  return 2.0 * ttl * params_.hop_delay + params_.timeout_margin;
}

template <class M>
void Node::sign_envelope(M& m) const {
  m.signature.clear();
  m.signature = scheme_.sign(keys_, signing_payload(Message(m)));
}

bool Node::envelope_ok(const Message& msg, const PublicKey& key,
                       std::span<const std::uint8_t> sig) const {
  return scheme_.verify(key, signing_payload(msg), sig);
}

std::optional<PublicKey> Node::resolve_key(NodeId claimed, const Certificate& attached_self_cert,
                                           Seconds now) const {
  auto it = store_.bindings.find(claimed);
  if (it != store_.bindings.end()) return it->second;
  if (attached_self_cert.subject == claimed &&
      validate_self_signed(scheme_, attached_self_cert, now)) {
    return attached_self_cert.subject_key;
  }
  return std::nullopt;
}

Certificate Node::issue_for(NodeId subject, const PublicKey& key, Seconds now) {
  Certificate cert =
      issue_certificate(scheme_, keys_, id_, subject, key, now, params_.cert_lifetime);
  store_.issued.push_back(cert);
  store_.store_cert(cert);
  return cert;
}

std::optional<SourceRoute> Node::best_route(NodeId destination) const {
  auto routes = cache_.lookup(destination);
  if (routes.empty()) return std::nullopt;
  std::sort(routes.begin(), routes.end(), [](const SourceRoute& a, const SourceRoute& b) {
    if (a.hops().size() != b.hops().size()) return a.hops().size() < b.hops().size();
    return a.hops() < b.hops();
  });
  return routes.front();
}

bool Node::send_to(Env& env, NodeId destination, const Message& msg) {
  auto route = best_route(destination);
  if (!route) return false;
  env.send_routed(id_, *route, msg);
  return true;
}

void Node::reply_along(Env& env, const std::vector<NodeId>& path_from_origin, const Message& msg) {
  std::vector<NodeId> rev(path_from_origin.rbegin(), path_from_origin.rend());
  env.send_routed(id_, SourceRoute(std::move(rev)), msg);
}

// ---------------------------------------------------------------------------
// Requester side
// ---------------------------------------------------------------------------

void Node::start_exchange(Env& env, NodeId target, Mpktv mpktv) {
  if (target == id_) {
    throw std::invalid_argument("start_exchange: target is self, use start_bootstrap");
  }
  ExchangeSession session;
  session.origin = id_;
  session.target = target;
  session.mpktv = mpktv;
  session.started_at = env.now();
  auto [it, inserted] = sessions_.insert_or_assign(target, std::move(session));
  send_creq(env, it->second);
}

void Node::start_bootstrap(Env& env, std::size_t required) {
  ExchangeSession session;
  session.origin = id_;
  session.target = id_;
  session.mpktv = Mpktv{0.0};
  session.bootstrap = true;
  session.required = required;
  session.started_at = env.now();
  auto [it, inserted] = sessions_.insert_or_assign(id_, std::move(session));
  if (required == 0) {
    it->second.state = ExchangeSession::State::accepted;
    it->second.decided_at = env.now();
    it->second.accepted_key = keys_.pub;
    env.session_decided(it->second);
    return;
  }
  send_creq(env, it->second);
}

void Node::send_creq(Env& env, ExchangeSession& session) {
  CertRequest creq;
  creq.origin = id_;
  creq.origin_cert = self_certificate(env.now());
  creq.target = session.target;
  creq.known_certifiers.assign(trust_.known().begin(), trust_.known().end());
  creq.request_id = fresh_request_id();
  creq.ttl = params_.ttl_schedule[static_cast<std::size_t>(session.attempt - 1)];
  creq.accumulated_path = {id_};

  session.request_ids.insert(creq.request_id);
  request_to_target_[creq.request_id] = session.target;
  env.broadcast(id_, creq);
  env.schedule(id_, attempt_timeout(creq.ttl), CreqTimeout{session.target, session.attempt});
}

void Node::discover_routes(Env& env, NodeId destination, std::uint32_t ttl) {
  if (destination == id_) {
    throw std::invalid_argument("discover_routes: destination is self");
  }
  RouteRequest rreq;
  rreq.origin = id_;
  rreq.target = destination;
  rreq.request_id = fresh_request_id();
  rreq.accumulated_hops = {id_};
  rreq.ttl = ttl;
  env.broadcast(id_, rreq);
}

void Node::schedule_refresh(Env& env) {
  if (params_.refresh_period > 0 && std::isfinite(params_.refresh_period)) {
    env.schedule(id_, params_.refresh_period, RefreshTick{});
  }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

void Node::on_message(Env& env, NodeId from, const Message& msg, const SourceRoute* via) {
  (void)from;
  store_.purge_expired(env.now());
  if (via != nullptr && via->destination() == id_) {
    cache_.insert(via->reversed());
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RouteRequest>) {
          on_rreq(env, m);
        } else if constexpr (std::is_same_v<T, RouteReply>) {
          on_rrep(env, m);
        } else if constexpr (std::is_same_v<T, RouteError>) {
          on_route_error(env, m);
        } else if constexpr (std::is_same_v<T, CertRequest>) {
          on_creq(env, m);
        } else if constexpr (std::is_same_v<T, CertReply>) {
          on_crep(env, m);
        } else if constexpr (std::is_same_v<T, TargetNotice>) {
          on_target_notice(env, m, via);
        } else if constexpr (std::is_same_v<T, OriginCertRequest>) {
          on_origin_cert_request(env, m, via);
        } else if constexpr (std::is_same_v<T, OriginCertReply>) {
          on_origin_cert_reply(env, m);
        } else if constexpr (std::is_same_v<T, FirstContact>) {
          on_first_contact(env, m, via);
        } else if constexpr (std::is_same_v<T, FirstContactAck>) {
          on_first_contact_ack(env, m);
        } else if constexpr (std::is_same_v<T, OfferAccept>) {
          on_offer_accept(env, m, via);
        } else if constexpr (std::is_same_v<T, OfferAck>) {
          on_offer_ack(env, m);
        } else if constexpr (std::is_same_v<T, RefreshRequest>) {
          on_refresh_request(env, m, via);
        } else if constexpr (std::is_same_v<T, RefreshReply>) {
          on_refresh_reply(env, m);
        }
      },
      msg);
}

void Node::on_timer(Env& env, const TimerPayload& timer) {
  store_.purge_expired(env.now());
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CreqTimeout>) {
          auto it = sessions_.find(t.target);
          if (it == sessions_.end()) return;
          ExchangeSession& session = it->second;
          if (session.state != ExchangeSession::State::pending) return;
          if (session.attempt != t.attempt) return;  // stale timer
          if (session.attempt < static_cast<int>(params_.ttl_schedule.size())) {
            session.attempt += 1;
            send_creq(env, session);
          } else {
            fail_session(env, session);
          }
        } else if constexpr (std::is_same_v<T, ContactTimeout>) {
          if (!pending_contact_.contains(t.target)) return;
          pending_contact_.erase(t.target);
          if (auto route = best_route(t.target)) {
            send_first_contact(env, t.target, *route);
          }
          // No route discovered: abandoned; our own certificate for the
          // accepted key stays issued.
        } else if constexpr (std::is_same_v<T, RefreshTick>) {
          if (params_.rotate_on_refresh) {
            keys_ = scheme_.generate(env.node_rng(id_));
          }
          for (NodeId peer : trust_.known()) {
            auto binding = store_.bindings.find(peer);
            if (binding == store_.bindings.end()) continue;
            RefreshRequest req;
            req.from = id_;
            req.to = peer;
            req.peer_cert = issue_for(peer, binding->second, env.now());
            req.from_cert = self_certificate(env.now());
            sign_envelope(req);
            send_to(env, peer, req);  // unreachable peers simply miss the round
          }
          schedule_refresh(env);
        }
      },
      timer);
}

// ---------------------------------------------------------------------------
// Route discovery
// ---------------------------------------------------------------------------

void Node::on_rreq(Env& env, const RouteRequest& m) {
  if (m.origin == id_ || contains(m.accumulated_hops, id_)) return;

  std::vector<NodeId> path_here = m.accumulated_hops;
  path_here.push_back(id_);
  {
    std::vector<NodeId> rev(path_here.rbegin(), path_here.rend());
    cache_.insert(SourceRoute(std::move(rev)));
  }

  if (m.target == id_) {
    // The target answers every arriving copy; distinct flood paths yield the
    // route diversity disjoint selection feeds on.
    RouteReply rrep{m.origin, m.target, m.request_id, SourceRoute(path_here)};
    reply_along(env, path_here, rrep);
    return;
  }

  if (!seen_rreq_.insert({m.origin, m.request_id}).second) return;

  // Cache-holding intermediates answer with spliced routes when acyclic.
  if (auto cached = best_route(m.target)) {
    std::vector<NodeId> full = path_here;
    bool acyclic = true;
    for (std::size_t i = 1; i < cached->hops().size(); ++i) {
      if (contains(full, cached->hops()[i])) {
        acyclic = false;
        break;
      }
      full.push_back(cached->hops()[i]);
    }
    if (acyclic) {
      RouteReply rrep{m.origin, m.target, m.request_id, SourceRoute(full)};
      reply_along(env, path_here, rrep);
      return;
    }
  }

  if (m.ttl > 1) {
    RouteRequest fwd = m;
    fwd.ttl -= 1;
    fwd.accumulated_hops = path_here;
    env.broadcast(id_, fwd);
  }
}

void Node::absorb_route_reply(const RouteReply& reply) {
  const auto& hops = reply.route.hops();
  auto me = std::find(hops.begin(), hops.end(), id_);
  if (me == hops.end()) return;
  std::size_t idx = static_cast<std::size_t>(me - hops.begin());
  if (hops.size() - idx >= 2) {
    cache_.insert(SourceRoute(std::vector<NodeId>(me, hops.end())));
  }
  if (idx >= 1) {
    std::vector<NodeId> back(hops.rend() - static_cast<std::ptrdiff_t>(idx) - 1, hops.rend());
    cache_.insert(SourceRoute(std::move(back)));
  }
}

void Node::on_rrep(Env& env, const RouteReply& m) {
  absorb_route_reply(m);
  if (m.origin != id_) return;
  if (pending_contact_.contains(m.target)) {
    pending_contact_.erase(m.target);
    if (auto route = best_route(m.target)) {
      send_first_contact(env, m.target, *route);
    }
  }
}

void Node::on_route_error(Env& env, const RouteError& m) {
  cache_.invalidate_link(m.broken_from, m.broken_to);
  // Retry a failed first contact once over an alternate cached route.
  Message probe = FirstContact{};
  if (m.dropped_kind == kind_tag(probe)) {
    NodeId target = m.dropped_destination;
    auto it = sessions_.find(target);
    if (it == sessions_.end() || it->second.state != ExchangeSession::State::accepted) return;
    if (!contact_retry_done_.insert(target).second) return;
    auto used = contact_route_used_.find(target);
    auto routes = cache_.lookup(target);
    std::sort(routes.begin(), routes.end(), [](const SourceRoute& a, const SourceRoute& b) {
      if (a.hops().size() != b.hops().size()) return a.hops().size() < b.hops().size();
      return a.hops() < b.hops();
    });
    for (const auto& route : routes) {
      if (used != contact_route_used_.end() && route == used->second) continue;
      send_first_contact(env, target, route);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// CREQ handling
// ---------------------------------------------------------------------------

void Node::on_creq(Env& env, const CertRequest& m) {
  if (m.origin == id_ || contains(m.accumulated_path, id_)) return;
  if (!seen_creq_.insert({m.origin, m.request_id}).second) return;

  std::vector<NodeId> path_here = m.accumulated_path;
  path_here.push_back(id_);
  {
    std::vector<NodeId> rev(path_here.rbegin(), path_here.rend());
    cache_.insert(SourceRoute(std::move(rev)));
  }
  creq_origin_certs_[m.request_id] = m.origin_cert;

  if (adversary_) {
    handle_creq_as_attacker(env, m);
    if (m.ttl > 1) {
      CertRequest fwd = m;
      fwd.ttl -= 1;
      fwd.accumulated_path = path_here;
      env.broadcast(id_, fwd);
    }
    return;
  }

  if (m.target == m.origin) {
    reply_to_bootstrap_creq(env, m);
    if (m.ttl > 1) {
      CertRequest fwd = m;
      fwd.ttl -= 1;
      fwd.accumulated_path = path_here;
      env.broadcast(id_, fwd);
    }
    return;
  }

  if (m.target == id_) {
    // The target itself replies only while it knows too few certifiers to
    // count on intermediate answers.
    if (trust_.known().size() < params_.self_reply_threshold) {
      CertReply crep;
      crep.request_id = m.request_id;
      crep.replier = id_;
      crep.certificates = {self_certificate(env.now())};
      crep.exchange_offer = false;
      crep.replier_cert = self_certificate(env.now());
      auto paths = select_disjoint_paths(cache_.lookup(m.origin), params_.k_paths);
      crep.paths_used = paths;
      sign_envelope(crep);
      for (const auto& path : paths) env.send_routed(id_, path, crep);
    }
    return;
  }

  bool can_answer = store_.bindings.contains(m.target) &&
                    store_.has_valid_cert_about(m.target, env.now()) &&
                    !answered_creq_.contains({m.origin, m.request_id});
  if (can_answer) {
    answered_creq_.insert({m.origin, m.request_id});
    CertReply crep;
    crep.request_id = m.request_id;
    crep.replier = id_;
    crep.certificates = {issue_for(m.target, store_.bindings.at(m.target), env.now())};
    crep.exchange_offer = !store_.bindings.contains(m.origin);
    crep.replier_cert = self_certificate(env.now());
    auto paths = select_disjoint_paths(cache_.lookup(m.origin), params_.k_paths);
    crep.paths_used = paths;
    sign_envelope(crep);
    for (const auto& path : paths) env.send_routed(id_, path, crep);

    // Cached route to the target: let it know who is asking, so the
    // authentication can become mutual through us.
    if (auto route = best_route(m.target)) {
      TargetNotice notice;
      notice.request_id = m.request_id;
      notice.relay = id_;
      notice.origin = m.origin;
      notice.target = m.target;
      notice.origin_cert = m.origin_cert;
      notice.relay_cert = self_certificate(env.now());
      sign_envelope(notice);
      env.send_routed(id_, *route, notice);
    }
    return;
  }

  if (m.ttl > 1) {
    CertRequest fwd = m;
    fwd.ttl -= 1;
    fwd.accumulated_path = path_here;
    env.broadcast(id_, fwd);
  }
}

void Node::handle_creq_as_attacker(Env& env, const CertRequest& m) {
  KeyPair fab = adversary_->fabricated_keypair(m.target);
  CertReply crep;
  crep.request_id = m.request_id;
  crep.replier = id_;
  if (m.target == id_) {
    // Never reveal the authentic binding: present a fabricated identity and
    // stay self-consistent under it.
    Certificate cert =
        issue_certificate(scheme_, fab, id_, id_, fab.pub, env.now(), params_.cert_lifetime);
    crep.certificates = {cert};
    crep.replier_cert = cert;
    crep.exchange_offer = false;
    crep.signature.clear();
    crep.paths_used = select_disjoint_paths(cache_.lookup(m.origin), params_.k_paths);
    crep.signature = scheme_.sign(fab, signing_payload(Message(crep)));
  } else {
    crep.certificates = {
        issue_certificate(scheme_, keys_, id_, m.target, fab.pub, env.now(), params_.cert_lifetime)};
    crep.replier_cert = self_certificate(env.now());
    crep.exchange_offer = !store_.bindings.contains(m.origin);
    crep.paths_used = select_disjoint_paths(cache_.lookup(m.origin), params_.k_paths);
    sign_envelope(crep);
  }
  for (const auto& path : crep.paths_used) env.send_routed(id_, path, crep);
}

void Node::reply_to_bootstrap_creq(Env& env, const CertRequest& m) {
  if (!validate_self_signed(scheme_, m.origin_cert, env.now())) return;
  const PublicKey& claimed = m.origin_cert.subject_key;
  auto binding = store_.bindings.find(m.origin);
  if (binding != store_.bindings.end() && binding->second != claimed) {
    return;  // conflicting binding: refuse to certify
  }
  if (binding == store_.bindings.end()) {
    store_.bindings.emplace(m.origin, claimed);
  }
  store_.store_cert(m.origin_cert);

  CertReply crep;
  crep.request_id = m.request_id;
  crep.replier = id_;
  crep.certificates = {issue_for(m.origin, claimed, env.now())};
  crep.exchange_offer = false;  // bootstrap is mutual by construction
  crep.replier_cert = self_certificate(env.now());
  crep.paths_used = select_disjoint_paths(cache_.lookup(m.origin), params_.k_paths);
  sign_envelope(crep);
  for (const auto& path : crep.paths_used) env.send_routed(id_, path, crep);
}

// ---------------------------------------------------------------------------
// CREP handling
// ---------------------------------------------------------------------------

ExchangeSession* Node::session_by_request(std::uint32_t request_id) {
  auto it = request_to_target_.find(request_id);
  if (it == request_to_target_.end()) return nullptr;
  auto sit = sessions_.find(it->second);
  return sit == sessions_.end() ? nullptr : &sit->second;
}

void Node::on_crep(Env& env, const CertReply& m) {
  ExchangeSession* session = session_by_request(m.request_id);
  if (session == nullptr || session->state != ExchangeSession::State::pending) return;
  if (!session->seen_creps.insert({m.replier, m.request_id}).second) return;

  auto replier_key = resolve_key(m.replier, m.replier_cert, env.now());
  if (!replier_key) return;  // unattributable, drop silently

  if (!envelope_ok(Message(m), *replier_key, m.signature)) {
    trust_.initial_trust(m.replier);
    trust_.on_spurious(m.replier);
    return;
  }

  for (const auto& cert : m.certificates) {
    if (cert.subject != session->target ||
        !validate_certificate(scheme_, cert, *replier_key, env.now())) {
      trust_.initial_trust(m.replier);
      trust_.on_spurious(m.replier);
      return;
    }
  }

  if (session->bootstrap) {
    handle_bootstrap_crep(env, *session, m, *replier_key);
    return;
  }

  for (const auto& cert : m.certificates) {
    auto cand = std::find_if(session->candidates.begin(), session->candidates.end(),
                             [&](const KeyCandidate& c) { return c.key == cert.subject_key; });
    if (cand == session->candidates.end()) {
      session->candidates.push_back(KeyCandidate{cert.subject_key, {}, 0.0});
      cand = std::prev(session->candidates.end());
    }
    cand->certifiers.emplace(m.replier, cert);  // duplicates collapse by id
  }

  if (m.exchange_offer) {
    bool known_offer = std::any_of(session->offers.begin(), session->offers.end(),
                                   [&](const auto& o) { return o.first == m.replier; });
    if (!known_offer) session->offers.emplace_back(m.replier, m.replier_cert);
  }

  Decision decision = decide_key(session->candidates, trust_, session->mpktv);
  if (decision.accepted) {
    finalize_acceptance(env, *session, decision);
  }
}

void Node::handle_bootstrap_crep(Env& env, ExchangeSession& session, const CertReply& m,
                                 const PublicKey& replier_key) {
  (void)replier_key;
  for (const auto& cert : m.certificates) {
    if (cert.subject_key != keys_.pub) {
      // Someone certifying a wrong key for us is spurious by definition.
      trust_.initial_trust(m.replier);
      trust_.on_spurious(m.replier);
      return;
    }
  }
  auto cand = std::find_if(session.candidates.begin(), session.candidates.end(),
                           [&](const KeyCandidate& c) { return c.key == keys_.pub; });
  if (cand == session.candidates.end()) {
    session.candidates.push_back(KeyCandidate{keys_.pub, {}, 0.0});
    cand = std::prev(session.candidates.end());
  }
  cand->certifiers.emplace(m.replier, m.certificates.empty() ? Certificate{} : m.certificates[0]);
  store_.store_cert(m.certificates.empty() ? Certificate{} : m.certificates[0]);

  // Certify the certifier back right away; partial bootstrap keeps whatever
  // mutual certifications completed.
  accept_offer(env, m.replier, m.replier_cert);

  if (session.state == ExchangeSession::State::pending &&
      cand->certifiers.size() >= session.required) {
    session.state = ExchangeSession::State::accepted;
    session.decided_at = env.now();
    session.accepted_key = keys_.pub;
    for (const auto& [certifier, cert] : cand->certifiers) {
      session.winning_certifiers.push_back(certifier);
    }
    env.session_decided(session);
  }
}

void Node::finalize_acceptance(Env& env, ExchangeSession& session, const Decision& decision) {
  if (decision.combined + 1e-12 < session.mpktv.threshold) {
    throw std::logic_error("accepted key below session threshold");
  }
  session.state = ExchangeSession::State::accepted;
  session.decided_at = env.now();
  session.accepted_key = decision.key;
  session.winning_certifiers = decision.certifiers;
  session.combined = decision.combined;

  for (NodeId certifier : decision.certifiers) {
    trust_.initial_trust(certifier);
    trust_.on_confirmation(certifier);
  }
  for (NodeId loser : detect_conflicts(session.candidates, decision.key)) {
    trust_.initial_trust(loser);
    trust_.on_spurious(loser);
  }

  store_.bindings.insert_or_assign(session.target, decision.key);
  for (const auto& cand : session.candidates) {
    if (cand.key != decision.key) continue;
    for (const auto& [certifier, cert] : cand.certifiers) store_.store_cert(cert);
  }
  issue_for(session.target, decision.key, env.now());

  env.session_decided(session);

  // Mutual certification with volunteering repliers that backed the winner.
  std::size_t accepted_offers = 0;
  for (const auto& [peer, cert] : session.offers) {
    if (accepted_offers >= params_.offer_cap) break;
    if (!contains(session.winning_certifiers, peer)) continue;
    accept_offer(env, peer, cert);
    ++accepted_offers;
  }

  begin_first_contact(env, session);
}

void Node::fail_session(Env& env, ExchangeSession& session) {
  session.state = ExchangeSession::State::failed;
  session.decided_at = env.now();
  env.session_decided(session);
}

void Node::begin_first_contact(Env& env, ExchangeSession& session) {
  NodeId target = session.target;
  if (auto route = best_route(target)) {
    send_first_contact(env, target, *route);
    return;
  }
  pending_contact_.insert(target);
  std::uint32_t ttl = params_.ttl_schedule.back();
  discover_routes(env, target, ttl);
  env.schedule(id_, attempt_timeout(ttl), ContactTimeout{target});
}

void Node::send_first_contact(Env& env, NodeId target, const SourceRoute& route) {
  auto it = sessions_.find(target);
  if (it == sessions_.end() || it->second.state != ExchangeSession::State::accepted) return;
  ExchangeSession& session = it->second;

  FirstContact contact;
  contact.origin = id_;
  contact.target = target;
  contact.origin_cert = self_certificate(env.now());
  contact.target_cert = issue_for(target, session.accepted_key, env.now());
  contact.certifier_list = session.winning_certifiers;
  sign_envelope(contact);
  contact_route_used_.insert_or_assign(target, route);
  env.send_routed(id_, route, contact);
}

void Node::accept_offer(Env& env, NodeId peer, const Certificate& peer_self_cert) {
  if (peer_self_cert.subject != peer || !validate_self_signed(scheme_, peer_self_cert, env.now())) {
    return;
  }
  store_.bindings.try_emplace(peer, peer_self_cert.subject_key);
  store_.store_cert(peer_self_cert);

  OfferAccept msg;
  msg.origin = id_;
  msg.peer = peer;
  msg.origin_cert = self_certificate(env.now());
  msg.peer_cert = issue_for(peer, store_.bindings.at(peer), env.now());
  sign_envelope(msg);
  send_to(env, peer, msg);
}

// ---------------------------------------------------------------------------
// Mutual certification legs
// ---------------------------------------------------------------------------

void Node::on_first_contact(Env& env, const FirstContact& m, const SourceRoute* via) {
  if (m.target != id_) return;
  auto origin_key = resolve_key(m.origin, m.origin_cert, env.now());
  if (!origin_key || !envelope_ok(Message(m), *origin_key, m.signature)) return;
  if (m.target_cert.subject != id_ || m.target_cert.subject_key != keys_.pub) {
    return;  // a first contact built on a corrupted key for us: refuse
  }
  if (!validate_certificate(scheme_, m.target_cert, *origin_key, env.now())) return;

  auto existing = store_.bindings.find(m.origin);
  if (existing != store_.bindings.end() && existing->second != *origin_key) return;
  store_.bindings.try_emplace(m.origin, *origin_key);
  store_.store_cert(m.origin_cert);
  store_.store_cert(m.target_cert);
  trust_.add_known(m.origin);  // the origin now certifies our key
  certifier_view_[m.origin] = m.certifier_list;

  FirstContactAck ack;
  ack.origin = m.origin;
  ack.target = id_;
  ack.origin_cert = issue_for(m.origin, *origin_key, env.now());
  sign_envelope(ack);
  if (via != nullptr) {
    env.send_routed(id_, via->reversed(), ack);
  } else {
    send_to(env, m.origin, ack);
  }
}

void Node::on_first_contact_ack(Env& env, const FirstContactAck& m) {
  if (m.origin != id_) return;
  auto target_key = store_.bindings.find(m.target);
  if (target_key == store_.bindings.end()) return;
  if (!envelope_ok(Message(m), target_key->second, m.signature)) return;
  if (m.origin_cert.subject != id_ || m.origin_cert.subject_key != keys_.pub) return;
  if (!validate_certificate(scheme_, m.origin_cert, target_key->second, env.now())) return;
  store_.store_cert(m.origin_cert);
  trust_.add_known(m.target);
}

void Node::on_offer_accept(Env& env, const OfferAccept& m, const SourceRoute* via) {
  if (m.peer != id_) return;
  auto origin_key = resolve_key(m.origin, m.origin_cert, env.now());
  if (!origin_key || !envelope_ok(Message(m), *origin_key, m.signature)) return;
  if (m.peer_cert.subject != id_ || m.peer_cert.subject_key != keys_.pub) return;
  if (!validate_certificate(scheme_, m.peer_cert, *origin_key, env.now())) return;

  auto existing = store_.bindings.find(m.origin);
  if (existing != store_.bindings.end() && existing->second != *origin_key) return;
  store_.bindings.try_emplace(m.origin, *origin_key);
  store_.store_cert(m.origin_cert);
  store_.store_cert(m.peer_cert);
  trust_.add_known(m.origin);

  OfferAck ack;
  ack.peer = id_;
  ack.origin = m.origin;
  ack.origin_cert = issue_for(m.origin, *origin_key, env.now());
  sign_envelope(ack);
  if (via != nullptr) {
    env.send_routed(id_, via->reversed(), ack);
  } else {
    send_to(env, m.origin, ack);
  }
}

void Node::on_offer_ack(Env& env, const OfferAck& m) {
  if (m.origin != id_) return;
  auto peer_key = store_.bindings.find(m.peer);
  if (peer_key == store_.bindings.end()) return;
  if (!envelope_ok(Message(m), peer_key->second, m.signature)) return;
  if (m.origin_cert.subject != id_ || m.origin_cert.subject_key != keys_.pub) return;
  if (!validate_certificate(scheme_, m.origin_cert, peer_key->second, env.now())) return;
  store_.store_cert(m.origin_cert);
  trust_.add_known(m.peer);
}

// ---------------------------------------------------------------------------
// Intermediate-relay mutual authentication (cached-route notice)
// ---------------------------------------------------------------------------

void Node::on_target_notice(Env& env, const TargetNotice& m, const SourceRoute* via) {
  if (m.target != id_) return;
  auto relay_key = resolve_key(m.relay, m.relay_cert, env.now());
  if (!relay_key || !envelope_ok(Message(m), *relay_key, m.signature)) return;
  if (store_.bindings.contains(m.origin)) return;
  if (pending_pull_.contains(m.origin)) return;
  pending_pull_.emplace(m.origin, m.relay);

  OriginCertRequest req;
  req.request_id = m.request_id;
  req.requester = id_;
  req.subject = m.origin;
  sign_envelope(req);
  if (via != nullptr) {
    env.send_routed(id_, via->reversed(), req);
  } else {
    send_to(env, m.relay, req);
  }
}

void Node::on_origin_cert_request(Env& env, const OriginCertRequest& m, const SourceRoute* via) {
  auto requester_key = store_.bindings.find(m.requester);
  if (requester_key == store_.bindings.end()) return;
  if (!envelope_ok(Message(m), requester_key->second, m.signature)) return;

  OriginCertReply reply;
  reply.request_id = m.request_id;
  reply.relay = id_;
  auto binding = store_.bindings.find(m.subject);
  if (binding != store_.bindings.end()) {
    reply.cert = issue_for(m.subject, binding->second, env.now());
  } else {
    auto seen = creq_origin_certs_.find(m.request_id);
    if (seen == creq_origin_certs_.end()) return;
    reply.cert = seen->second;  // pass the origin's self-claim through
  }
  sign_envelope(reply);
  if (via != nullptr) {
    env.send_routed(id_, via->reversed(), reply);
  } else {
    send_to(env, m.requester, reply);
  }
}

void Node::on_origin_cert_reply(Env& env, const OriginCertReply& m) {
  auto relay_binding = store_.bindings.find(m.relay);
  if (relay_binding == store_.bindings.end()) return;
  if (!envelope_ok(Message(m), relay_binding->second, m.signature)) return;

  NodeId subject = m.cert.subject;
  auto pull = pending_pull_.find(subject);
  if (pull == pending_pull_.end() || pull->second != m.relay) return;
  pending_pull_.erase(pull);

  NodeId certifier = m.cert.self_signed ? subject : m.relay;
  const PublicKey& issuer_key =
      m.cert.self_signed ? m.cert.subject_key : relay_binding->second;
  if (!validate_certificate(scheme_, m.cert, issuer_key, env.now())) return;

  if (auto existing = store_.bindings.find(subject); existing != store_.bindings.end()) {
    if (existing->second == m.cert.subject_key && certifier != subject) {
      trust_.on_confirmation(certifier);
    }
    return;
  }

  // Single-certifier decision at this node's own threshold.
  if (trust_.initial_trust(certifier).value() >= params_.default_mpktv) {
    store_.bindings.emplace(subject, m.cert.subject_key);
    store_.store_cert(m.cert);
    issue_for(subject, m.cert.subject_key, env.now());
  }
}

// ---------------------------------------------------------------------------
// Implicit revocation refresh
// ---------------------------------------------------------------------------

void Node::on_refresh_request(Env& env, const RefreshRequest& m, const SourceRoute* via) {
  if (m.to != id_) return;
  auto binding = store_.bindings.find(m.from);
  PublicKey sender_key;
  if (binding != store_.bindings.end() &&
      envelope_ok(Message(m), binding->second, m.signature)) {
    sender_key = binding->second;
  } else if (validate_self_signed(scheme_, m.from_cert, env.now()) &&
             m.from_cert.subject == m.from &&
             envelope_ok(Message(m), m.from_cert.subject_key, m.signature)) {
    // Key rotation: the envelope verifies under the fresh self-certificate.
    sender_key = m.from_cert.subject_key;
    store_.bindings.insert_or_assign(m.from, sender_key);
  } else {
    return;
  }
  store_.store_cert(m.from_cert);
  if (m.peer_cert.subject == id_ && m.peer_cert.subject_key == keys_.pub &&
      validate_certificate(scheme_, m.peer_cert, sender_key, env.now())) {
    store_.store_cert(m.peer_cert);
  }

  auto their_binding = store_.bindings.find(m.from);
  if (their_binding == store_.bindings.end()) return;
  RefreshReply reply;
  reply.from = id_;
  reply.to = m.from;
  reply.peer_cert = issue_for(m.from, their_binding->second, env.now());
  reply.from_cert = self_certificate(env.now());
  sign_envelope(reply);
  if (via != nullptr) {
    env.send_routed(id_, via->reversed(), reply);
  } else {
    send_to(env, m.from, reply);
  }
}

void Node::on_refresh_reply(Env& env, const RefreshReply& m) {
  if (m.to != id_) return;
  auto binding = store_.bindings.find(m.from);
  if (binding == store_.bindings.end()) return;
  if (!envelope_ok(Message(m), binding->second, m.signature)) return;
  store_.store_cert(m.from_cert);
  if (m.peer_cert.subject == id_ && m.peer_cert.subject_key == keys_.pub &&
      validate_certificate(scheme_, m.peer_cert, binding->second, env.now())) {
    store_.store_cert(m.peer_cert);
  }
}

}  // namespace certmesh
