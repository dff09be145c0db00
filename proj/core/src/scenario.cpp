#include "certmesh/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace certmesh {

namespace {

constexpr std::uint64_t kTagAttackers = 0x61747461ull;  // "atta"
constexpr std::uint64_t kTagSessions = 0x73657373ull;   // "sess"
constexpr std::uint64_t kTagKnown = 0x6b6e6f77ull;      // "know"

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Mutual initialization certificates between an endpoint and a chosen peer,
// as if both completed the bootstrap step before the run.
void preseed_pair(SignatureScheme& scheme, Node& a, Node& b, Seconds lifetime) {
  Certificate a_about_b =
      issue_certificate(scheme, a.keys(), a.id(), b.id(), b.public_key(), 0.0, lifetime);
  Certificate b_about_a =
      issue_certificate(scheme, b.keys(), b.id(), a.id(), a.public_key(), 0.0, lifetime);

  a.store().bindings.insert_or_assign(b.id(), b.public_key());
  b.store().bindings.insert_or_assign(a.id(), a.public_key());
  a.store().issued.push_back(a_about_b);
  b.store().issued.push_back(b_about_a);
  a.store().store_cert(a_about_b);
  a.store().store_cert(b_about_a);
  b.store().store_cert(b_about_a);
  b.store().store_cert(a_about_b);
  a.trust().add_known(b.id());
  b.trust().add_known(a.id());
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  require(cfg.nodes >= 2, "config: nodes must be >= 2");
  require(cfg.area_x > 0 && cfg.area_y > 0, "config: area must be positive");
  require(cfg.duration > 0, "config: duration must be positive");
  require(cfg.vmax > 0, "config: vmax must be positive");
  require(cfg.pause >= 0, "config: pause must be >= 0");
  require(cfg.attacker_fraction >= 0 && cfg.attacker_fraction <= 1,
          "config: attacker_fraction must be in [0,1]");
  require(cfg.mpktv >= 0 && cfg.mpktv <= 1, "config: mpktv must be in [0,1]");
  require(!cfg.ttl_schedule.empty(), "config: ttl_schedule must not be empty");
  for (auto ttl : cfg.ttl_schedule) require(ttl >= 1, "config: ttl entries must be >= 1");
  require(cfg.radio_range > 0, "config: radio_range must be positive");
  require(cfg.hop_delay > 0, "config: hop_delay must be positive");
  require(cfg.k_paths >= 1, "config: k_paths must be >= 1");
  require(cfg.cert_lifetime > 0, "config: cert_lifetime must be positive");
  require(cfg.replications >= 1, "config: replications must be >= 1");
  std::size_t attackers = static_cast<std::size_t>(cfg.attacker_fraction * cfg.nodes);
  if (cfg.sessions > 0) {
    require(cfg.nodes - attackers >= 2, "config: too few honest nodes for sessions");
  }
}

RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, TraceSink* trace) {
  validate(cfg);

  WorldConfig wcfg;
  wcfg.node_count = cfg.nodes;
  wcfg.area_x = cfg.area_x;
  wcfg.area_y = cfg.area_y;
  wcfg.vmax = cfg.vmax;
  wcfg.pause = cfg.pause;
  wcfg.radio = RadioModel{cfg.radio_range, cfg.hop_delay};
  wcfg.duration = cfg.duration;
  wcfg.protocol.ttl_schedule = cfg.ttl_schedule;
  wcfg.protocol.hop_delay = cfg.hop_delay;
  wcfg.protocol.k_paths = cfg.k_paths;
  wcfg.protocol.cert_lifetime = cfg.cert_lifetime;
  wcfg.protocol.refresh_period = cfg.refresh_period;
  wcfg.protocol.default_mpktv = cfg.mpktv;

  World world(wcfg, seed);
  world.set_trace(trace);

  GroundTruthRegistry registry;
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    NodeId id{static_cast<std::uint32_t>(i)};
    registry.register_node(id, world.node(id).public_key());
  }

  // Attacker designation.
  std::size_t attacker_count = static_cast<std::size_t>(cfg.attacker_fraction * cfg.nodes);
  std::vector<NodeId> everyone;
  for (std::size_t i = 0; i < cfg.nodes; ++i) everyone.push_back(NodeId{static_cast<std::uint32_t>(i)});
  Rng attacker_rng(derive_seed(seed, kTagAttackers));
  std::vector<NodeId> attacker_list = attacker_rng.sample(everyone, attacker_count);
  std::set<NodeId> attackers(attacker_list.begin(), attacker_list.end());

  AdversaryModel adversary(cfg.attacker_mode, attackers, seed, world.scheme());
  for (NodeId a : attackers) world.make_attacker(a, adversary, cfg.attacker_drops);

  std::vector<NodeId> honest;
  for (NodeId id : everyone) {
    if (!attackers.contains(id)) honest.push_back(id);
  }

  // Session endpoints are honest pairs; duplicates of an ordered pair would
  // collide in the per-node session map, so they are redrawn.
  Rng session_rng(derive_seed(seed, kTagSessions));
  struct Plan {
    NodeId origin, target;
    Seconds start;
  };
  std::vector<Plan> plans;
  std::set<std::pair<NodeId, NodeId>> used_pairs;
  for (std::size_t s = 0; s < cfg.sessions; ++s) {
    NodeId origin, target;
    do {
      origin = honest[session_rng.below(honest.size())];
      target = honest[session_rng.below(honest.size())];
    } while (origin == target || used_pairs.contains({origin, target}));
    used_pairs.insert({origin, target});
    Seconds start = session_rng.uniform(0.0, cfg.duration / 2.0);
    plans.push_back({origin, target, start});
  }

  // Initialization step is assumed done: seed K(endpoint) with known_certs
  // honest peers for each session endpoint.
  Rng known_rng(derive_seed(seed, kTagKnown));
  for (const Plan& plan : plans) {
    for (NodeId endpoint : {plan.origin, plan.target}) {
      std::vector<NodeId> pool;
      for (NodeId h : honest) {
        if (h != plan.origin && h != plan.target) pool.push_back(h);
      }
      for (NodeId peer : known_rng.sample(pool, cfg.known_certs)) {
        if (world.node(endpoint).trust().is_known(peer)) continue;
        preseed_pair(world.scheme(), world.node(endpoint), world.node(peer), cfg.cert_lifetime);
      }
    }
  }

  for (const Plan& plan : plans) {
    world.schedule_session(plan.start, plan.origin, plan.target, cfg.mpktv);
  }
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    world.node(NodeId{static_cast<std::uint32_t>(i)}).schedule_refresh(world);
  }

  world.run(cfg.duration);
  world.fail_pending_sessions();

  // Assemble metrics in plan order.
  RunResult result;
  result.metrics.requested = plans.size();
  result.metrics.messages_sent = world.messages_sent();
  result.metrics.bytes_sent = world.bytes_sent();

  for (const Plan& plan : plans) {
    const ExchangeSession* decided = nullptr;
    for (const auto& session : world.decided_sessions()) {
      if (session.origin == plan.origin && session.target == plan.target) {
        decided = &session;
        break;
      }
    }
    if (decided == nullptr) throw std::logic_error("planned session never resolved");

    SessionOutcome outcome;
    outcome.origin = plan.origin;
    outcome.target = plan.target;
    outcome.state = decided->state;
    outcome.started_at = decided->started_at;
    outcome.decided_at = decided->decided_at;
    if (decided->state == ExchangeSession::State::accepted) {
      outcome.accepted_key = decided->accepted_key;
      outcome.winning_certifiers = decided->winning_certifiers;
      outcome.combined_trust = decided->combined;
      outcome.corrupted =
          registry.classify(plan.target, decided->accepted_key) == KeyClass::corrupted;
      outcome.all_certifiers_attackers =
          std::all_of(outcome.winning_certifiers.begin(), outcome.winning_certifiers.end(),
                      [&](NodeId c) { return attackers.contains(c); });
      if (outcome.corrupted) {
        result.metrics.accepted_corrupted += 1;
      } else {
        result.metrics.accepted_valid += 1;
      }
      result.metrics.delays.push_back(*decided->decided_at - decided->started_at);
    } else {
      result.metrics.failed += 1;
    }
    result.sessions.push_back(std::move(outcome));
  }

  if (result.metrics.accepted_valid + result.metrics.accepted_corrupted + result.metrics.failed !=
      result.metrics.requested) {
    throw std::logic_error("metrics conservation violated");
  }
  std::uint64_t flood_bound =
      static_cast<std::uint64_t>(cfg.nodes) * cfg.ttl_schedule.size();
  for (const auto& [key, count] : world.creq_broadcasts()) {
    if (count > flood_bound) throw std::logic_error("CREQ flood suppression bound violated");
  }
  return result;
}

Rates compute_rates(const MetricsReport& report) {
  Rates rates;
  if (report.requested == 0) return rates;
  rates.valid_rate = static_cast<double>(report.accepted_valid) / report.requested;
  rates.corrupted_rate = static_cast<double>(report.accepted_corrupted) / report.requested;
  if (!report.delays.empty()) {
    double sum = 0;
    for (double d : report.delays) sum += d;
    rates.mean_delay = sum / static_cast<double>(report.delays.size());
  }
  return rates;
}

}  // namespace certmesh
