#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "certmesh/ground_truth.hpp"
#include "certmesh/sim.hpp"

namespace certmesh {

struct ScenarioConfig {
  std::size_t nodes = 100;
  double area_x = 1500;
  double area_y = 1500;
  Seconds duration = 120;
  double vmax = 10;
  Seconds pause = 30;
  std::size_t sessions = 5;
  double attacker_fraction = 0;
  AttackerMode attacker_mode = AttackerMode::isolated;
  bool attacker_drops = false;  // attackers also drop relayed certificates
  std::size_t known_certs = 0;
  double mpktv = 0.5;
  std::vector<std::uint32_t> ttl_schedule{2, 4, 8};
  double radio_range = 250;
  Seconds hop_delay = 0.001;
  std::size_t k_paths = 3;
  Seconds cert_lifetime = 120;
  Seconds refresh_period = 30;
  std::uint64_t seed = 1;
  std::size_t replications = 10;
};

// Throws std::invalid_argument on the first violated constraint.
void validate(const ScenarioConfig& cfg);

// The three paper metrics plus overhead counters for one run.
struct MetricsReport {
  std::size_t requested = 0;
  std::size_t accepted_valid = 0;
  std::size_t accepted_corrupted = 0;
  std::size_t failed = 0;
  std::vector<Seconds> delays;  // accepted sessions only
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
};

struct SessionOutcome {
  NodeId origin;
  NodeId target;
  ExchangeSession::State state = ExchangeSession::State::pending;
  Seconds started_at = 0;
  std::optional<Seconds> decided_at;
  PublicKey accepted_key;
  std::vector<NodeId> winning_certifiers;
  double combined_trust = 0;
  bool corrupted = false;                  // classification of the accepted key
  bool all_certifiers_attackers = false;   // winning set drawn only from attackers
};

struct RunResult {
  MetricsReport metrics;
  std::vector<SessionOutcome> sessions;
};

// Builds and executes one scenario. Identical (config, seed) pairs produce
// identical results, event logs included.
RunResult run_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                       TraceSink* trace = nullptr);

struct Rates {
  std::optional<double> valid_rate;
  std::optional<double> corrupted_rate;
  std::optional<double> mean_delay;  // empty when nothing was accepted
};

// Rates are unavailable (all empty) when requested == 0.
Rates compute_rates(const MetricsReport& report);

}  // namespace certmesh
