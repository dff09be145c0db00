#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "certmesh/scenario.hpp"

namespace certmesh {

// Experiment grid: every cell runs `replications` times with derived seeds
// base_seed .. base_seed + replications - 1.
struct SweepSpec {
  ScenarioConfig base;
  std::vector<double> attacker_fractions{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> mpktvs{0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> known_certs{0, 5, 10, 20};
  std::size_t replications = 10;
  std::size_t jobs = 1;  // cells may run in parallel; output order is fixed
};

// One CSV row: either one replicate of a cell, or the cell's mean row
// (replicate empty).
struct SweepRow {
  double attacker_fraction = 0;
  double mpktv = 0;
  std::size_t known_certs = 0;
  AttackerMode mode = AttackerMode::isolated;
  std::optional<std::size_t> replicate;  // empty => aggregated mean row
  std::optional<std::uint64_t> seed;
  std::optional<double> valid_rate;
  std::optional<double> corrupted_rate;
  std::optional<double> mean_delay;
  double failed = 0;
  double messages_sent = 0;
  double bytes_sent = 0;
};

// Runs the full grid; returns per-replicate rows plus one mean row per cell,
// sorted by (mode, attacker_fraction, mpktv, known_certs, replicate) with the
// mean row closing each cell. Deterministic given the base seed, regardless
// of job count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

extern const char* kCsvHeader;

std::string format_csv(const std::vector<SweepRow>& rows);

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace certmesh
