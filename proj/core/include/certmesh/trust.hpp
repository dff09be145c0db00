#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "certmesh/identity.hpp"
#include "certmesh/types.hpp"

namespace certmesh {

// Trust in a peer, always inside [0, 1].
class TrustValue {
 public:
  TrustValue() = default;
  explicit TrustValue(double v);
  double value() const { return value_; }
  auto operator<=>(const TrustValue&) const = default;

 private:
  double value_ = 0.0;
};

// Aggregate-trust threshold a requester demands before accepting a key.
struct Mpktv {
  double threshold = 0.5;
};

struct TrustParams {
  double known_initial = 0.75;     // peers authenticated during initialization
  double default_initial = 0.5;    // everyone else
  double confirmation_reward = 0.05;  // t += reward * (1 - t)
  double spurious_factor = 0.5;       // t *= factor
};

// Evidence combination across distinct certifiers. Default is noisy-OR,
// the two-state special case of Dempster-Shafer with no conflict mass;
// a full D-S rule can be plugged in through the same signature.
using TrustCombiner = std::function<TrustValue(std::span<const TrustValue>)>;

TrustValue noisy_or(std::span<const TrustValue> trusts);

// Per-node trust bookkeeping. `known` is K(owner): the peers that certified
// the owner's key; every known peer always has an entry.
class TrustTable {
 public:
  TrustTable() = default;
  TrustTable(NodeId owner, TrustParams params) : owner_(owner), params_(params) {}

  NodeId owner() const { return owner_; }
  const TrustParams& params() const { return params_; }

  // Existing entry wins; otherwise an entry is created at the known or
  // default initial value.
  TrustValue initial_trust(NodeId peer);

  // Marks a peer as a certifier of the owner's key. Creates an entry at the
  // known-initial value only if the peer has none yet; a peer that already
  // earned (or lost) trust keeps its value.
  void add_known(NodeId peer);

  bool is_known(NodeId peer) const { return known_.contains(peer); }
  const std::set<NodeId>& known() const { return known_; }

  TrustValue on_confirmation(NodeId issuer);
  TrustValue on_spurious(NodeId issuer);

  const std::map<NodeId, TrustValue>& entries() const { return entries_; }

 private:
  NodeId owner_;
  TrustParams params_;
  std::map<NodeId, TrustValue> entries_;
  std::set<NodeId> known_;
};

// One key proposed for a subject, with the distinct certifiers backing it.
struct KeyCandidate {
  PublicKey key;
  std::map<NodeId, Certificate> certifiers;  // dedup by issuer id
  double combined_trust = 0.0;
};

struct Decision {
  bool accepted = false;
  PublicKey key;
  std::vector<NodeId> certifiers;  // winning certifier set, sorted
  double combined = 0.0;
};

// Computes combined trust for every candidate (mutating the table through
// initial_trust), then accepts the best candidate iff it clears the MPKTV
// threshold and strictly beats every rival. Ties are rejected.
Decision decide_key(std::vector<KeyCandidate>& candidates, TrustTable& table, Mpktv mpktv,
                    const TrustCombiner& combine = noisy_or);

// Issuers of every certificate binding the subject to a key other than the
// accepted one. A node certifying both the winner and a loser still appears.
std::vector<NodeId> detect_conflicts(const std::vector<KeyCandidate>& candidates,
                                     const PublicKey& accepted_key);

}  // namespace certmesh
