#include "certmesh/trust.hpp"

#include <algorithm>
#include <stdexcept>

namespace certmesh {

TrustValue::TrustValue(double v) : value_(v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("trust value outside [0,1]");
  }
}

TrustValue noisy_or(std::span<const TrustValue> trusts) {
  double miss = 1.0;
  for (const auto& t : trusts) miss *= 1.0 - t.value();
  // Guard rounding: the product of factors in [0,1] stays in [0,1].
  return TrustValue(std::clamp(1.0 - miss, 0.0, 1.0));
}

TrustValue TrustTable::initial_trust(NodeId peer) {
  auto it = entries_.find(peer);
  if (it != entries_.end()) return it->second;
  double v = known_.contains(peer) ? params_.known_initial : params_.default_initial;
  auto [ins, _] = entries_.emplace(peer, TrustValue(v));
  return ins->second;
}

void TrustTable::add_known(NodeId peer) {
  known_.insert(peer);
  entries_.try_emplace(peer, TrustValue(params_.known_initial));
}

TrustValue TrustTable::on_confirmation(NodeId issuer) {
  TrustValue cur = initial_trust(issuer);
  double t = cur.value();
  t = std::min(1.0, t + params_.confirmation_reward * (1.0 - t));
  entries_[issuer] = TrustValue(t);
  return entries_[issuer];
}

TrustValue TrustTable::on_spurious(NodeId issuer) {
  TrustValue cur = initial_trust(issuer);
  entries_[issuer] = TrustValue(cur.value() * params_.spurious_factor);
  return entries_[issuer];
}

Decision decide_key(std::vector<KeyCandidate>& candidates, TrustTable& table, Mpktv mpktv,
                    const TrustCombiner& combine) {
  Decision decision;
  if (candidates.empty()) return decision;

  for (auto& cand : candidates) {
    std::vector<TrustValue> trusts;
    trusts.reserve(cand.certifiers.size());
    for (const auto& [certifier, cert] : cand.certifiers) {
      trusts.push_back(table.initial_trust(certifier));
    }
    cand.combined_trust = combine(trusts).value();
  }

  const KeyCandidate* best = &candidates.front();
  for (const auto& cand : candidates) {
    if (cand.combined_trust > best->combined_trust) best = &cand;
  }
  if (best->combined_trust < mpktv.threshold) return decision;
  for (const auto& cand : candidates) {
    if (&cand != best && cand.combined_trust >= best->combined_trust) {
      return decision;  // tie between conflicting candidates: undecided
    }
  }

  decision.accepted = true;
  decision.key = best->key;
  decision.combined = best->combined_trust;
  for (const auto& [certifier, cert] : best->certifiers) {
    decision.certifiers.push_back(certifier);
  }
  return decision;
}

std::vector<NodeId> detect_conflicts(const std::vector<KeyCandidate>& candidates,
                                     const PublicKey& accepted_key) {
  std::vector<NodeId> losers;
  for (const auto& cand : candidates) {
    if (cand.key == accepted_key) continue;
    for (const auto& [certifier, cert] : cand.certifiers) {
      losers.push_back(certifier);
    }
  }
  std::sort(losers.begin(), losers.end());
  losers.erase(std::unique(losers.begin(), losers.end()), losers.end());
  return losers;
}

}  // namespace certmesh
