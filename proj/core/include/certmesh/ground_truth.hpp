#pragma once

#include <map>
#include <stdexcept>

#include "certmesh/identity.hpp"
#include "certmesh/types.hpp"

namespace certmesh {

enum class KeyClass { valid, corrupted };

// Omniscient map from node to its authentic public key. Consulted only by the
// metrics layer to classify accepted keys; no protocol handler sees this type.
class GroundTruthRegistry {
 public:
  void register_node(NodeId node, const PublicKey& key) {
    auto [it, inserted] = bindings_.emplace(node, key);
    if (!inserted) {
      throw std::logic_error("ground truth already registered for node");
    }
  }

  KeyClass classify(NodeId subject, const PublicKey& key) const {
    auto it = bindings_.find(subject);
    if (it == bindings_.end()) {
      throw std::logic_error("classify_key: subject not registered");
    }
    return it->second == key ? KeyClass::valid : KeyClass::corrupted;
  }

  std::size_t size() const { return bindings_.size(); }

 private:
  std::map<NodeId, PublicKey> bindings_;
};

}  // namespace certmesh
