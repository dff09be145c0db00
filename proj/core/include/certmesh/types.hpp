#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace certmesh {

// Simulation time in seconds.
using Seconds = double;

// Identifier of a node, unique within one scenario and stable for a run.
struct NodeId {
  std::uint32_t value = 0;
  constexpr auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId node_id(std::uint32_t v) { return NodeId{v}; }

}  // namespace certmesh

template <>
struct std::hash<certmesh::NodeId> {
  std::size_t operator()(const certmesh::NodeId& n) const noexcept {
    return std::hash<std::uint32_t>{}(n.value);
  }
};
