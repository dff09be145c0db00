#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "certmesh/types.hpp"

namespace certmesh {

// Full hop list from source to destination inclusive. Construction rejects
// routes shorter than two hops and routes that revisit a node.
class SourceRoute {
 public:
  SourceRoute() = default;
  explicit SourceRoute(std::vector<NodeId> hops);

  const std::vector<NodeId>& hops() const { return hops_; }
  NodeId source() const { return hops_.front(); }
  NodeId destination() const { return hops_.back(); }
  std::size_t links() const { return hops_.size() - 1; }
  std::span<const NodeId> intermediates() const {
    return std::span<const NodeId>(hops_).subspan(1, hops_.size() - 2);
  }
  bool contains_link(NodeId a, NodeId b) const;
  SourceRoute reversed() const;

  auto operator<=>(const SourceRoute&) const = default;

 private:
  std::vector<NodeId> hops_;
};

// DSR-lite per-node cache: a bounded set of routes per destination, all
// starting at the owner, evicted oldest-first.
class RouteCache {
 public:
  RouteCache() = default;
  RouteCache(NodeId owner, std::size_t capacity_per_destination)
      : owner_(owner), capacity_(capacity_per_destination) {}

  NodeId owner() const { return owner_; }

  // Re-inserting an identical route refreshes its age.
  void insert(const SourceRoute& route);

  std::vector<SourceRoute> lookup(NodeId destination) const;

  // Drops every cached route that traverses the (a, b) link in either
  // direction; returns how many were dropped.
  std::size_t invalidate_link(NodeId a, NodeId b);

  void remove(const SourceRoute& route);

  std::size_t size() const;

 private:
  NodeId owner_;
  std::size_t capacity_ = 8;
  std::map<NodeId, std::vector<SourceRoute>> routes_;  // newest last
};

// Greedy node-disjoint selection, shortest routes first: a route is taken iff
// its intermediates share no node with any already-selected route. All input
// routes must share both endpoints. Stops after k routes.
std::vector<SourceRoute> select_disjoint_paths(std::vector<SourceRoute> routes, std::size_t k);

// Flood messages for DSR-lite discovery.
struct RouteRequest {
  NodeId origin;
  NodeId target;
  std::uint32_t request_id = 0;
  std::vector<NodeId> accumulated_hops;  // starts at origin
  std::uint32_t ttl = 0;
};

struct RouteReply {
  NodeId origin;
  NodeId target;
  std::uint32_t request_id = 0;
  SourceRoute route;  // full origin -> target route
};

}  // namespace certmesh
