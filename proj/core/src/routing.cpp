#include "certmesh/routing.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace certmesh {

SourceRoute::SourceRoute(std::vector<NodeId> hops) : hops_(std::move(hops)) {
  if (hops_.size() < 2) {
    throw std::invalid_argument("source route needs at least two hops");
  }
  std::set<NodeId> seen;
  for (NodeId h : hops_) {
    if (!seen.insert(h).second) {
      throw std::invalid_argument("source route revisits a node");
    }
  }
}

bool SourceRoute::contains_link(NodeId a, NodeId b) const {
  for (std::size_t i = 0; i + 1 < hops_.size(); ++i) {
    if ((hops_[i] == a && hops_[i + 1] == b) || (hops_[i] == b && hops_[i + 1] == a)) {
      return true;
    }
  }
  return false;
}

SourceRoute SourceRoute::reversed() const {
  std::vector<NodeId> rev(hops_.rbegin(), hops_.rend());
  return SourceRoute(std::move(rev));
}

void RouteCache::insert(const SourceRoute& route) {
  if (route.source() != owner_) {
    throw std::invalid_argument("cached route must start at cache owner");
  }
  auto& bucket = routes_[route.destination()];
  std::erase(bucket, route);
  bucket.push_back(route);
  while (bucket.size() > capacity_) bucket.erase(bucket.begin());
}

std::vector<SourceRoute> RouteCache::lookup(NodeId destination) const {
  auto it = routes_.find(destination);
  if (it == routes_.end()) return {};
  return it->second;
}

std::size_t RouteCache::invalidate_link(NodeId a, NodeId b) {
  std::size_t dropped = 0;
  for (auto& [dst, bucket] : routes_) {
    dropped += std::erase_if(bucket, [&](const SourceRoute& r) { return r.contains_link(a, b); });
  }
  return dropped;
}

void RouteCache::remove(const SourceRoute& route) {
  auto it = routes_.find(route.destination());
  if (it != routes_.end()) std::erase(it->second, route);
}

std::size_t RouteCache::size() const {
  std::size_t n = 0;
  for (const auto& [dst, bucket] : routes_) n += bucket.size();
  return n;
}

std::vector<SourceRoute> select_disjoint_paths(std::vector<SourceRoute> routes, std::size_t k) {
  std::vector<SourceRoute> selected;
  if (routes.empty() || k == 0) return selected;

  for (const auto& r : routes) {
    if (r.source() != routes.front().source() || r.destination() != routes.front().destination()) {
      throw std::invalid_argument("disjoint selection requires shared endpoints");
    }
  }
  // Shortest first; hop-list order breaks length ties deterministically.
  std::sort(routes.begin(), routes.end(), [](const SourceRoute& a, const SourceRoute& b) {
    if (a.hops().size() != b.hops().size()) return a.hops().size() < b.hops().size();
    return a.hops() < b.hops();
  });

  std::set<NodeId> used;
  for (const auto& route : routes) {
    bool clash = false;
    for (NodeId mid : route.intermediates()) {
      if (used.contains(mid)) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    for (NodeId mid : route.intermediates()) used.insert(mid);
    selected.push_back(route);
    if (selected.size() == k) break;
  }
  return selected;
}

}  // namespace certmesh
