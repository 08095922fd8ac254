#include "sagin/features.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace sagin {

namespace {

// Hop counts from `start` to every scope node, -1 for unreached.
std::vector<int> scope_hops(const SubstrateNetwork& net, NodeId start,
                            const DomainScope& scope) {
  std::vector<int> dist(scope.size(), -1);
  dist[scope.row_of(start)] = 0;
  std::queue<NodeId> q;
  q.push(start);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    const int du = dist[scope.row_of(u)];
    for (const auto& [nb, li] : net.incident(u)) {
      const int row = scope.row_of(nb);
      if (row < 0 || dist[row] >= 0) continue;
      dist[row] = du + 1;
      q.push(nb);
    }
  }
  return dist;
}

double mean_hops(const std::vector<int>& dist, NodeId id, int scope_size) {
  long long sum = 0;
  for (int d : dist) {
    if (d < 0) {
      throw std::runtime_error("scope is disconnected around node " +
                               std::to_string(id));
    }
    sum += d;
  }
  return static_cast<double>(sum) / scope_size;
}

}  // namespace

int DomainScope::row_of(NodeId id) const {
  auto it = row_.find(id);
  return it == row_.end() ? -1 : it->second;
}

double DomainScope::avg_dist(NodeId id) const {
  const int row = row_of(id);
  if (row < 0) throw std::out_of_range("node " + std::to_string(id) + " not in scope");
  return avg_dist_[row];
}

DomainScope make_scope(const SubstrateNetwork& net, std::vector<NodeId> nodes) {
  if (nodes.empty()) throw std::invalid_argument("empty domain scope");
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw std::invalid_argument("duplicate node in scope");
  }
  DomainScope scope;
  scope.nodes_ = std::move(nodes);
  for (int i = 0; i < scope.size(); ++i) {
    const NodeId id = scope.nodes_[i];
    if (id < 0 || id >= net.node_count()) {
      throw std::invalid_argument("scope references unknown node " +
                                  std::to_string(id));
    }
    scope.row_[id] = i;
  }
  scope.avg_dist_.resize(scope.size());
  for (int i = 0; i < scope.size(); ++i) {
    const NodeId id = scope.nodes_[i];
    scope.avg_dist_[i] = mean_hops(scope_hops(net, id, scope), id, scope.size());
  }
  return scope;
}

DomainScope make_domain_scope(const SubstrateNetwork& net, Domain d) {
  return make_scope(net, net.nodes_in_domain(d));
}

double avg_distance(const SubstrateNetwork& net, NodeId id, const DomainScope& scope) {
  if (!scope.contains(id)) {
    throw std::out_of_range("node " + std::to_string(id) + " not in scope");
  }
  return mean_hops(scope_hops(net, id, scope), id, scope.size());
}

FeatureVector node_feature(const SubstrateNetwork& net, NodeId id,
                           const DomainScope& scope) {
  const SubstrateNode& n = net.node(id);
  FeatureVector v;
  v.cpu = n.cpu_available;
  v.sto = n.sto_available;
  for (const auto& [nb, li] : net.incident(id)) {
    v.bw_sum += net.link(li).bw_available;
  }
  v.avg_dist = scope.avg_dist(id);
  return v;
}

FeatureMatrix feature_matrix(const SubstrateNetwork& net, const DomainScope& scope,
                             bool normalize) {
  if (scope.size() == 0) throw std::invalid_argument("empty domain scope");
  FeatureMatrix fm;
  fm.node_order = scope.nodes();
  fm.rows.reserve(scope.size());
  for (NodeId id : scope.nodes()) {
    fm.rows.push_back(node_feature(net, id, scope));
  }
  return normalize ? normalize_columns(std::move(fm)) : fm;
}

FeatureMatrix normalize_columns(FeatureMatrix fm) {
  for (int c = 0; c < kNumFeatures; ++c) {
    double max = 0.0;
    for (const auto& row : fm.rows) max = std::max(max, row[c]);
    if (max > 0.0) {
      for (auto& row : fm.rows) row[c] /= max;
    }
  }
  fm.normalized = true;
  return fm;
}

}  // namespace sagin
