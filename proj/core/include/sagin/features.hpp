#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "sagin/substrate.hpp"

namespace sagin {

inline constexpr int kNumFeatures = 4;

// Per-node observation: (available CPU, available STO, incident available
// bandwidth sum, average hop distance within the domain), in that order.
struct FeatureVector {
  double cpu = 0.0;
  double sto = 0.0;
  double bw_sum = 0.0;
  double avg_dist = 0.0;

  double operator[](std::size_t i) const {
    switch (i) {
      case 0: return cpu;
      case 1: return sto;
      case 2: return bw_sum;
      default: return avg_dist;
    }
  }
  double& operator[](std::size_t i) {
    switch (i) {
      case 0: return cpu;
      case 1: return sto;
      case 2: return bw_sum;
      default: return avg_dist;
    }
  }
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<NodeId> node_order;  // ascending, aligned with rows
  bool normalized = false;

  int row_count() const { return static_cast<int>(rows.size()); }
  bool operator==(const FeatureMatrix&) const = default;
};

// A connected set of substrate nodes observed by one agent. Hop distances
// depend only on topology, which never changes during a run, so the
// average-distance column is computed once here and reused.
class DomainScope {
 public:
  DomainScope() = default;

  const std::vector<NodeId>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool contains(NodeId id) const { return row_of(id) >= 0; }
  int row_of(NodeId id) const;      // -1 when outside the scope
  double avg_dist(NodeId id) const;  // cached, throws on unknown node

 private:
  friend DomainScope make_scope(const SubstrateNetwork& net, std::vector<NodeId> nodes);

  std::vector<NodeId> nodes_;           // ascending
  std::vector<double> avg_dist_;        // aligned with nodes_
  std::unordered_map<NodeId, int> row_;
};

// Throws std::invalid_argument on empty/duplicate/unknown nodes and
// std::runtime_error when the induced subgraph is disconnected.
DomainScope make_scope(const SubstrateNetwork& net, std::vector<NodeId> nodes);
DomainScope make_domain_scope(const SubstrateNetwork& net, Domain d);

// Mean hop count from `id` to the other scope nodes, divided by the scope
// size; computed fresh (breadth-first) on every call.
double avg_distance(const SubstrateNetwork& net, NodeId id, const DomainScope& scope);

FeatureVector node_feature(const SubstrateNetwork& net, NodeId id,
                           const DomainScope& scope);

// One row per scope node in ascending node-id order. When normalize is set,
// each column is divided by its maximum; all-zero columns are left as-is.
FeatureMatrix feature_matrix(const SubstrateNetwork& net, const DomainScope& scope,
                             bool normalize);
FeatureMatrix normalize_columns(FeatureMatrix fm);

}  // namespace sagin
